#ifndef COHERENTIA_MODEL_HPP
#define COHERENTIA_MODEL_HPP

// Trainable parameters of the recursive coherence model and their text
// serialization.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include "coherentia/embeddings.hpp"

namespace coherentia {

struct Hyper {
  int dim = 100;     // K, embedding and sentence vector size
  int window = 3;    // L, sentences per clique
  int hidden = 100;  // H, clique hidden units

  bool operator==(const Hyper&) const = default;
};

// Composition layer: parent = tanh(weight * [left; right] + bias).
struct RecursiveParams {
  Matrix weight;  // K x 2K
  Vector bias;    // K

  int dim() const { return static_cast<int>(bias.size()); }
};

// Clique scorer: q = tanh(weight * gated + bias), p = sigmoid(output . q + output_bias).
struct CoherenceParams {
  Matrix weight;  // H x (L*K)
  Vector bias;    // H
  Vector output;  // H
  double output_bias = 0.0;
};

struct ModelParams {
  Hyper hyper;
  RecursiveParams recursive;
  CoherenceParams coherence;
  // Seed of the uniform initialization, recorded in the model file when set.
  std::optional<std::uint64_t> init_seed;

  static ModelParams zeros(const Hyper& hyper);

  // Throws ShapeError unless every tensor matches hyper.
  void check_shapes() const;
};

// Flat view of one tensor; `regularized` marks the weights penalized by the
// L2 term (biases are not).
struct TensorView {
  const char* name;
  std::span<double> values;
  int rows;
  int cols;
  bool regularized;
};

struct ConstTensorView {
  const char* name;
  std::span<const double> values;
  int rows;
  int cols;
  bool regularized;
};

inline constexpr std::size_t kTensorCount = 6;

// Tensors in file order: W_recursive, b_recursive, W_sen, b_sen, U, b.
// Values are exposed in Eigen's storage order (column-major).
std::array<TensorView, kTensorCount> tensors(ModelParams& model);
std::array<ConstTensorView, kTensorCount> tensors(const ModelParams& model);

// Each tensor uniform on +-sqrt(6 / (rows + cols)).
ModelParams init_uniform(const Hyper& hyper, std::uint64_t seed);

double squared_weight_norm(const ModelParams& model);

class ModelFormatError : public DataError {
 public:
  using DataError::DataError;
};

inline constexpr const char* kModelMagic = "coherentia-model";
inline constexpr const char* kModelVersion = "v1";

void write_model(const ModelParams& model, std::ostream& out);
ModelParams read_model(std::istream& in);
void save_model(const ModelParams& model, const std::filesystem::path& path);
ModelParams load_model(const std::filesystem::path& path);

}  // namespace coherentia

#endif  // COHERENTIA_MODEL_HPP
