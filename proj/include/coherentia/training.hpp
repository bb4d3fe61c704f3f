#ifndef COHERENTIA_TRAINING_HPP
#define COHERENTIA_TRAINING_HPP

// Labeled clique generation, regularized cross-entropy and diagonal AdaGrad.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "coherentia/coherence.hpp"
#include "coherentia/corpus.hpp"
#include "coherentia/embeddings.hpp"
#include "coherentia/model.hpp"

namespace coherentia {

struct TrainConfig {
  double learning_rate = 0.01;
  int batch_size = 20;
  int hidden = 100;
  int dim = 100;
  int window = 3;
  double q = 1e-4;  // L2 weight
  int epochs = 40;
  std::uint64_t seed = 1;
  int permutations_per_doc = 20;
  // Negatives kept per document, as a multiple of its positives.
  double negative_ratio = 2.0;
  bool fine_tune_embeddings = false;
  double adagrad_epsilon = 1e-6;
  ScoringOptions scoring;

  Hyper hyper() const { return {dim, window, hidden}; }
  // Throws ConfigError on non-positive sizes or rates.
  void validate() const;
};

// One labeled clique. Window entries point at sentences of the training
// documents (nullptr marks padding); the documents must outlive the sample.
struct TrainSample {
  std::vector<const Sentence*> window;
  int label = 1;
};

// Positives: every window of every document. Negatives: windows of up to
// `permutations` seeded non-identity orders of each document, skipping
// sentence sequences that occur as an original window and duplicates, then
// downsampled to at most negative_ratio x positives per document.
std::vector<TrainSample> generate_training_set(std::span<const Document> docs, int permutations,
                                               std::uint64_t seed, int window,
                                               double negative_ratio = 2.0);

struct Gradients {
  ModelParams params;
  std::map<EmbeddingTable::Index, Vector> embeddings;
};

// (1/M) * sum of clique cross-entropies over the batch + (Q/2M) * |weights|^2.
double loss(const ModelParams& model, const EmbeddingTable& table, std::span<const TrainSample> batch,
            double q, std::size_t m, const ScoringOptions& options = {});

Gradients grad(const ModelParams& model, const EmbeddingTable& table, std::span<const TrainSample> batch,
               double q, std::size_t m, const ScoringOptions& options = {}, bool embedding_grads = false);

struct AdaGradState {
  ModelParams accum;
  std::map<EmbeddingTable::Index, Vector> embedding_accum;
  double epsilon = 1e-6;

  explicit AdaGradState(const Hyper& hyper, double eps = 1e-6)
      : accum(ModelParams::zeros(hyper)), epsilon(eps) {}
};

// accum += g^2; theta -= lr * g / (sqrt(accum) + eps). Embedding gradients
// are applied to `embeddings` when given.
void adagrad_step(ModelParams& model, const Gradients& grads, AdaGradState& state, double lr,
                  EmbeddingTable* embeddings = nullptr);

struct TrainResult {
  ModelParams model;
  // Full objective after each epoch.
  std::vector<double> epoch_loss;
  std::size_t samples = 0;
  // Set when embeddings were fine-tuned.
  std::optional<EmbeddingTable> embeddings;
};

using EpochCallback = std::function<void(int epoch, double loss)>;

TrainResult train(const TrainConfig& config, std::span<const Document> corpus, const EmbeddingTable& table,
                  const EpochCallback& on_epoch = {});

}  // namespace coherentia

#endif  // COHERENTIA_TRAINING_HPP
