#ifndef COHERENTIA_EMBEDDINGS_HPP
#define COHERENTIA_EMBEDDINGS_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "coherentia/errors.hpp"

namespace coherentia {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class EmbeddingError : public DataError {
 public:
  enum class Kind { InconsistentDimension, NonNumericValue, EmptyFile, Io };

  EmbeddingError(Kind kind, std::size_t line, const std::string& what);

  Kind kind() const { return kind_; }
  std::size_t line() const { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

// Fixed word vectors with one shared out-of-vocabulary vector. Rows are
// addressed by Index; the unk row has index size().
class EmbeddingTable {
 public:
  using Index = std::size_t;

  // Seed of the shared unk vector, drawn uniform on [-kUnkRange, kUnkRange].
  static constexpr std::uint64_t kUnkSeed = 0x756e6bULL;
  static constexpr double kUnkRange = 0.05;

  explicit EmbeddingTable(int dim);

  int dim() const { return dim_; }
  std::size_t size() const { return rows_.size(); }
  Index unk_index() const { return rows_.size(); }

  // Returns false (and keeps the existing row) when word is already present.
  bool add(std::string word, Vector vec);

  bool contains(std::string_view word) const;
  Index index_of(std::string_view word) const;
  const Vector& row(Index idx) const { return idx == unk_index() ? unk_ : rows_[idx]; }
  Vector& mutable_row(Index idx) { return idx == unk_index() ? unk_ : rows_[idx]; }
  const Vector& lookup(std::string_view word) const { return row(index_of(word)); }
  const Vector& unk() const { return unk_; }
  const std::string& word(Index idx) const { return words_.at(idx); }

 private:
  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };

  int dim_;
  std::vector<std::string> words_;
  std::vector<Vector> rows_;
  Vector unk_;
  std::unordered_map<std::string, Index, StringHash, std::equal_to<>> index_;
};

EmbeddingTable load_embeddings(const std::filesystem::path& path);

// Writes "word v1 ... vK" rows at 17 significant digits, no header.
void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path);

// Vectors drawn i.i.d. uniform on [-0.5/K, 0.5/K]; repeated words keep the
// first draw.
EmbeddingTable random_table(std::span<const std::string> vocab, int dim, std::uint64_t seed);

}  // namespace coherentia

#endif  // COHERENTIA_EMBEDDINGS_HPP
