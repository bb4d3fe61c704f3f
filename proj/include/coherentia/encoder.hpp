#ifndef COHERENTIA_ENCODER_HPP
#define COHERENTIA_ENCODER_HPP

// Bottom-up recursive sentence encoder and backpropagation through the tree.

#include <utility>
#include <vector>

#include "coherentia/corpus.hpp"
#include "coherentia/embeddings.hpp"
#include "coherentia/model.hpp"

namespace coherentia {

// Cached activations of one encode_sentence call. `internal` follows the
// tree's post-order, so replaying it front to back recomputes the root.
struct EncodeTrace {
  struct Step {
    int node;      // tree node index
    int left;      // child node indices
    int right;
    Vector input;   // [left; right], length 2K
    Vector output;  // tanh(W * input + b), length K
  };

  int dim = 0;
  int root = -1;
  std::vector<Step> internal;
  // Embedding row of every tree node that is a leaf; unused entries hold the
  // table's unk index but are never read.
  std::vector<EmbeddingTable::Index> leaf_rows;
  std::vector<bool> is_leaf;
};

struct Encoding {
  Vector root;
  EncodeTrace trace;
};

Encoding encode_sentence(const RecursiveParams& params, const EmbeddingTable& table,
                         const Sentence& sentence);

struct SentenceGradient {
  Matrix weight;  // K x 2K
  Vector bias;    // K
  // Gradient for each leaf's embedding row, in leaf order. Empty unless
  // requested.
  std::vector<std::pair<EmbeddingTable::Index, Vector>> leaves;
};

// Gradient of <grad_root, root(params)> with respect to the composition
// parameters, and optionally the leaf embeddings.
SentenceGradient backprop_sentence(const RecursiveParams& params, const EncodeTrace& trace,
                                   const Vector& grad_root, bool leaf_gradients = false);

}  // namespace coherentia

#endif  // COHERENTIA_ENCODER_HPP
