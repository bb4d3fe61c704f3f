#ifndef COHERENTIA_COHERENCE_HPP
#define COHERENTIA_COHERENCE_HPP

// Sliding-window cliques, the entity gate, and clique / document coherence.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coherentia/corpus.hpp"
#include "coherentia/embeddings.hpp"
#include "coherentia/model.hpp"

namespace coherentia {

// Sentence index used for padding positions of a short document's clique.
inline constexpr int kPadding = -1;

struct Clique {
  std::vector<Vector> sentences;  // L sentence vectors
  std::vector<Vector> entities;   // L entity vectors, aligned with sentences
  std::optional<int> label;       // 1 coherent, 0 incoherent
};

struct ScoringOptions {
  std::vector<std::string> noun_prefixes = kDefaultNounPrefixes;
  // When false every entity vector is the all-ones vector (ungated model).
  bool entity_gate = true;
};

// Sum of the embeddings of the sentence's nouns, every occurrence counted.
// Without nouns the all-ones vector, which leaves the gate a no-op.
Vector entity_vector(const Sentence& sentence, const EmbeddingTable& table,
                     std::span<const std::string> noun_prefixes = kDefaultNounPrefixes);

// Sentence indices of every window of `window` consecutive sentences of an
// n-sentence document, stride 1. Shorter documents yield one window padded
// on the right with kPadding.
std::vector<std::vector<int>> window_indices(std::size_t n, int window);

// Padding positions get a zero sentence vector and an all-ones entity vector.
std::vector<Clique> build_cliques(std::span<const Vector> encodings,
                                  std::span<const Vector> entity_vecs, int window);

struct CliqueActivations {
  Vector gated;   // concat(sentences) .* concat(entities), length L*K
  Vector hidden;  // tanh(W_sen * gated + b_sen), length H
  double logit = 0.0;
};

CliqueActivations clique_forward(const ModelParams& model, const Clique& clique);

double clique_prob(const ModelParams& model, const Clique& clique);

// log(sigmoid(z)) without overflow or cancellation.
double log_sigmoid(double z);

std::vector<Clique> document_cliques(const ModelParams& model, const EmbeddingTable& table,
                                     const Document& doc, const ScoringOptions& options = {});

// Sum over the document's cliques of log P(coherent). Ranks documents the
// same way as the product of clique probabilities.
double doc_log_score(const ModelParams& model, const EmbeddingTable& table, const Document& doc,
                     const ScoringOptions& options = {});

}  // namespace coherentia

#endif  // COHERENTIA_COHERENCE_HPP
