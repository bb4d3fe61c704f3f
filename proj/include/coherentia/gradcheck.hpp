#ifndef COHERENTIA_GRADCHECK_HPP
#define COHERENTIA_GRADCHECK_HPP

// Central finite-difference verification of the training gradients on
// random small instances.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "coherentia/corpus.hpp"
#include "coherentia/random.hpp"

namespace coherentia {

// Random bracketed parse over the given leaf tokens, with random branching
// of 1-3 children per internal node.
ParseNode random_parse(Rng& rng, std::span<const Token> leaves);

// Document of `sentences` random sentences, each with 1..max_leaves tokens
// drawn from vocabulary.
Document random_document(Rng& rng, std::span<const Token> vocabulary, std::size_t sentences,
                         int max_leaves, std::string id);

struct GradCheckOptions {
  std::uint64_t seed = 1;
  int dim = 4;
  int hidden = 3;
  int window = 3;
  int instances = 1;
  int max_leaves = 6;
  // When positive, each instance draws K from [2, max_dim] and H from
  // [1, max_hidden] instead of using dim and hidden.
  int max_dim = 0;
  int max_hidden = 0;
  double q = 0.1;
  bool embeddings = false;
  double step = 1e-6;
  double rel_tol = 1e-5;
  double abs_tol = 1e-8;
  // Analytic magnitudes below this are checked with abs_tol.
  double small = 1e-8;
  // Added to the first analytic W_recursive entry; a negative control.
  double perturb = 0.0;
};

struct TensorCheck {
  std::string name;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t checked = 0;
  std::size_t failures = 0;
};

struct GradCheckReport {
  std::vector<TensorCheck> tensors;
  bool passed = true;
};

GradCheckReport gradient_check(const GradCheckOptions& options);

}  // namespace coherentia

#endif  // COHERENTIA_GRADCHECK_HPP
