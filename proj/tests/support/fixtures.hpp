#ifndef COHERENTIA_TESTS_FIXTURES_HPP
#define COHERENTIA_TESTS_FIXTURES_HPP

#include <cmath>
#include <numbers>

#include "coherentia/corpus.hpp"
#include "coherentia/embeddings.hpp"
#include "coherentia/model.hpp"

namespace coherentia::testing {

// K = L = H = 1 with W_sen = [1], U = [2] and zero biases, so a one-word
// verb sentence with embedding x has P(coherent) = sigmoid(2 tanh(x)).
// Word "half" gives 0.5 and word "high" gives 0.8.
inline ModelParams fixture_model() {
  ModelParams m = ModelParams::zeros({1, 1, 1});
  m.coherence.weight(0, 0) = 1.0;
  m.coherence.output[0] = 2.0;
  return m;
}

inline EmbeddingTable fixture_table() {
  EmbeddingTable t(1);
  t.add("half", Vector::Zero(1));
  t.add("high", Vector::Constant(1, std::atanh(std::numbers::ln2)));
  return t;
}

// Two cliques with probabilities 0.5 and 0.8.
inline Document fixture_document() {
  Document d;
  d.id = "fixture";
  d.sentences.push_back(parse_sentence("(IP (VV half))"));
  d.sentences.push_back(parse_sentence("(IP (VV high))"));
  return d;
}

}  // namespace coherentia::testing

#endif  // COHERENTIA_TESTS_FIXTURES_HPP
