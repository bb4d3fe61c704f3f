#ifndef COHERENTIA_TESTS_NAIVE_FORWARD_HPP
#define COHERENTIA_TESTS_NAIVE_FORWARD_HPP

// Plain-loop reference forward pass written directly from the model
// definition. Deliberately shares no computation with the library: it walks
// the raw parse tree itself, uses nested std::vector matrices and naive
// logs. Only the input data types are borrowed.

#include <map>
#include <string>
#include <vector>

#include "coherentia/corpus.hpp"
#include "coherentia/embeddings.hpp"
#include "coherentia/model.hpp"

namespace coherentia::testing {

using Vec = std::vector<double>;
using Mat = std::vector<std::vector<double>>;  // row-major

struct NaiveModel {
  int k = 0;
  int window = 0;
  Mat w_rec;  // k x 2k
  Vec b_rec;
  Mat w_sen;  // h x window*k
  Vec b_sen;
  Vec u;
  double b = 0.0;
  std::map<std::string, Vec> words;
  Vec unk;
  std::vector<std::string> noun_prefixes{"NN", "NR", "NT"};
  bool gate = true;
};

// Copies parameters and word vectors element by element.
NaiveModel to_naive(const ModelParams& model, const EmbeddingTable& table);

// log of the product over the document's windows of P(coherent).
double naive_log_score(const NaiveModel& model, const std::vector<ParseNode>& sentences);

}  // namespace coherentia::testing

#endif  // COHERENTIA_TESTS_NAIVE_FORWARD_HPP
