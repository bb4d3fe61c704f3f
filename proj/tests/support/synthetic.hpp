#ifndef COHERENTIA_TESTS_SYNTHETIC_HPP
#define COHERENTIA_TESTS_SYNTHETIC_HPP

// Synthetic entity-chained corpus for the end-to-end ordering experiment.

#include <cstdint>
#include <string>
#include <vector>

#include "coherentia/corpus.hpp"
#include "coherentia/embeddings.hpp"
#include "coherentia/training.hpp"

namespace coherentia::testing {

struct SyntheticSpec {
  int vocabulary = 200;
  int nouns = 150;  // the rest are verbs
  int documents = 200;
  int held_out = 50;
  int min_sentences = 8;
  int max_sentences = 12;
  std::uint64_t seed = 7;
};

struct SyntheticCorpus {
  std::vector<std::string> vocabulary;
  std::vector<Document> train;
  std::vector<Document> test;
};

// Sentence i of a document is "(IP (NP (NN a_i)) (VP (VV v) (NP (NN a_{i+1}))))"
// for a chain a_0, a_1, ... of distinct nouns, so every sentence shares a
// noun with its successor.
SyntheticCorpus make_synthetic_corpus(const SyntheticSpec& spec);

struct OrderingResult {
  double accuracy = 0.0;
  std::size_t pairs = 0;
  std::vector<double> epoch_loss;
};

// Trains on corpus.train and reports pairwise accuracy of originals against
// up to `permutations` permutations of each test document.
OrderingResult ordering_experiment(const SyntheticCorpus& corpus, const EmbeddingTable& table,
                                   const TrainConfig& config, int permutations, std::uint64_t eval_seed);

}  // namespace coherentia::testing

#endif  // COHERENTIA_TESTS_SYNTHETIC_HPP
