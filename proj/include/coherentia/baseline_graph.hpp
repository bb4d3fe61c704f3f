#ifndef COHERENTIA_BASELINE_GRAPH_HPP
#define COHERENTIA_BASELINE_GRAPH_HPP

// Entity-graph coherence baseline: one-mode projection of the bipartite
// sentence-entity graph onto sentences.

#include <span>
#include <string>

#include "coherentia/corpus.hpp"

namespace coherentia {

struct EntityGraphConfig {
  enum class Mode { Unweighted, Weighted };

  Mode mode = Mode::Weighted;
  // Divide each edge weight by the sentence distance j - i.
  bool distance_discount = false;
};

std::string to_string(const EntityGraphConfig& config);

// Number of distinct noun surface forms occurring in both sentences.
std::size_t shared_entities(const Sentence& a, const Sentence& b,
                            std::span<const std::string> noun_prefixes = kDefaultNounPrefixes);

// Sum of projection edge weights over sentence pairs i < j, divided by the
// number of sentences.
double graph_coherence(const Document& doc, const EntityGraphConfig& config,
                       std::span<const std::string> noun_prefixes = kDefaultNounPrefixes);

}  // namespace coherentia

#endif  // COHERENTIA_BASELINE_GRAPH_HPP
