#include "coherentia/baseline_graph.hpp"

#include <algorithm>
#include <set>
#include <vector>

namespace coherentia {

namespace {

std::set<std::string> noun_forms(const Sentence& s, std::span<const std::string> prefixes) {
  std::set<std::string> out;
  for (const Token& t : extract_nouns(s, prefixes)) out.insert(t.surface);
  return out;
}

std::size_t intersection_size(const std::set<std::string>& a, const std::set<std::string>& b) {
  return static_cast<std::size_t>(
      std::count_if(a.begin(), a.end(), [&b](const std::string& w) { return b.contains(w); }));
}

}  // namespace

std::string to_string(const EntityGraphConfig& config) {
  std::string s = config.mode == EntityGraphConfig::Mode::Weighted ? "weighted" : "unweighted";
  if (config.distance_discount) s += "+dist";
  return s;
}

std::size_t shared_entities(const Sentence& a, const Sentence& b, std::span<const std::string> noun_prefixes) {
  return intersection_size(noun_forms(a, noun_prefixes), noun_forms(b, noun_prefixes));
}

double graph_coherence(const Document& doc, const EntityGraphConfig& config,
                       std::span<const std::string> noun_prefixes) {
  const std::size_t n = doc.sentences.size();
  if (n == 0) throw DataError("graph_coherence: document '" + doc.id + "' has no sentences");

  std::vector<std::set<std::string>> forms;
  forms.reserve(n);
  for (const Sentence& s : doc.sentences) forms.push_back(noun_forms(s, noun_prefixes));

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const std::size_t shared = intersection_size(forms[i], forms[j]);
      if (shared == 0) continue;
      double w = config.mode == EntityGraphConfig::Mode::Weighted ? static_cast<double>(shared) : 1.0;
      if (config.distance_discount) w /= static_cast<double>(j - i);
      total += w;
    }
  }
  return total / static_cast<double>(n);
}

}  // namespace coherentia
