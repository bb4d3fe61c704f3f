#ifndef COHERENTIA_EVAL_HPP
#define COHERENTIA_EVAL_HPP

// Sentence-ordering and MT-rating protocols: permutations, pairwise accuracy
// and the paired t-test.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "coherentia/corpus.hpp"

namespace coherentia {

using Order = std::vector<std::size_t>;

// Up to max_perms distinct non-identity orders of n items. Drawn by seeded
// shuffles with rejection; when n! - 1 <= max_perms all of them are
// returned in lexicographic order.
std::vector<Order> permutation_orders(std::size_t n, int max_perms, std::uint64_t seed);

// Permuted copies of doc with ids "<id>.p1", "<id>.p2", ...
std::vector<Document> permute_document(const Document& doc, int max_perms, std::uint64_t seed);

struct EvalPair {
  Document positive;
  Document negative;
  std::string source_id;
  // Identifies the negative within its source: permutation id or system id.
  std::string negative_id;
};

struct PairOutcome {
  std::string source_id;
  std::string negative_id;
  bool correct = false;
  double margin = 0.0;
};

struct EvalReport {
  double accuracy = 0.0;
  // Mean over source documents of each source's pair accuracy.
  double source_accuracy = 0.0;
  std::size_t sources = 0;
  std::vector<PairOutcome> outcomes;
  std::size_t n = 0;
};

using DocumentScorer = std::function<double(const Document&)>;

// A pair is correct iff score(positive) > score(negative); ties are wrong.
// Outcomes are stably ordered by source_id.
EvalReport pairwise_accuracy(const DocumentScorer& scorer, std::span<const EvalPair> pairs);

struct SystemDocument {
  std::string source_id;
  std::string system_id;
  Document doc;
};

// One pair per system output: reference as positive, system as negative.
std::vector<EvalPair> mt_pairs(const std::map<std::string, Document>& references,
                               std::span<const SystemDocument> systems);

// Accuracy per negative_id (per MT system).
std::map<std::string, double> accuracy_by_negative(const EvalReport& report);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  std::size_t n = 0;
};

// Paired t-test on d_i = a_i - b_i, two-sided p from Student t with n-1
// degrees of freedom. All-zero differences give t=0, p=1; zero variance
// with nonzero mean gives t=+-inf, p=0.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

std::vector<double> correctness(const EvalReport& report);

struct ManifestEntry {
  std::string source_id;
  std::filesystem::path positive;
  std::filesystem::path negative;
};

// Tab-separated "source_id<TAB>positive<TAB>negative" lines. Relative paths
// are resolved against the manifest's directory.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(std::span<const ManifestEntry> entries, const std::filesystem::path& path);

std::vector<EvalPair> load_pairs(std::span<const ManifestEntry> entries);

// Text report: "accuracy 0.8000 n=10" header, then one "pair" line per
// outcome. read_report parses the pair lines back.
void write_report(const EvalReport& report, std::ostream& out);
EvalReport read_report(std::istream& in);

// Aligns two reports pair by pair; throws DataError if their pairs differ.
TTestResult compare_reports(const EvalReport& a, const EvalReport& b);

}  // namespace coherentia

#endif  // COHERENTIA_EVAL_HPP
