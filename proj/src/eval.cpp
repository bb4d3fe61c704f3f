#include "coherentia/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "coherentia/random.hpp"

namespace coherentia {

namespace {

// n! - 1, saturating.
std::uint64_t non_identity_count(std::size_t n) {
  std::uint64_t f = 1;
  for (std::size_t i = 2; i <= n; ++i) {
    if (f > std::numeric_limits<std::uint64_t>::max() / i) return std::numeric_limits<std::uint64_t>::max();
    f *= i;
  }
  return f - 1;
}

Order identity(std::size_t n) {
  Order o(n);
  std::iota(o.begin(), o.end(), std::size_t{0});
  return o;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

// Fills the aggregate fields from the outcomes.
void summarize(EvalReport& report) {
  report.n = report.outcomes.size();
  std::size_t correct = 0;
  std::map<std::string, std::pair<std::size_t, std::size_t>> per_source;
  for (const auto& o : report.outcomes) {
    correct += o.correct;
    auto& [hit, total] = per_source[o.source_id];
    hit += o.correct;
    ++total;
  }
  report.accuracy = static_cast<double>(correct) / static_cast<double>(report.n);
  report.sources = per_source.size();
  double macro = 0.0;
  for (const auto& [id, c] : per_source) macro += static_cast<double>(c.first) / static_cast<double>(c.second);
  report.source_accuracy = macro / static_cast<double>(report.sources);
}

}  // namespace

std::vector<Order> permutation_orders(std::size_t n, int max_perms, std::uint64_t seed) {
  if (max_perms < 1) throw ConfigError("max_perms must be >= 1");
  std::vector<Order> out;
  if (n <= 1) return out;

  const Order id = identity(n);
  if (non_identity_count(n) <= static_cast<std::uint64_t>(max_perms)) {
    Order o = id;
    while (std::next_permutation(o.begin(), o.end())) out.push_back(o);
    return out;
  }

  Rng rng(seed);
  std::set<Order> seen;
  while (out.size() < static_cast<std::size_t>(max_perms)) {
    Order o = id;
    rng.shuffle(std::span(o));
    if (o == id || !seen.insert(o).second) continue;
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<Document> permute_document(const Document& doc, int max_perms, std::uint64_t seed) {
  std::vector<Document> out;
  const auto orders = permutation_orders(doc.sentences.size(), max_perms, seed);
  out.reserve(orders.size());
  for (std::size_t i = 0; i < orders.size(); ++i) {
    out.push_back(reorder(doc, orders[i], doc.id + ".p" + std::to_string(i + 1)));
  }
  return out;
}

EvalReport pairwise_accuracy(const DocumentScorer& scorer, std::span<const EvalPair> pairs) {
  if (pairs.empty()) throw ConfigError("pairwise_accuracy: no pairs");
  EvalReport report;
  report.outcomes.reserve(pairs.size());
  for (const EvalPair& pair : pairs) {
    PairOutcome o;
    o.source_id = pair.source_id;
    o.negative_id = pair.negative_id;
    const double pos = scorer(pair.positive);
    const double neg = scorer(pair.negative);
    o.correct = pos > neg;
    o.margin = pos - neg;
    report.outcomes.push_back(std::move(o));
  }
  std::stable_sort(report.outcomes.begin(), report.outcomes.end(),
                   [](const PairOutcome& a, const PairOutcome& b) { return a.source_id < b.source_id; });
  summarize(report);
  return report;
}

std::vector<EvalPair> mt_pairs(const std::map<std::string, Document>& references,
                               std::span<const SystemDocument> systems) {
  std::vector<EvalPair> out;
  out.reserve(systems.size());
  for (const auto& sys : systems) {
    auto it = references.find(sys.source_id);
    if (it == references.end()) {
      throw DataError("no reference translation for source '" + sys.source_id + "' (system '" +
                      sys.system_id + "')");
    }
    out.push_back(EvalPair{it->second, sys.doc, sys.source_id, sys.system_id});
  }
  return out;
}

std::map<std::string, double> accuracy_by_negative(const EvalReport& report) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
  for (const auto& o : report.outcomes) {
    auto& [hit, total] = counts[o.negative_id];
    hit += o.correct;
    ++total;
  }
  std::map<std::string, double> out;
  for (const auto& [id, c] : counts) out[id] = static_cast<double>(c.first) / static_cast<double>(c.second);
  return out;
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ConfigError("paired_t_test: length mismatch (" + std::to_string(a.size()) + " vs " +
                      std::to_string(b.size()) + ")");
  }
  const std::size_t n = a.size();
  if (n < 2) throw ConfigError("paired_t_test: need at least 2 paired items");

  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i] - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  TTestResult r;
  r.n = n;
  if (sd == 0.0) {
    if (mean == 0.0) return r;
    r.t = mean > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    r.p = 0.0;
    return r;
  }
  r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  boost::math::students_t dist(static_cast<double>(n - 1));
  r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(r.t)));
  return r;
}

std::vector<double> correctness(const EvalReport& report) {
  std::vector<double> out;
  out.reserve(report.outcomes.size());
  for (const auto& o : report.outcomes) out.push_back(o.correct ? 1.0 : 0.0);
  return out;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  const auto base = path.parent_path();
  std::vector<ManifestEntry> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty() || fields[2].empty()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected source_id<TAB>positive<TAB>negative");
    }
    auto resolve = [&](const std::string& p) {
      std::filesystem::path fp(p);
      return fp.is_absolute() ? fp : base / fp;
    };
    out.push_back({fields[0], resolve(fields[1]), resolve(fields[2])});
  }
  return out;
}

void write_manifest(std::span<const ManifestEntry> entries, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write manifest " + path.string());
  for (const auto& e : entries) {
    out << e.source_id << '\t' << e.positive.generic_string() << '\t' << e.negative.generic_string()
        << '\n';
  }
  if (!out) throw DataError("write failed: " + path.string());
}

std::vector<EvalPair> load_pairs(std::span<const ManifestEntry> entries) {
  std::map<std::filesystem::path, Document> cache;
  auto get = [&](const std::filesystem::path& p) -> const Document& {
    auto it = cache.find(p);
    if (it == cache.end()) it = cache.emplace(p, read_document(p)).first;
    return it->second;
  };
  std::vector<EvalPair> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    const Document& neg = get(e.negative);
    out.push_back(EvalPair{get(e.positive), neg, e.source_id, neg.id});
  }
  return out;
}

void write_report(const EvalReport& report, std::ostream& out) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "accuracy %.4f n=%zu\n", report.accuracy, report.n);
  out << buf;
  std::snprintf(buf, sizeof buf, "source-accuracy %.4f sources=%zu\n", report.source_accuracy,
                report.sources);
  out << buf;
  for (const auto& o : report.outcomes) {
    std::snprintf(buf, sizeof buf, "%.17g", o.margin);
    out << "pair\t" << o.source_id << '\t' << o.negative_id << '\t' << (o.correct ? 1 : 0) << '\t' << buf
        << '\n';
  }
}

EvalReport read_report(std::istream& in) {
  EvalReport report;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.starts_with("pair\t")) continue;
    const auto f = split_tabs(line);
    if (f.size() != 5 || (f[3] != "0" && f[3] != "1")) {
      throw DataError("report line " + std::to_string(line_no) + ": malformed pair line");
    }
    PairOutcome o{f[1], f[2], f[3] == "1", 0.0};
    try {
      o.margin = std::stod(f[4]);
    } catch (const std::exception&) {
      throw DataError("report line " + std::to_string(line_no) + ": bad margin '" + f[4] + "'");
    }
    report.outcomes.push_back(std::move(o));
  }
  if (report.outcomes.empty()) throw DataError("report contains no pair lines");
  summarize(report);
  return report;
}

TTestResult compare_reports(const EvalReport& a, const EvalReport& b) {
  if (a.outcomes.size() != b.outcomes.size()) {
    throw DataError("reports differ in pair count (" + std::to_string(a.outcomes.size()) + " vs " +
                    std::to_string(b.outcomes.size()) + ")");
  }
  std::map<std::pair<std::string, std::string>, double> other;
  for (const auto& o : b.outcomes) other[{o.source_id, o.negative_id}] = o.correct ? 1.0 : 0.0;
  std::vector<double> xa, xb;
  for (const auto& o : a.outcomes) {
    auto it = other.find({o.source_id, o.negative_id});
    if (it == other.end()) {
      throw DataError("pair " + o.source_id + "/" + o.negative_id + " missing from compared report");
    }
    xa.push_back(o.correct ? 1.0 : 0.0);
    xb.push_back(it->second);
  }
  return paired_t_test(xa, xb);
}

}  // namespace coherentia
