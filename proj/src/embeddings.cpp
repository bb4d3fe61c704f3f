#include "coherentia/embeddings.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "coherentia/random.hpp"

namespace coherentia {

namespace {

const char* kind_name(EmbeddingError::Kind kind) {
  switch (kind) {
    case EmbeddingError::Kind::InconsistentDimension:
      return "inconsistent dimension";
    case EmbeddingError::Kind::NonNumericValue:
      return "non-numeric value";
    case EmbeddingError::Kind::EmptyFile:
      return "empty file";
    case EmbeddingError::Kind::Io:
      return "io error";
  }
  return "embedding error";
}

Vector draw_unk(int dim) {
  Rng rng(EmbeddingTable::kUnkSeed);
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.uniform(-EmbeddingTable::kUnkRange, EmbeddingTable::kUnkRange);
  return v;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t begin = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > begin) out.push_back(line.substr(begin, i - begin));
  }
  return out;
}

bool parse_int(std::string_view s, long long& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

EmbeddingError::EmbeddingError(Kind kind, std::size_t line, const std::string& what)
    : DataError(std::string(kind_name(kind)) + (line > 0 ? " at line " + std::to_string(line) : "") +
                (what.empty() ? "" : ": " + what)),
      kind_(kind),
      line_(line) {}

EmbeddingTable::EmbeddingTable(int dim) : dim_(dim) {
  if (dim <= 0) throw ShapeError("embedding dimension must be positive, got " + std::to_string(dim));
  unk_ = draw_unk(dim);
}

bool EmbeddingTable::add(std::string word, Vector vec) {
  if (vec.size() != dim_) {
    throw ShapeError("embedding for '" + word + "' has length " + std::to_string(vec.size()) +
                     ", expected " + std::to_string(dim_));
  }
  if (index_.contains(word)) return false;
  index_.emplace(word, rows_.size());
  words_.push_back(std::move(word));
  rows_.push_back(std::move(vec));
  return true;
}

bool EmbeddingTable::contains(std::string_view word) const { return index_.find(word) != index_.end(); }

EmbeddingTable::Index EmbeddingTable::index_of(std::string_view word) const {
  auto it = index_.find(word);
  return it == index_.end() ? unk_index() : it->second;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw EmbeddingError(EmbeddingError::Kind::Io, 0, "cannot open " + path.string());

  std::vector<std::pair<std::string, Vector>> rows;
  long long header_dim = -1;
  int dim = -1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_ws(line);
    if (fields.empty()) continue;

    long long a = 0, b = 0;
    if (rows.empty() && header_dim < 0 && fields.size() == 2 && parse_int(fields[0], a) &&
        parse_int(fields[1], b)) {
      header_dim = b;
      if (b <= 0) throw EmbeddingError(EmbeddingError::Kind::InconsistentDimension, line_no, "header dimension");
      dim = static_cast<int>(b);
      continue;
    }
    const int k = static_cast<int>(fields.size()) - 1;
    if (k <= 0) throw EmbeddingError(EmbeddingError::Kind::InconsistentDimension, line_no, "no values");
    if (dim < 0) dim = k;
    if (k != dim) {
      throw EmbeddingError(EmbeddingError::Kind::InconsistentDimension, line_no,
                           "expected " + std::to_string(dim) + " values, found " + std::to_string(k));
    }
    Vector v(dim);
    for (int i = 0; i < dim; ++i) {
      if (!parse_double(fields[i + 1], v[i])) {
        throw EmbeddingError(EmbeddingError::Kind::NonNumericValue, line_no,
                             "'" + std::string(fields[i + 1]) + "'");
      }
    }
    rows.emplace_back(std::string(fields[0]), std::move(v));
  }
  if (rows.empty()) throw EmbeddingError(EmbeddingError::Kind::EmptyFile, 0, path.string());

  EmbeddingTable table(dim);
  for (auto& [w, v] : rows) table.add(std::move(w), std::move(v));
  return table;
}

void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw EmbeddingError(EmbeddingError::Kind::Io, 0, "cannot write " + path.string());
  char buf[32];
  for (EmbeddingTable::Index i = 0; i < table.size(); ++i) {
    out << table.word(i);
    const Vector& v = table.row(i);
    for (int k = 0; k < table.dim(); ++k) {
      std::snprintf(buf, sizeof buf, " %.17g", v[k]);
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw EmbeddingError(EmbeddingError::Kind::Io, 0, "write failed: " + path.string());
}

EmbeddingTable random_table(std::span<const std::string> vocab, int dim, std::uint64_t seed) {
  if (dim <= 0) throw ShapeError("random_table: K must be positive, got " + std::to_string(dim));
  EmbeddingTable table(dim);
  Rng rng(seed);
  const double range = 0.5 / dim;
  for (const auto& word : vocab) {
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v[i] = rng.uniform(-range, range);
    table.add(word, std::move(v));
  }
  return table;
}

}  // namespace coherentia
