#include "coherentia/model.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "coherentia/random.hpp"

namespace coherentia {

namespace {

template <typename Model, typename View>
std::array<View, kTensorCount> make_views(Model& m) {
  auto span_of = [](auto& t) { return std::span(t.data(), static_cast<std::size_t>(t.size())); };
  return {{
      {"W_recursive", span_of(m.recursive.weight), static_cast<int>(m.recursive.weight.rows()),
       static_cast<int>(m.recursive.weight.cols()), true},
      {"b_recursive", span_of(m.recursive.bias), static_cast<int>(m.recursive.bias.size()), 1, false},
      {"W_sen", span_of(m.coherence.weight), static_cast<int>(m.coherence.weight.rows()),
       static_cast<int>(m.coherence.weight.cols()), true},
      {"b_sen", span_of(m.coherence.bias), static_cast<int>(m.coherence.bias.size()), 1, false},
      {"U", span_of(m.coherence.output), static_cast<int>(m.coherence.output.size()), 1, true},
      {"b", std::span(&m.coherence.output_bias, 1), 1, 1, false},
  }};
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class ModelReader {
 public:
  explicit ModelReader(std::istream& in) : in_(in) {}

  ModelParams read() {
    std::string line;
    if (!next_line(line)) throw ModelFormatError("model header: empty input");
    Hyper hyper{-1, -1, -1};
    std::optional<std::uint64_t> seed;
    {
      std::istringstream fields(line);
      std::string magic, version, kv;
      fields >> magic >> version;
      if (magic != kModelMagic) throw ModelFormatError("model header: bad magic '" + magic + "'");
      if (version != kModelVersion) {
        throw ModelFormatError("model header: unsupported version '" + version + "'");
      }
      while (fields >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ModelFormatError("model header: bad field '" + kv + "'");
        const std::string key = kv.substr(0, eq);
        const std::string value = kv.substr(eq + 1);
        if (key == "K") {
          hyper.dim = parse_positive(value, "model header K");
        } else if (key == "L") {
          hyper.window = parse_positive(value, "model header L");
        } else if (key == "H") {
          hyper.hidden = parse_positive(value, "model header H");
        } else if (key == "seed") {
          std::uint64_t s = 0;
          auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), s);
          if (ec != std::errc() || p != value.data() + value.size()) {
            throw ModelFormatError("model header: bad seed '" + value + "'");
          }
          seed = s;
        }
        // Other key=value fields (init=...) are informational.
      }
      if (hyper.dim < 0 || hyper.window < 0 || hyper.hidden < 0) {
        throw ModelFormatError("model header: K, L and H are required");
      }
    }

    ModelParams model = ModelParams::zeros(hyper);
    model.init_seed = seed;
    for (auto& view : tensors(model)) read_block(view);
    if (next_line(line)) throw ModelFormatError("model: trailing content after tensor 'b'");
    return model;
  }

 private:
  bool next_line(std::string& line) {
    while (std::getline(in_, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") != std::string::npos) return true;
    }
    return false;
  }

  static int parse_positive(const std::string& s, const std::string& what) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || v <= 0) {
      throw ModelFormatError(what + ": bad value '" + s + "'");
    }
    return v;
  }

  std::vector<double> read_values(const std::string& name, std::size_t expected) {
    std::string line;
    if (!next_line(line)) throw ModelFormatError("tensor '" + name + "': unexpected end of file");
    std::vector<double> out;
    std::istringstream fields(line);
    std::string tok;
    while (fields >> tok) {
      double v = 0;
      auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || p != tok.data() + tok.size()) {
        throw ModelFormatError("tensor '" + name + "': non-numeric value '" + tok + "'");
      }
      out.push_back(v);
    }
    if (out.size() != expected) {
      throw ModelFormatError("tensor '" + name + "': expected " + std::to_string(expected) +
                             " values per row, found " + std::to_string(out.size()));
    }
    return out;
  }

  void read_block(TensorView& view) {
    const std::string name = view.name;
    std::string line;
    if (!next_line(line)) throw ModelFormatError("tensor '" + name + "': missing block");
    std::istringstream fields(line);
    std::string got;
    fields >> got;
    if (got != name) throw ModelFormatError("tensor '" + name + "': found block '" + got + "'");

    std::vector<int> shape;
    std::string tok;
    while (fields >> tok) shape.push_back(parse_positive(tok, "tensor '" + name + "' shape"));
    const bool matrix = view.cols > 1 || name.starts_with("W_");
    const std::vector<int> expected =
        matrix ? std::vector<int>{view.rows, view.cols}
               : (name == "b" ? std::vector<int>{} : std::vector<int>{view.rows});
    if (shape != expected) throw ModelFormatError("tensor '" + name + "': shape does not match header");

    const int rows = matrix ? view.rows : 1;
    const int cols = matrix ? view.cols : view.rows;
    for (int r = 0; r < rows; ++r) {
      const auto values = read_values(name, static_cast<std::size_t>(cols));
      for (int c = 0; c < cols; ++c) {
        // Column-major storage.
        const std::size_t at = matrix ? static_cast<std::size_t>(c) * view.rows + r : c;
        if (!std::isfinite(values[c])) {
          throw ModelFormatError("tensor '" + name + "': non-finite value");
        }
        view.values[at] = values[c];
      }
    }
  }

  std::istream& in_;
};

}  // namespace

ModelParams ModelParams::zeros(const Hyper& hyper) {
  if (hyper.dim <= 0 || hyper.window <= 0 || hyper.hidden <= 0) {
    throw ShapeError("hyperparameters K, L, H must be positive");
  }
  ModelParams m;
  m.hyper = hyper;
  const int k = hyper.dim, h = hyper.hidden;
  m.recursive.weight = Matrix::Zero(k, 2 * k);
  m.recursive.bias = Vector::Zero(k);
  m.coherence.weight = Matrix::Zero(h, hyper.window * k);
  m.coherence.bias = Vector::Zero(h);
  m.coherence.output = Vector::Zero(h);
  m.coherence.output_bias = 0.0;
  return m;
}

void ModelParams::check_shapes() const {
  const int k = hyper.dim, h = hyper.hidden, l = hyper.window;
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ShapeError(std::string("model tensor shape mismatch: ") + what);
  };
  require(recursive.weight.rows() == k && recursive.weight.cols() == 2 * k, "W_recursive");
  require(recursive.bias.size() == k, "b_recursive");
  require(coherence.weight.rows() == h && coherence.weight.cols() == l * k, "W_sen");
  require(coherence.bias.size() == h, "b_sen");
  require(coherence.output.size() == h, "U");
}

std::array<TensorView, kTensorCount> tensors(ModelParams& model) {
  return make_views<ModelParams, TensorView>(model);
}

std::array<ConstTensorView, kTensorCount> tensors(const ModelParams& model) {
  return make_views<const ModelParams, ConstTensorView>(model);
}

ModelParams init_uniform(const Hyper& hyper, std::uint64_t seed) {
  ModelParams m = ModelParams::zeros(hyper);
  m.init_seed = seed;
  Rng rng(seed);
  for (auto& t : tensors(m)) {
    const double bound = std::sqrt(6.0 / (t.rows + t.cols));
    for (double& v : t.values) v = rng.uniform(-bound, bound);
  }
  return m;
}

double squared_weight_norm(const ModelParams& model) {
  double sum = 0.0;
  for (const auto& t : tensors(model)) {
    if (!t.regularized) continue;
    for (double v : t.values) sum += v * v;
  }
  return sum;
}

void write_model(const ModelParams& model, std::ostream& out) {
  model.check_shapes();
  out << kModelMagic << ' ' << kModelVersion << " K=" << model.hyper.dim << " L=" << model.hyper.window
      << " H=" << model.hyper.hidden;
  if (model.init_seed) out << " init=fan-uniform seed=" << *model.init_seed;
  out << '\n';
  for (const auto& t : tensors(model)) {
    const std::string name = t.name;
    const bool matrix = name.starts_with("W_");
    out << name;
    if (matrix) {
      out << ' ' << t.rows << ' ' << t.cols << '\n';
      for (int r = 0; r < t.rows; ++r) {
        for (int c = 0; c < t.cols; ++c) {
          if (c > 0) out << ' ';
          out << format_double(t.values[static_cast<std::size_t>(c) * t.rows + r]);
        }
        out << '\n';
      }
    } else {
      if (name != "b") out << ' ' << t.rows;
      out << '\n';
      for (std::size_t i = 0; i < t.values.size(); ++i) {
        if (i > 0) out << ' ';
        out << format_double(t.values[i]);
      }
      out << '\n';
    }
  }
}

ModelParams read_model(std::istream& in) { return ModelReader(in).read(); }

void save_model(const ModelParams& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write model file " + path.string());
  write_model(model, out);
  if (!out) throw DataError("write failed: " + path.string());
}

ModelParams load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file " + path.string());
  try {
    return read_model(in);
  } catch (const ModelFormatError& e) {
    throw ModelFormatError(path.string() + ": " + e.what());
  }
}

}  // namespace coherentia
