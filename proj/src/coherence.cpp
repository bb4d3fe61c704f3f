#include "coherentia/coherence.hpp"

#include <cmath>

#include "coherentia/encoder.hpp"

namespace coherentia {

Vector entity_vector(const Sentence& sentence, const EmbeddingTable& table,
                     std::span<const std::string> noun_prefixes) {
  const auto nouns = extract_nouns(sentence, noun_prefixes);
  if (nouns.empty()) return Vector::Ones(table.dim());
  Vector sum = Vector::Zero(table.dim());
  for (const Token& noun : nouns) sum += table.lookup(noun.surface);
  return sum;
}

std::vector<std::vector<int>> window_indices(std::size_t n, int window) {
  if (window < 1) throw ShapeError("window size must be >= 1");
  const std::size_t l = static_cast<std::size_t>(window);
  std::vector<std::vector<int>> out;
  if (n < l) {
    std::vector<int> w(l, kPadding);
    for (std::size_t i = 0; i < n; ++i) w[i] = static_cast<int>(i);
    out.push_back(std::move(w));
    return out;
  }
  for (std::size_t start = 0; start + l <= n; ++start) {
    std::vector<int> w(l);
    for (std::size_t j = 0; j < l; ++j) w[j] = static_cast<int>(start + j);
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<Clique> build_cliques(std::span<const Vector> encodings,
                                  std::span<const Vector> entity_vecs, int window) {
  if (encodings.size() != entity_vecs.size()) {
    throw ShapeError("build_cliques: encodings and entity vectors differ in count");
  }
  const Eigen::Index k = encodings.empty() ? 0 : encodings.front().size();
  std::vector<Clique> out;
  for (const auto& w : window_indices(encodings.size(), window)) {
    Clique c;
    for (int idx : w) {
      if (idx == kPadding) {
        c.sentences.push_back(Vector::Zero(k));
        c.entities.push_back(Vector::Ones(k));
      } else {
        c.sentences.push_back(encodings[idx]);
        c.entities.push_back(entity_vecs[idx]);
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

CliqueActivations clique_forward(const ModelParams& model, const Clique& clique) {
  const int k = model.hyper.dim, l = model.hyper.window;
  if (static_cast<int>(clique.sentences.size()) != l || static_cast<int>(clique.entities.size()) != l) {
    throw ShapeError("clique has " + std::to_string(clique.sentences.size()) +
                     " sentences, model window is " + std::to_string(l));
  }
  CliqueActivations act;
  act.gated.resize(static_cast<Eigen::Index>(l) * k);
  for (int j = 0; j < l; ++j) {
    if (clique.sentences[j].size() != k || clique.entities[j].size() != k) {
      throw ShapeError("clique vector length does not match model dimension");
    }
    act.gated.segment(static_cast<Eigen::Index>(j) * k, k) =
        clique.sentences[j].cwiseProduct(clique.entities[j]);
  }
  const auto& p = model.coherence;
  act.hidden = (p.weight * act.gated + p.bias).array().tanh().matrix();
  act.logit = p.output.dot(act.hidden) + p.output_bias;
  return act;
}

double clique_prob(const ModelParams& model, const Clique& clique) {
  const double z = clique_forward(model, clique).logit;
  return 1.0 / (1.0 + std::exp(-z));
}

double log_sigmoid(double z) {
  return z >= 0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

std::vector<Clique> document_cliques(const ModelParams& model, const EmbeddingTable& table,
                                     const Document& doc, const ScoringOptions& options) {
  if (doc.sentences.empty()) throw DataError("document '" + doc.id + "' has no sentences");
  std::vector<Vector> enc, ent;
  enc.reserve(doc.sentences.size());
  ent.reserve(doc.sentences.size());
  for (const Sentence& s : doc.sentences) {
    enc.push_back(encode_sentence(model.recursive, table, s).root);
    ent.push_back(options.entity_gate ? entity_vector(s, table, options.noun_prefixes)
                                      : Vector::Ones(table.dim()));
  }
  return build_cliques(enc, ent, model.hyper.window);
}

double doc_log_score(const ModelParams& model, const EmbeddingTable& table, const Document& doc,
                     const ScoringOptions& options) {
  double total = 0.0;
  for (const Clique& c : document_cliques(model, table, doc, options)) {
    total += log_sigmoid(clique_forward(model, c).logit);
  }
  return total;
}

}  // namespace coherentia
