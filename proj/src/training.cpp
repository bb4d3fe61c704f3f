#include "coherentia/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include "coherentia/encoder.hpp"
#include "coherentia/eval.hpp"
#include "coherentia/random.hpp"

namespace coherentia {

namespace {

// Encodings and entity vectors of the distinct sentences of a batch, in
// order of first appearance.
struct BatchCache {
  std::vector<const Sentence*> sentences;
  std::unordered_map<const Sentence*, int> slot;
  std::vector<Encoding> encodings;
  std::vector<Vector> entities;
  std::vector<bool> has_nouns;

  BatchCache(const ModelParams& model, const EmbeddingTable& table, std::span<const TrainSample> batch,
             const ScoringOptions& options) {
    for (const auto& sample : batch) {
      if (static_cast<int>(sample.window.size()) != model.hyper.window) {
        throw ShapeError("training sample window does not match model window");
      }
      for (const Sentence* s : sample.window) {
        if (s == nullptr || slot.contains(s)) continue;
        slot.emplace(s, static_cast<int>(sentences.size()));
        sentences.push_back(s);
        encodings.push_back(encode_sentence(model.recursive, table, *s));
        const bool nouns = options.entity_gate && !extract_nouns(*s, options.noun_prefixes).empty();
        has_nouns.push_back(nouns);
        entities.push_back(nouns ? entity_vector(*s, table, options.noun_prefixes)
                                 : Vector::Ones(table.dim()));
      }
    }
  }

  Clique clique(const TrainSample& sample, int dim) const {
    Clique c;
    c.label = sample.label;
    for (const Sentence* s : sample.window) {
      if (s == nullptr) {
        c.sentences.push_back(Vector::Zero(dim));
        c.entities.push_back(Vector::Ones(dim));
      } else {
        const int i = slot.at(s);
        c.sentences.push_back(encodings[i].root);
        c.entities.push_back(entities[i]);
      }
    }
    return c;
  }
};

double cross_entropy(double logit, int label) {
  return label == 1 ? -log_sigmoid(logit) : -log_sigmoid(-logit);
}

void add_scaled(ModelParams& dst, const ModelParams& src, double scale, bool regularized_only) {
  auto d = tensors(dst);
  const auto s = tensors(src);
  for (std::size_t t = 0; t < kTensorCount; ++t) {
    if (regularized_only && !d[t].regularized) continue;
    for (std::size_t i = 0; i < d[t].values.size(); ++i) d[t].values[i] += scale * s[t].values[i];
  }
}

}  // namespace

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid training config: ") + what);
  };
  require(learning_rate > 0, "learning-rate must be positive");
  require(batch_size > 0, "batch-size must be positive");
  require(hidden > 0, "hidden must be positive");
  require(dim > 0, "dim must be positive");
  require(window > 0, "window must be positive");
  require(q >= 0, "q must be non-negative");
  require(epochs >= 0, "epochs must be non-negative");
  require(permutations_per_doc > 0, "max-perms must be positive");
  require(negative_ratio > 0, "neg-ratio must be positive");
  require(adagrad_epsilon > 0, "epsilon must be positive");
  require(!scoring.noun_prefixes.empty(), "noun prefixes must be non-empty");
}

std::vector<TrainSample> generate_training_set(std::span<const Document> docs, int permutations,
                                               std::uint64_t seed, int window, double negative_ratio) {
  if (permutations < 1) throw ConfigError("permutations per document must be >= 1");
  std::vector<TrainSample> out;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const Document& doc = docs[d];
    const auto windows = window_indices(doc.sentences.size(), window);
    auto to_sample = [&](const std::vector<int>& ids, int label) {
      TrainSample s;
      s.label = label;
      for (int id : ids) s.window.push_back(id == kPadding ? nullptr : &doc.sentences[id]);
      return s;
    };

    std::set<std::vector<int>> original(windows.begin(), windows.end());
    for (const auto& w : windows) out.push_back(to_sample(w, 1));

    Rng rng = Rng::derive(seed, d);
    std::vector<std::vector<int>> negatives;
    std::set<std::vector<int>> taken;
    for (const Order& order : permutation_orders(doc.sentences.size(), permutations, rng.next())) {
      for (const auto& w : windows) {
        std::vector<int> ids(w.size());
        std::transform(w.begin(), w.end(), ids.begin(),
                       [&](int i) { return i == kPadding ? kPadding : static_cast<int>(order[i]); });
        if (original.contains(ids) || !taken.insert(ids).second) continue;
        negatives.push_back(std::move(ids));
      }
    }

    const auto limit = static_cast<std::size_t>(std::floor(negative_ratio * static_cast<double>(windows.size())));
    if (negatives.size() > limit) {
      std::vector<std::size_t> pick(negatives.size());
      std::iota(pick.begin(), pick.end(), std::size_t{0});
      rng.shuffle(std::span(pick));
      pick.resize(limit);
      std::sort(pick.begin(), pick.end());
      std::vector<std::vector<int>> kept;
      kept.reserve(limit);
      for (std::size_t i : pick) kept.push_back(std::move(negatives[i]));
      negatives = std::move(kept);
    }
    for (const auto& ids : negatives) out.push_back(to_sample(ids, 0));
  }
  return out;
}

double loss(const ModelParams& model, const EmbeddingTable& table, std::span<const TrainSample> batch,
            double q, std::size_t m, const ScoringOptions& options) {
  if (m == 0) throw ConfigError("loss: M must be >= 1");
  const BatchCache cache(model, table, batch, options);
  double ce = 0.0;
  for (const auto& sample : batch) {
    ce += cross_entropy(clique_forward(model, cache.clique(sample, model.hyper.dim)).logit, sample.label);
  }
  const double md = static_cast<double>(m);
  return ce / md + q / (2.0 * md) * squared_weight_norm(model);
}

Gradients grad(const ModelParams& model, const EmbeddingTable& table, std::span<const TrainSample> batch,
               double q, std::size_t m, const ScoringOptions& options, bool embedding_grads) {
  if (m == 0) throw ConfigError("grad: M must be >= 1");
  const int k = model.hyper.dim;
  const double md = static_cast<double>(m);
  const auto& coh = model.coherence;

  Gradients g{ModelParams::zeros(model.hyper), {}};
  auto& gc = g.params.coherence;

  const BatchCache cache(model, table, batch, options);
  std::vector<Vector> d_root(cache.sentences.size(), Vector::Zero(k));
  std::vector<Vector> d_entity(cache.sentences.size(), Vector::Zero(k));

  for (const auto& sample : batch) {
    const Clique clique = cache.clique(sample, k);
    const auto act = clique_forward(model, clique);
    const double p = 1.0 / (1.0 + std::exp(-act.logit));
    const double dz = (p - sample.label) / md;

    gc.output += dz * act.hidden;
    gc.output_bias += dz;
    const Vector da = (dz * coh.output).cwiseProduct((1.0 - act.hidden.array().square()).matrix());
    gc.weight.noalias() += da * act.gated.transpose();
    gc.bias += da;
    const Vector d_gated = coh.weight.transpose() * da;

    for (std::size_t j = 0; j < sample.window.size(); ++j) {
      const Sentence* s = sample.window[j];
      if (s == nullptr) continue;
      const int i = cache.slot.at(s);
      const auto seg = d_gated.segment(static_cast<Eigen::Index>(j) * k, k);
      // The gate masks the upstream gradient elementwise in both directions.
      d_root[i] += seg.cwiseProduct(cache.entities[i]);
      if (embedding_grads && cache.has_nouns[i]) d_entity[i] += seg.cwiseProduct(cache.encodings[i].root);
    }
  }

  auto& gr = g.params.recursive;
  for (std::size_t i = 0; i < cache.sentences.size(); ++i) {
    const auto sg = backprop_sentence(model.recursive, cache.encodings[i].trace, d_root[i], embedding_grads);
    gr.weight += sg.weight;
    gr.bias += sg.bias;
    if (!embedding_grads) continue;
    for (const auto& [row, v] : sg.leaves) {
      auto [it, fresh] = g.embeddings.try_emplace(row, v);
      if (!fresh) it->second += v;
    }
    if (cache.has_nouns[i]) {
      for (const Token& noun : extract_nouns(*cache.sentences[i], options.noun_prefixes)) {
        auto [it, fresh] = g.embeddings.try_emplace(table.index_of(noun.surface), d_entity[i]);
        if (!fresh) it->second += d_entity[i];
      }
    }
  }

  add_scaled(g.params, model, q / md, /*regularized_only=*/true);
  return g;
}

void adagrad_step(ModelParams& model, const Gradients& grads, AdaGradState& state, double lr,
                  EmbeddingTable* embeddings) {
  auto params = tensors(model);
  auto accum = tensors(state.accum);
  const auto g = tensors(grads.params);
  for (std::size_t t = 0; t < kTensorCount; ++t) {
    if (params[t].values.size() != g[t].values.size() || accum[t].values.size() != g[t].values.size()) {
      throw ShapeError(std::string("adagrad_step: shape mismatch in ") + params[t].name);
    }
    for (std::size_t i = 0; i < g[t].values.size(); ++i) {
      const double gi = g[t].values[i];
      accum[t].values[i] += gi * gi;
      params[t].values[i] -= lr * gi / (std::sqrt(accum[t].values[i]) + state.epsilon);
    }
  }
  if (embeddings == nullptr) return;
  for (const auto& [row, gv] : grads.embeddings) {
    auto [it, fresh] = state.embedding_accum.try_emplace(row, Vector::Zero(gv.size()));
    Vector& acc = it->second;
    acc += gv.cwiseProduct(gv);
    Vector& theta = embeddings->mutable_row(row);
    theta.array() -= lr * gv.array() / (acc.array().sqrt() + state.epsilon);
  }
}

TrainResult train(const TrainConfig& config, std::span<const Document> corpus, const EmbeddingTable& table,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (table.dim() != config.dim) {
    throw ShapeError("embedding dimension " + std::to_string(table.dim()) + " does not match K=" +
                     std::to_string(config.dim));
  }
  if (corpus.empty()) throw DataError("empty training corpus");

  TrainResult result{init_uniform(config.hyper(), config.seed), {}, 0, std::nullopt};
  const auto samples = generate_training_set(corpus, config.permutations_per_doc,
                                             Rng::derive(config.seed, 1).next(), config.window,
                                             config.negative_ratio);
  if (samples.empty()) throw DataError("empty training set");
  result.samples = samples.size();
  const std::size_t m = samples.size();

  if (config.fine_tune_embeddings) result.embeddings = table;
  const EmbeddingTable& active = result.embeddings ? *result.embeddings : table;

  AdaGradState state(config.hyper(), config.adagrad_epsilon);
  Rng shuffle_rng = Rng::derive(config.seed, 2);
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<TrainSample> batch;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_rng.shuffle(std::span(order));
    for (std::size_t start = 0; start < m; start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(m, start + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(samples[order[i]]);
      // Each minibatch carries its share of the L2 term so that one epoch
      // of steps sums to the gradient of the full objective.
      const double q_share = config.q * static_cast<double>(end - start) / static_cast<double>(m);
      const Gradients g = grad(result.model, active, batch, q_share, m, config.scoring,
                               config.fine_tune_embeddings);
      adagrad_step(result.model, g, state, config.learning_rate,
                   result.embeddings ? &*result.embeddings : nullptr);
    }
    const double j = loss(result.model, active, samples, config.q, m, config.scoring);
    result.epoch_loss.push_back(j);
    if (on_epoch) on_epoch(epoch, j);
  }
  return result;
}

}  // namespace coherentia
