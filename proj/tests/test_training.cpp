#include <gtest/gtest.h>

#include <utility>

#include <cmath>
#include <numbers>
#include <set>

#include "coherentia/gradcheck.hpp"
#include "coherentia/training.hpp"
#include "synthetic.hpp"

namespace coherentia {
namespace {

Document doc_of(int n, const std::string& id = "d") {
  Document d;
  d.id = id;
  for (int i = 0; i < n; ++i) d.sentences.push_back(parse_sentence("(S (NN s" + std::to_string(i) + "))"));
  return d;
}

// Sentence indices of a sample's window, -1 for padding.
std::vector<int> ids(const TrainSample& s, const Document& d) {
  std::vector<int> out;
  for (const Sentence* p : s.window) out.push_back(p ? static_cast<int>(p - d.sentences.data()) : -1);
  return out;
}

std::vector<Token> vocabulary() {
  const char* tags[] = {"NN", "VV", "NR", "AD", "NT"};
  std::vector<Token> v;
  for (int i = 0; i < 10; ++i) v.push_back({"w" + std::to_string(i), tags[i % 5]});
  return v;
}

EmbeddingTable unit_table(const std::vector<Token>& vocab, int k, Rng& rng) {
  EmbeddingTable t(k);
  for (const auto& tok : vocab) {
    Vector v(k);
    for (int i = 0; i < k; ++i) v[i] = rng.uniform(-1.0, 1.0);
    t.add(tok.surface, v);
  }
  return t;
}

TEST(GenerateTrainingSet, SingleSentencePositivesOnly) {
  const std::vector<Document> docs = {doc_of(1)};
  const auto samples = generate_training_set(docs, 20, 1, 3);
  ASSERT_EQ(samples.size(), 1u);
  EXPECT_EQ(samples[0].label, 1);
  EXPECT_EQ(ids(samples[0], docs[0]), (std::vector<int>{0, -1, -1}));
}

TEST(GenerateTrainingSet, ThreeSentencesUseAtMostFivePermutations) {
  const std::vector<Document> docs = {doc_of(3)};
  const auto samples = generate_training_set(docs, 20, 1, 3, /*negative_ratio=*/100.0);
  std::set<std::vector<int>> negatives;
  int positives = 0;
  for (const auto& s : samples) {
    if (s.label == 1) {
      ++positives;
      EXPECT_EQ(ids(s, docs[0]), (std::vector<int>{0, 1, 2}));
    } else {
      negatives.insert(ids(s, docs[0]));
    }
  }
  EXPECT_EQ(positives, 1);
  EXPECT_EQ(negatives.size(), 5u);
  EXPECT_EQ(samples.size(), 6u);
}

TEST(GenerateTrainingSet, ExcludesOriginalWindows) {
  const std::vector<Document> docs = {doc_of(4)};
  const auto samples = generate_training_set(docs, 23, 9, 2, 100.0);
  const std::set<std::vector<int>> original = {{0, 1}, {1, 2}, {2, 3}};
  std::set<std::vector<int>> seen;
  for (const auto& s : samples) {
    if (s.label == 1) continue;
    const auto w = ids(s, docs[0]);
    EXPECT_FALSE(original.contains(w));
    EXPECT_TRUE(seen.insert(w).second) << "duplicate negative";
  }
  // Every ordered pair of distinct sentences that is not an original window.
  EXPECT_EQ(seen.size(), 12u - 3u);
}

TEST(GenerateTrainingSet, DownsamplesAndIsDeterministic) {
  std::vector<Document> docs = {doc_of(8, "a"), doc_of(5, "b"), doc_of(2, "c")};
  const auto a = generate_training_set(docs, 20, 4, 3);
  const auto b = generate_training_set(docs, 20, 4, 3);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].window, b[i].window);
    EXPECT_EQ(a[i].label, b[i].label);
  }
  // Per document at most 2x positives: 6 + 3 + 1 positives.
  std::size_t neg = 0;
  for (const auto& s : a) neg += s.label == 0;
  EXPECT_LE(neg, 2u * 10u);
  EXPECT_THROW(generate_training_set(docs, 0, 4, 3), ConfigError);
}

TEST(Loss, CrossEntropyAtHalf) {
  const ModelParams m = ModelParams::zeros({2, 1, 2});
  const Document d = doc_of(1);
  TrainSample pos{{&d.sentences[0]}, 1};
  TrainSample neg{{&d.sentences[0]}, 0};
  EmbeddingTable t(2);
  EXPECT_NEAR(loss(m, t, std::span(&pos, 1), 0.0, 1), std::numbers::ln2, 1e-15);
  EXPECT_NEAR(loss(m, t, std::span(&neg, 1), 0.0, 1), std::numbers::ln2, 1e-15);
  // Zero weights: L2 term vanishes.
  EXPECT_EQ(loss(m, t, std::span(&pos, 1), 0.5, 1), loss(m, t, std::span(&pos, 1), 0.0, 1));
  EXPECT_THROW(loss(m, t, std::span(&pos, 1), 0.0, 0), ConfigError);
}

TEST(Loss, L2TermIsAdditiveOverWeightsOnly) {
  Rng rng(1);
  const auto vocab = vocabulary();
  const EmbeddingTable t = unit_table(vocab, 3, rng);
  std::vector<Document> docs = {random_document(rng, vocab, 5, 5, "a")};
  const auto samples = generate_training_set(docs, 5, 2, 3);
  ModelParams m = init_uniform({3, 3, 4}, 3);
  const double q = 0.3;
  const std::size_t big_m = samples.size() + 7;
  const double w2 = m.recursive.weight.squaredNorm() + m.coherence.weight.squaredNorm() +
                    m.coherence.output.squaredNorm();
  EXPECT_DOUBLE_EQ(squared_weight_norm(m), w2);
  EXPECT_NEAR(loss(m, t, samples, q, big_m) - loss(m, t, samples, 0.0, big_m), q / (2.0 * big_m) * w2, 1e-15);
  EXPECT_GE(loss(m, t, samples, 0.0, big_m), 0.0);
}

TEST(Grad, EmptyBatchIsZero) {
  const ModelParams m = init_uniform({3, 3, 2}, 1);
  const Gradients g = grad(m, EmbeddingTable(3), {}, 0.0, 5);
  for (const auto& view : tensors(g.params)) {
    for (double v : view.values) EXPECT_EQ(v, 0.0) << view.name;
  }
}

TEST(Grad, ZeroEntityVectorsBlockRecursiveGradient) {
  EmbeddingTable t(3);
  t.add("n", Vector::Zero(3));
  t.add("v", Vector::Ones(3));
  std::vector<Document> docs(1);
  docs[0].id = "z";
  for (int i = 0; i < 4; ++i) docs[0].sentences.push_back(parse_sentence("(S (NN n) (VV v) (VV v))"));
  const auto samples = generate_training_set(docs, 5, 1, 3);
  const ModelParams m = init_uniform({3, 3, 4}, 2);
  const Gradients g = grad(m, t, samples, 0.0, samples.size());
  EXPECT_TRUE(g.params.recursive.weight.isZero(0.0));
  EXPECT_TRUE(g.params.recursive.bias.isZero(0.0));
  EXPECT_FALSE(g.params.coherence.bias.isZero(0.0));
}

TEST(Grad, FiniteDifferencesSmallModel) {
  GradCheckOptions opt;  // K=4, H=3, L=3
  opt.instances = 5;
  opt.seed = 11;
  opt.embeddings = true;
  // Relative error on coordinates above 1e-4; below that the difference
  // quotient's round-off (about 2e-10 here) dominates, so require 1e-9.
  opt.small = 1e-4;
  opt.abs_tol = 1e-9;
  const GradCheckReport r = gradient_check(opt);
  for (const auto& t : r.tensors) EXPECT_EQ(t.failures, 0u) << t.name << " max rel " << t.max_rel_error;
  EXPECT_TRUE(r.passed);
}

TEST(Grad, BatchSharesSumToFullGradient) {
  Rng rng(3);
  const auto vocab = vocabulary();
  const EmbeddingTable t = unit_table(vocab, 3, rng);
  std::vector<Document> docs = {random_document(rng, vocab, 6, 5, "a"), random_document(rng, vocab, 4, 5, "b")};
  const auto samples = generate_training_set(docs, 6, 2, 3);
  const std::size_t m = samples.size();
  const ModelParams model = init_uniform({3, 3, 4}, 5);
  const double q = 0.2;

  const Gradients full = grad(model, t, samples, q, m);
  ModelParams sum = ModelParams::zeros(model.hyper);
  for (std::size_t start = 0; start < m; start += 4) {
    const std::size_t len = std::min<std::size_t>(4, m - start);
    const Gradients part = grad(model, t, std::span(samples).subspan(start, len), q * len / m, m);
    auto dst = tensors(sum);
    const auto src = tensors(part.params);
    for (std::size_t k = 0; k < kTensorCount; ++k) {
      for (std::size_t i = 0; i < dst[k].values.size(); ++i) dst[k].values[i] += src[k].values[i];
    }
  }
  const auto a = tensors(full.params);
  const auto b = tensors(sum);
  for (std::size_t k = 0; k < kTensorCount; ++k) {
    for (std::size_t i = 0; i < a[k].values.size(); ++i) EXPECT_NEAR(a[k].values[i], b[k].values[i], 1e-14);
  }
}

TEST(AdaGrad, HandExamples) {
  const Hyper h{1, 1, 1};
  ModelParams m = ModelParams::zeros(h);
  AdaGradState state(h);
  Gradients g{ModelParams::zeros(h), {}};
  g.params.coherence.output_bias = 2.0;
  adagrad_step(m, g, state, 0.01);
  EXPECT_DOUBLE_EQ(m.coherence.output_bias, -0.01 * 2.0 / (2.0 + 1e-6));
  EXPECT_NEAR(m.coherence.output_bias, -0.00999999, 1e-8);

  ModelParams m2 = ModelParams::zeros(h);
  AdaGradState s2(h);
  g.params.coherence.output_bias = 1.0;
  adagrad_step(m2, g, s2, 0.01);
  const double before = m2.coherence.output_bias;
  adagrad_step(m2, g, s2, 0.01);
  EXPECT_DOUBLE_EQ(m2.coherence.output_bias - before, -0.01 / (std::sqrt(2.0) + 1e-6));
  EXPECT_EQ(s2.accum.coherence.output_bias, 2.0);
}

TEST(AdaGrad, ZeroGradientChangesNothing) {
  const Hyper h{2, 3, 2};
  ModelParams m = init_uniform(h, 4);
  const ModelParams before = m;
  AdaGradState state(h);
  adagrad_step(m, Gradients{ModelParams::zeros(h), {}}, state, 0.5);
  const auto a = tensors(std::as_const(m)), b = tensors(before), acc = tensors(std::as_const(state.accum));
  for (std::size_t k = 0; k < kTensorCount; ++k) {
    for (std::size_t i = 0; i < a[k].values.size(); ++i) {
      EXPECT_EQ(a[k].values[i], b[k].values[i]);
      EXPECT_EQ(acc[k].values[i], 0.0);
    }
  }
}

TEST(AdaGrad, PropertyMonotoneAccumulatorsBoundedSteps) {
  const Hyper h{2, 2, 3};
  Rng rng(8);
  ModelParams m = init_uniform(h, 9);
  AdaGradState state(h);
  const double lr = 0.05;
  for (int step = 0; step < 30; ++step) {
    Gradients g{ModelParams::zeros(h), {}};
    for (auto& view : tensors(g.params)) {
      for (double& v : view.values) v = rng.uniform() < 0.2 ? 0.0 : rng.uniform(-3.0, 3.0);
    }
    const ModelParams prev = m;
    const AdaGradState prev_state = state;
    adagrad_step(m, g, state, lr);
    const auto now = tensors(std::as_const(m)), was = tensors(prev);
    const auto acc = tensors(std::as_const(state.accum)), acc0 = tensors(prev_state.accum);
    for (std::size_t k = 0; k < kTensorCount; ++k) {
      for (std::size_t i = 0; i < now[k].values.size(); ++i) {
        EXPECT_GE(acc[k].values[i], acc0[k].values[i]);
        EXPECT_LE(std::fabs(now[k].values[i] - was[k].values[i]), lr);
      }
    }
  }
  ModelParams wrong = ModelParams::zeros({3, 2, 3});
  EXPECT_THROW(adagrad_step(wrong, Gradients{ModelParams::zeros(h), {}}, state, lr), ShapeError);
}

TEST(Train, EpochsZeroReturnsInitialization) {
  Rng rng(1);
  const auto vocab = vocabulary();
  const EmbeddingTable t = unit_table(vocab, 3, rng);
  std::vector<Document> docs = {random_document(rng, vocab, 4, 4, "a")};
  TrainConfig c;
  c.dim = 3;
  c.hidden = 2;
  c.epochs = 0;
  c.seed = 77;
  const TrainResult r = train(c, docs, t);
  const ModelParams init = init_uniform(c.hyper(), 77);
  const auto a = tensors(r.model), b = tensors(init);
  for (std::size_t k = 0; k < kTensorCount; ++k) {
    EXPECT_TRUE(std::equal(a[k].values.begin(), a[k].values.end(), b[k].values.begin())) << a[k].name;
  }
  EXPECT_TRUE(r.epoch_loss.empty());
}

TEST(Train, DeterministicTrajectory) {
  testing::SyntheticSpec spec;
  spec.documents = 12;
  spec.held_out = 0;
  const auto corpus = testing::make_synthetic_corpus(spec);
  const EmbeddingTable t = random_table(corpus.vocabulary, 6, 2);
  TrainConfig c;
  c.dim = 6;
  c.hidden = 5;
  c.epochs = 3;
  c.fine_tune_embeddings = true;
  const TrainResult a = train(c, corpus.train, t);
  const TrainResult b = train(c, corpus.train, t);
  EXPECT_EQ(a.epoch_loss, b.epoch_loss);
  const auto x = tensors(a.model), y = tensors(b.model);
  for (std::size_t k = 0; k < kTensorCount; ++k) {
    EXPECT_TRUE(std::equal(x[k].values.begin(), x[k].values.end(), y[k].values.begin()));
  }
  ASSERT_TRUE(a.embeddings && b.embeddings);
  for (std::size_t i = 0; i <= a.embeddings->size(); ++i) EXPECT_EQ(a.embeddings->row(i), b.embeddings->row(i));
  // Fine-tuning moved at least one noun vector.
  bool moved = false;
  for (std::size_t i = 0; i < t.size(); ++i) moved = moved || a.embeddings->row(i) != t.row(i);
  EXPECT_TRUE(moved);
}

// Spec'd behaviour on the synthetic corpus at the acceptance settings.
TEST(Train, LossDecreasesOverFirstFiveEpochs) {
  const auto corpus = testing::make_synthetic_corpus({});
  const EmbeddingTable t = random_table(corpus.vocabulary, 16, 11);
  TrainConfig c;
  c.dim = 16;
  c.hidden = 16;
  c.epochs = 5;
  const TrainResult r = train(c, corpus.train, t);
  ASSERT_EQ(r.epoch_loss.size(), 5u);
  const double initial = loss(init_uniform(c.hyper(), c.seed), t,
                              generate_training_set(corpus.train, c.permutations_per_doc,
                                                    Rng::derive(c.seed, 1).next(), c.window),
                              c.q, r.samples);
  EXPECT_LT(r.epoch_loss[0], initial);
  for (std::size_t e = 1; e < r.epoch_loss.size(); ++e) EXPECT_LT(r.epoch_loss[e], r.epoch_loss[e - 1]) << e;
}

TEST(Train, Errors) {
  TrainConfig c;
  c.dim = 3;
  EXPECT_THROW(train(c, std::vector<Document>{doc_of(2)}, EmbeddingTable(4)), ShapeError);
  EXPECT_THROW(train(c, std::vector<Document>{}, EmbeddingTable(3)), DataError);
  c.learning_rate = 0.0;
  EXPECT_THROW(train(c, std::vector<Document>{doc_of(2)}, EmbeddingTable(3)), ConfigError);
}

}  // namespace
}  // namespace coherentia
