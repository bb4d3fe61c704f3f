#include <gtest/gtest.h>

#include <cmath>

#include "coherentia/encoder.hpp"
#include "coherentia/gradcheck.hpp"

namespace coherentia {
namespace {

RecursiveParams zero_params(int k) { return {Matrix::Zero(k, 2 * k), Vector::Zero(k)}; }

RecursiveParams random_params(int k, Rng& rng) {
  RecursiveParams p = zero_params(k);
  for (Eigen::Index i = 0; i < p.weight.size(); ++i) p.weight.data()[i] = rng.uniform(-0.8, 0.8);
  for (int i = 0; i < k; ++i) p.bias[i] = rng.uniform(-0.5, 0.5);
  return p;
}

EmbeddingTable table_for(const std::vector<Token>& vocab, int k, Rng& rng) {
  EmbeddingTable t(k);
  for (const auto& tok : vocab) {
    Vector v(k);
    for (int i = 0; i < k; ++i) v[i] = rng.uniform(-1.0, 1.0);
    t.add(tok.surface, v);
  }
  return t;
}

std::vector<Token> vocabulary() {
  std::vector<Token> v;
  for (int i = 0; i < 8; ++i) v.push_back({"w" + std::to_string(i), i % 2 ? "VV" : "NN"});
  return v;
}

TEST(EncodeSentence, HandExample) {
  EmbeddingTable t(2);
  t.add("x", (Vector(2) << 1, 0).finished());
  t.add("y", (Vector(2) << 0, 1).finished());
  RecursiveParams p = zero_params(2);
  p.weight << 1, 0, 0, 0,  //
      0, 0, 0, 1;
  const Encoding e = encode_sentence(p, t, parse_sentence("(S (NN x) (NN y))"));
  EXPECT_NEAR(e.root[0], 0.761594, 1e-6);
  EXPECT_NEAR(e.root[1], 0.761594, 1e-6);
  EXPECT_EQ(e.root[0], std::tanh(1.0));
}

TEST(EncodeSentence, SingleLeafIsRawEmbedding) {
  EmbeddingTable t(3);
  t.add("x", (Vector(3) << 2, -3, 4).finished());
  Rng rng(1);
  const Encoding e = encode_sentence(random_params(3, rng), t, parse_sentence("(NP (NN x))"));
  EXPECT_EQ(e.root, t.lookup("x"));
  EXPECT_TRUE(e.trace.internal.empty());
}

TEST(EncodeSentence, ZeroParamsGiveZeroRoot) {
  Rng rng(2);
  const auto vocab = vocabulary();
  const EmbeddingTable t = table_for(vocab, 4, rng);
  const Document doc = random_document(rng, vocab, 10, 8, "d");
  for (const auto& s : doc.sentences) {
    if (s.tokens.size() < 2) continue;
    EXPECT_TRUE(encode_sentence(zero_params(4), t, s).root.isZero(0.0));
  }
}

TEST(EncodeSentence, DimensionMismatch) {
  EmbeddingTable t(3);
  EXPECT_THROW(encode_sentence(zero_params(2), t, parse_sentence("(S (NN a) (NN b))")), ShapeError);
}

TEST(EncodeSentence, PropertyShapeBoundsReplayAndDeterminism) {
  Rng rng(3);
  const auto vocab = vocabulary();
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 1 + static_cast<int>(rng.index(8));
    const EmbeddingTable t = table_for(vocab, k, rng);
    const RecursiveParams p = random_params(k, rng);
    const Sentence s = random_document(rng, vocab, 1, 10, "d").sentences[0];
    const Encoding e = encode_sentence(p, t, s);
    ASSERT_EQ(e.root.size(), k);
    EXPECT_EQ(e.trace.internal.size(), s.tree.internal_count());
    for (const auto& step : e.trace.internal) {
      EXPECT_LT(step.output.cwiseAbs().maxCoeff(), 1.0);
      // Replay one step.
      const Vector again = (p.weight * step.input + p.bias).array().tanh().matrix();
      EXPECT_EQ(again, step.output);
    }
    EXPECT_EQ(encode_sentence(p, t, s).root, e.root);
  }
}

TEST(BackpropSentence, ZeroUpstreamGivesZero) {
  Rng rng(4);
  const auto vocab = vocabulary();
  const EmbeddingTable t = table_for(vocab, 3, rng);
  const RecursiveParams p = random_params(3, rng);
  const Sentence s = parse_sentence("(S (NN w0) (VV w1) (NN w2))");
  const auto g = backprop_sentence(p, encode_sentence(p, t, s).trace, Vector::Zero(3), true);
  EXPECT_TRUE(g.weight.isZero(0.0));
  EXPECT_TRUE(g.bias.isZero(0.0));
  for (const auto& [row, v] : g.leaves) EXPECT_TRUE(v.isZero(0.0));
}

TEST(BackpropSentence, SingleLeafPassesGradientThrough) {
  Rng rng(5);
  const auto vocab = vocabulary();
  const EmbeddingTable t = table_for(vocab, 3, rng);
  const RecursiveParams p = random_params(3, rng);
  const Vector up = (Vector(3) << 0.3, -1.2, 2.0).finished();
  const auto g = backprop_sentence(p, encode_sentence(p, t, parse_sentence("(NP (NN w4))")).trace, up, true);
  EXPECT_TRUE(g.weight.isZero(0.0));
  EXPECT_TRUE(g.bias.isZero(0.0));
  ASSERT_EQ(g.leaves.size(), 1u);
  EXPECT_EQ(g.leaves[0].first, t.index_of("w4"));
  EXPECT_EQ(g.leaves[0].second, up);
}

// <up, root> as a function of the parameters, checked by central differences.
TEST(BackpropSentence, MatchesFiniteDifferences) {
  constexpr double h = 1e-6;
  Rng rng(6);
  auto vocab = vocabulary();
  for (int trial = 0; trial < 20; ++trial) {
    const int k = 2 + static_cast<int>(rng.index(7));
    EmbeddingTable t = table_for(vocab, k, rng);
    RecursiveParams p = random_params(k, rng);
    const Sentence s = random_document(rng, vocab, 1, 10, "d").sentences[0];
    Vector up(k);
    for (int i = 0; i < k; ++i) up[i] = rng.uniform(-1.0, 1.0);

    const auto g = backprop_sentence(p, encode_sentence(p, t, s).trace, up, true);
    auto f = [&] { return up.dot(encode_sentence(p, t, s).root); };
    auto check = [&](double& theta, double analytic) {
      const double saved = theta;
      theta = saved + h;
      const double a = f();
      theta = saved - h;
      const double b = f();
      theta = saved;
      const double numeric = (a - b) / (2 * h);
      // Round-off of the difference quotient is about 1e-10 here.
      EXPECT_NEAR(analytic, numeric, 1e-5 * std::max(std::fabs(analytic), 1e-4));
    };
    for (Eigen::Index i = 0; i < p.weight.size(); ++i) check(p.weight.data()[i], g.weight.data()[i]);
    for (int i = 0; i < k; ++i) check(p.bias[i], g.bias[i]);

    // Leaf gradients summed per embedding row.
    std::map<EmbeddingTable::Index, Vector> rows;
    for (const auto& [row, v] : g.leaves) {
      auto [it, fresh] = rows.try_emplace(row, v);
      if (!fresh) it->second += v;
    }
    for (auto& [row, v] : rows) {
      for (int i = 0; i < k; ++i) check(t.mutable_row(row)[i], v[i]);
    }
  }
}

}  // namespace
}  // namespace coherentia
