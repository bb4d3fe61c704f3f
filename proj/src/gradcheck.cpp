#include "coherentia/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "coherentia/training.hpp"

namespace coherentia {

namespace {

const std::vector<std::string> kTags = {"NN", "NR", "NT", "VV", "AD", "DT"};
const std::vector<std::string> kPhraseLabels = {"NP", "VP", "IP", "PP", "QP"};

ParseNode build_parse(Rng& rng, std::span<const Token> leaves) {
  if (leaves.size() == 1) {
    ParseNode leaf{leaves[0].pos, {}, leaves[0]};
    // Occasional unary wrapper.
    if (rng.uniform() < 0.3) return ParseNode{kPhraseLabels[rng.index(kPhraseLabels.size())], {leaf}, {}};
    return leaf;
  }
  const std::size_t parts = std::min<std::size_t>(leaves.size(), 2 + rng.index(2));
  // Random split points between 1 and size-1.
  std::vector<std::size_t> cuts;
  while (cuts.size() + 1 < parts) {
    const std::size_t c = 1 + rng.index(leaves.size() - 1);
    if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  ParseNode node{kPhraseLabels[rng.index(kPhraseLabels.size())], {}, {}};
  std::size_t begin = 0;
  cuts.push_back(leaves.size());
  for (std::size_t c : cuts) {
    node.children.push_back(build_parse(rng, leaves.subspan(begin, c - begin)));
    begin = c;
  }
  return node;
}

std::vector<Token> gradcheck_vocabulary() {
  std::vector<Token> vocab;
  for (int i = 0; i < 12; ++i) vocab.push_back({"w" + std::to_string(i), kTags[i % kTags.size()]});
  return vocab;
}

void record(TensorCheck& check, double analytic, double numeric, const GradCheckOptions& opt) {
  const double abs_err = std::fabs(analytic - numeric);
  check.max_abs_error = std::max(check.max_abs_error, abs_err);
  ++check.checked;
  if (std::fabs(analytic) > opt.small) {
    const double rel = abs_err / std::max(std::fabs(analytic), std::fabs(numeric));
    check.max_rel_error = std::max(check.max_rel_error, rel);
    if (!(rel < opt.rel_tol)) ++check.failures;
  } else if (!(abs_err < opt.abs_tol)) {
    ++check.failures;
  }
}

}  // namespace

ParseNode random_parse(Rng& rng, std::span<const Token> leaves) {
  if (leaves.empty()) throw ConfigError("random_parse: no leaves");
  ParseNode root = build_parse(rng, leaves);
  if (root.is_leaf()) return ParseNode{"IP", {root}, {}};
  return root;
}

Document random_document(Rng& rng, std::span<const Token> vocabulary, std::size_t sentences,
                         int max_leaves, std::string id) {
  Document doc;
  doc.id = std::move(id);
  for (std::size_t s = 0; s < sentences; ++s) {
    const std::size_t len = 1 + rng.index(static_cast<std::uint64_t>(max_leaves));
    std::vector<Token> tokens;
    for (std::size_t i = 0; i < len; ++i) tokens.push_back(vocabulary[rng.index(vocabulary.size())]);
    doc.sentences.push_back(make_sentence(random_parse(rng, tokens)));
  }
  return doc;
}

GradCheckReport gradient_check(const GradCheckOptions& opt) {
  const auto vocab = gradcheck_vocabulary();

  std::vector<TensorCheck> checks;
  for (const auto& t : tensors(ModelParams::zeros({opt.dim, opt.window, opt.hidden}))) checks.push_back({t.name});
  if (opt.embeddings) checks.push_back({"embeddings"});

  for (int inst = 0; inst < opt.instances; ++inst) {
    Rng rng = Rng::derive(opt.seed, static_cast<std::uint64_t>(inst));
    Hyper hyper{opt.dim, opt.window, opt.hidden};
    if (opt.max_dim > 0) hyper.dim = 2 + static_cast<int>(rng.index(static_cast<std::uint64_t>(opt.max_dim - 1)));
    if (opt.max_hidden > 0) hyper.hidden = 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(opt.max_hidden)));

    // Unit-scale embeddings keep gradients well above finite-difference
    // round-off.
    EmbeddingTable table(hyper.dim);
    for (const Token& t : vocab) {
      Vector v(hyper.dim);
      for (int i = 0; i < hyper.dim; ++i) v[i] = rng.uniform(-1.0, 1.0);
      table.add(t.surface, v);
    }
    std::vector<Document> docs;
    docs.push_back(random_document(rng, vocab, 2, opt.max_leaves, "short"));
    docs.push_back(random_document(rng, vocab, 2 + rng.index(3), opt.max_leaves, "long"));
    // One out-of-vocabulary token exercises the shared unk row.
    docs.back().sentences.back() = parse_sentence("(IP (NN unseen) (VV w3))");

    ModelParams model = init_uniform(hyper, rng.next());
    const auto samples = generate_training_set(docs, 3, rng.next(), opt.window);
    const std::size_t m = samples.size();
    const ScoringOptions scoring;

    Gradients analytic = grad(model, table, samples, opt.q, m, scoring, opt.embeddings);
    if (opt.perturb != 0.0) analytic.params.recursive.weight(0, 0) += opt.perturb;

    auto objective = [&](const ModelParams& mp, const EmbeddingTable& tb) {
      return loss(mp, tb, samples, opt.q, m, scoring);
    };

    auto params = tensors(model);
    const auto grads = tensors(analytic.params);
    for (std::size_t t = 0; t < kTensorCount; ++t) {
      for (std::size_t i = 0; i < params[t].values.size(); ++i) {
        double& theta = params[t].values[i];
        const double saved = theta;
        theta = saved + opt.step;
        const double up = objective(model, table);
        theta = saved - opt.step;
        const double down = objective(model, table);
        theta = saved;
        record(checks[t], grads[t].values[i], (up - down) / (2.0 * opt.step), opt);
      }
    }

    if (opt.embeddings) {
      for (EmbeddingTable::Index row = 0; row <= table.unk_index(); ++row) {
        auto it = analytic.embeddings.find(row);
        for (int i = 0; i < hyper.dim; ++i) {
          double& theta = table.mutable_row(row)[i];
          const double saved = theta;
          theta = saved + opt.step;
          const double up = objective(model, table);
          theta = saved - opt.step;
          const double down = objective(model, table);
          theta = saved;
          const double a = it == analytic.embeddings.end() ? 0.0 : it->second[i];
          record(checks.back(), a, (up - down) / (2.0 * opt.step), opt);
        }
      }
    }
  }

  GradCheckReport report;
  report.tensors = std::move(checks);
  report.passed = std::all_of(report.tensors.begin(), report.tensors.end(),
                              [](const TensorCheck& c) { return c.failures == 0; });
  return report;
}

}  // namespace coherentia
