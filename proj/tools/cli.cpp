#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

#include "CLI11.hpp"
#include "coherentia/baseline_graph.hpp"
#include "coherentia/coherence.hpp"
#include "coherentia/corpus.hpp"
#include "coherentia/embeddings.hpp"
#include "coherentia/eval.hpp"
#include "coherentia/gradcheck.hpp"
#include "coherentia/model.hpp"
#include "coherentia/random.hpp"
#include "coherentia/training.hpp"

namespace coherentia::cli {

namespace {

namespace fs = std::filesystem;

constexpr const char* kSeedEnv = "COHERENTIA_SEED";
constexpr const char* kManifestName = "pairs.tsv";
constexpr const char* kPermutedDir = "permuted";
constexpr const char* kDocExtension = ".parse";

// Every field any subcommand can set; defaults are the built-in layer of
// the defaults < config file < flags precedence.
struct RunConfig {
  TrainConfig train;
  std::string corpus;
  std::string embeddings;
  std::string model;
  std::string log;
  std::string embeddings_out;
  std::string out;
  std::string manifest;
  std::string ref_dir;
  std::string sys_dir;
  std::string compare;
  std::string mode = "all";
  bool discount = false;
  bool force = false;
  bool no_entity_gate = false;
  std::string noun_prefixes = "NN,NR,NT";
  GradCheckOptions gradcheck;
};

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_fixed(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string to_text(const std::string& s) { return s; }
std::string to_text(bool b) { return b ? "true" : "false"; }
std::string to_text(double d) { return fmt_double(d); }
template <typename T>
  requires std::is_integral_v<T>
std::string to_text(T v) {
  return std::to_string(v);
}

// Registers options on one subcommand and remembers how to print each
// resolved value.
class Options {
 public:
  explicit Options(CLI::App* app) : app_(app) {}

  template <typename T>
  CLI::Option* add(const std::string& key, T& var, const std::string& help) {
    echo_.emplace_back(key, [&var] { return to_text(var); });
    return app_->add_option("--" + key, var, help);
  }

  CLI::Option* flag(const std::string& key, bool& var, const std::string& help) {
    echo_.emplace_back(key, [&var] { return to_text(var); });
    return app_->add_flag("--" + key, var, help);
  }

  // Applies config file values as option defaults, so flags still win.
  void apply_config(const std::map<std::string, std::string>& values, const std::string& cmd) {
    for (const auto& [key, value] : values) {
      const bool known = std::any_of(echo_.begin(), echo_.end(), [&](const auto& e) { return e.first == key; });
      CLI::Option* opt = known ? app_->get_option_no_throw("--" + key) : nullptr;
      if (opt == nullptr) throw ConfigError("config key '" + key + "' is not an option of '" + cmd + "'");
      try {
        opt->default_val(value);
      } catch (const CLI::Error& e) {
        throw ConfigError("config key '" + key + "': " + e.what());
      }
    }
  }

  std::vector<std::string> resolved() const {
    std::vector<std::string> lines;
    for (const auto& [key, get] : echo_) lines.push_back(key + " = " + get());
    return lines;
  }

 private:
  CLI::App* app_;
  std::vector<std::pair<std::string, std::function<std::string()>>> echo_;
};

std::map<std::string, std::string> read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

std::optional<fs::path> find_config_arg(std::span<const std::string> args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw ConfigError("--config requires a path");
      return fs::path(args[i + 1]);
    }
    if (args[i].starts_with("--config=")) return fs::path(args[i].substr(9));
  }
  return std::nullopt;
}

std::uint64_t seed_from_env() {
  const char* env = std::getenv(kSeedEnv);
  if (env == nullptr || *env == '\0') return 1;
  std::uint64_t v = 0;
  const std::string s(env);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ConfigError(std::string(kSeedEnv) + " is not an unsigned integer: '" + s + "'");
  }
  return v;
}

// Stable across runs and platforms (FNV-1a).
std::uint64_t hash_id(const std::string& id) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void require(const std::string& value, const std::string& flag) {
  if (value.empty()) throw ConfigError("--" + flag + " is required");
}

ScoringOptions scoring_options(const RunConfig& cfg) {
  ScoringOptions s;
  s.noun_prefixes = split_commas(cfg.noun_prefixes);
  if (s.noun_prefixes.empty()) throw ConfigError("--noun-prefixes must name at least one tag prefix");
  s.entity_gate = !cfg.no_entity_gate;
  return s;
}

struct LoadedModel {
  ModelParams model;
  EmbeddingTable table;
};

LoadedModel load_model_and_table(const RunConfig& cfg) {
  require(cfg.model, "model");
  require(cfg.embeddings, "embeddings");
  ModelParams model = load_model(cfg.model);
  EmbeddingTable table = load_embeddings(cfg.embeddings);
  if (table.dim() != model.hyper.dim) {
    throw ShapeError("embedding dimension " + std::to_string(table.dim()) + " does not match model K=" +
                     std::to_string(model.hyper.dim));
  }
  return {std::move(model), std::move(table)};
}

void print_compare(const RunConfig& cfg, const EvalReport& report, std::ostream& out) {
  if (cfg.compare.empty()) return;
  std::ifstream in(cfg.compare);
  if (!in) throw DataError("cannot open report " + cfg.compare);
  const TTestResult r = compare_reports(report, read_report(in));
  out << "t-test t=" << fmt_fixed("%.6f", r.t) << " p=" << fmt_fixed("%.6g", r.p) << " n=" << r.n << '\n';
}

int cmd_permute(const RunConfig& cfg, std::ostream& out) {
  require(cfg.corpus, "corpus");
  require(cfg.out, "out");
  const auto docs = load_corpus(cfg.corpus);
  const fs::path out_dir(cfg.out);
  if (fs::exists(out_dir) && !fs::is_empty(out_dir)) {
    if (!cfg.force) throw ConfigError("output directory " + out_dir.string() + " is not empty (use --force)");
    fs::remove_all(out_dir / kPermutedDir);
    fs::remove(out_dir / kManifestName);
  }
  fs::create_directories(out_dir / kPermutedDir);

  std::vector<ManifestEntry> manifest;
  for (const Document& doc : docs) {
    const auto perms = permute_document(doc, cfg.train.permutations_per_doc,
                                        Rng::derive(cfg.train.seed, hash_id(doc.id)).next());
    for (const Document& p : perms) {
      const fs::path rel = fs::path(kPermutedDir) / (p.id + kDocExtension);
      write_document(p, out_dir / rel);
      manifest.push_back({doc.id, fs::relative(doc.source, out_dir), rel});
    }
  }
  write_manifest(manifest, out_dir / kManifestName);
  out << "documents " << docs.size() << " permutations " << manifest.size() << " manifest "
      << (out_dir / kManifestName).generic_string() << '\n';
  return kSuccess;
}

int cmd_train(const RunConfig& cfg, const std::vector<std::string>& resolved, std::ostream& out) {
  require(cfg.corpus, "corpus");
  require(cfg.embeddings, "embeddings");
  require(cfg.model, "model");
  if (cfg.train.fine_tune_embeddings) require(cfg.embeddings_out, "embeddings-out");

  TrainConfig tc = cfg.train;
  tc.scoring = scoring_options(cfg);
  tc.validate();
  const EmbeddingTable table = load_embeddings(cfg.embeddings);
  if (table.dim() != tc.dim) {
    throw ShapeError("embedding dimension " + std::to_string(table.dim()) + " does not match --dim " +
                     std::to_string(tc.dim));
  }
  const auto docs = load_corpus(cfg.corpus);

  const std::string log_path = cfg.log.empty() ? cfg.model + ".log" : cfg.log;
  std::ofstream log(log_path, std::ios::binary | std::ios::trunc);
  if (!log) throw DataError("cannot write log " + log_path);
  log << "# resolved config\n";
  for (const auto& line : resolved) log << line << '\n';
  log << "documents " << docs.size() << '\n';

  const TrainResult result = train(tc, docs, table, [&](int epoch, double j) {
    log << "epoch " << epoch << " loss " << fmt_double(j) << '\n';
  });
  log << "samples " << result.samples << '\n';

  save_model(result.model, cfg.model);
  if (result.embeddings) save_embeddings(*result.embeddings, cfg.embeddings_out);
  out << "trained " << tc.epochs << " epochs on " << result.samples << " samples";
  if (!result.epoch_loss.empty()) out << ", final loss " << fmt_double(result.epoch_loss.back());
  out << "\nmodel " << cfg.model << '\n';
  return kSuccess;
}

int cmd_score(const RunConfig& cfg, std::ostream& out) {
  require(cfg.corpus, "corpus");
  const auto [model, table] = load_model_and_table(cfg);
  const ScoringOptions opts = scoring_options(cfg);
  for (const Document& doc : load_corpus(cfg.corpus)) {
    out << doc.id << '\t' << fmt_double(doc_log_score(model, table, doc, opts)) << '\n';
  }
  return kSuccess;
}

int cmd_eval_order(const RunConfig& cfg, std::ostream& out) {
  require(cfg.manifest, "manifest");
  const auto [model, table] = load_model_and_table(cfg);
  const ScoringOptions opts = scoring_options(cfg);
  const auto pairs = load_pairs(read_manifest(cfg.manifest));
  const auto report = pairwise_accuracy(
      [&](const Document& d) { return doc_log_score(model, table, d, opts); }, pairs);
  write_report(report, out);
  print_compare(cfg, report, out);
  return kSuccess;
}

int cmd_eval_mt(const RunConfig& cfg, std::ostream& out) {
  require(cfg.ref_dir, "ref-dir");
  require(cfg.sys_dir, "sys-dir");
  const auto [model, table] = load_model_and_table(cfg);
  const ScoringOptions opts = scoring_options(cfg);

  std::map<std::string, Document> refs;
  for (auto& d : load_corpus(cfg.ref_dir)) refs.emplace(d.id, std::move(d));
  std::vector<fs::path> systems;
  for (const auto& e : fs::directory_iterator(cfg.sys_dir)) {
    if (e.is_directory()) systems.push_back(e.path());
  }
  std::sort(systems.begin(), systems.end());
  std::vector<SystemDocument> outputs;
  for (const auto& dir : systems) {
    for (auto& d : load_corpus(dir)) outputs.push_back({d.id, dir.filename().string(), std::move(d)});
  }
  if (outputs.empty()) throw DataError("no system outputs under " + cfg.sys_dir);

  const auto report = pairwise_accuracy(
      [&](const Document& d) { return doc_log_score(model, table, d, opts); }, mt_pairs(refs, outputs));
  write_report(report, out);
  for (const auto& [system, acc] : accuracy_by_negative(report)) {
    out << "system " << system << " accuracy " << fmt_fixed("%.4f", acc) << '\n';
  }
  print_compare(cfg, report, out);
  return kSuccess;
}

int cmd_baseline(const RunConfig& cfg, std::ostream& out) {
  if (cfg.corpus.empty() == cfg.manifest.empty()) {
    throw ConfigError("baseline needs exactly one of --corpus or --manifest");
  }
  using Mode = EntityGraphConfig::Mode;
  std::vector<EntityGraphConfig> variants;
  if (cfg.mode == "all") {
    for (Mode m : {Mode::Unweighted, Mode::Weighted}) {
      for (bool d : {false, true}) variants.push_back({m, d});
    }
  } else if (cfg.mode == "weighted" || cfg.mode == "unweighted") {
    variants.push_back({cfg.mode == "weighted" ? Mode::Weighted : Mode::Unweighted, cfg.discount});
  } else {
    throw ConfigError("--mode must be weighted, unweighted or all");
  }
  const auto prefixes = scoring_options(cfg).noun_prefixes;

  if (!cfg.corpus.empty()) {
    out << "# id";
    for (const auto& v : variants) out << '\t' << to_string(v);
    out << '\n';
    for (const Document& doc : load_corpus(cfg.corpus)) {
      out << doc.id;
      for (const auto& v : variants) out << '\t' << fmt_double(graph_coherence(doc, v, prefixes));
      out << '\n';
    }
    return kSuccess;
  }

  if (variants.size() > 1 && !cfg.compare.empty()) throw ConfigError("--compare needs a single --mode");
  const auto pairs = load_pairs(read_manifest(cfg.manifest));
  for (const auto& v : variants) {
    const auto report =
        pairwise_accuracy([&](const Document& d) { return graph_coherence(d, v, prefixes); }, pairs);
    if (variants.size() == 1) {
      write_report(report, out);
      print_compare(cfg, report, out);
    } else {
      out << "variant " << to_string(v) << " accuracy " << fmt_fixed("%.4f", report.accuracy)
          << " n=" << report.n << '\n';
    }
  }
  return kSuccess;
}

int cmd_gradcheck(const RunConfig& cfg, std::ostream& out) {
  const GradCheckReport report = gradient_check(cfg.gradcheck);
  for (const auto& t : report.tensors) {
    out << "tensor " << t.name << " max_rel_err " << fmt_fixed("%.3e", t.max_rel_error) << " max_abs_err "
        << fmt_fixed("%.3e", t.max_abs_error) << " checked " << t.checked << " failures " << t.failures
        << '\n';
  }
  out << "gradcheck " << (report.passed ? "PASS" : "FAIL") << '\n';
  return report.passed ? kSuccess : kVerificationFailure;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Entity-gated recursive neural coherence model", "coherentia"};
  app.require_subcommand(1);
  std::string config_path;

  std::map<std::string, Options> options;
  auto sub = [&](const std::string& name, const std::string& help) {
    CLI::App* s = app.add_subcommand(name, help);
    s->add_option("--config", config_path, "key = value file; flags override it");
    return &options.emplace(name, Options(s)).first->second;
  };
  auto train_flags = [&](Options* o) {
    o->add("learning-rate", cfg.train.learning_rate, "AdaGrad learning rate");
    o->add("batch-size", cfg.train.batch_size, "minibatch size");
    o->add("hidden", cfg.train.hidden, "hidden units H");
    o->add("dim", cfg.train.dim, "embedding dimension K");
    o->add("window", cfg.train.window, "clique window L");
    o->add("q", cfg.train.q, "L2 regularization weight Q");
    o->add("epochs", cfg.train.epochs, "training epochs");
    o->add("max-perms", cfg.train.permutations_per_doc, "permutations per document for negatives");
    o->add("neg-ratio", cfg.train.negative_ratio, "negatives kept per positive");
    o->flag("fine-tune", cfg.train.fine_tune_embeddings, "update embeddings during training");
  };
  auto scoring_flags = [&](Options* o) {
    o->add("noun-prefixes", cfg.noun_prefixes, "comma-separated POS prefixes marking nouns");
    o->flag("no-entity-gate", cfg.no_entity_gate, "force entity vectors to ones");
  };

  Options* permute = sub("permute", "write permuted corpora and a pair manifest");
  permute->add("corpus", cfg.corpus, "corpus directory");
  permute->add("out", cfg.out, "output directory");
  permute->add("max-perms", cfg.train.permutations_per_doc, "permutations per document");
  permute->add("seed", cfg.train.seed, "random seed");
  permute->flag("force", cfg.force, "overwrite a non-empty output directory");

  Options* trn = sub("train", "train a model");
  trn->add("corpus", cfg.corpus, "training corpus directory");
  trn->add("embeddings", cfg.embeddings, "word vector text file");
  trn->add("model", cfg.model, "output model file");
  trn->add("log", cfg.log, "training log (default: <model>.log)");
  trn->add("embeddings-out", cfg.embeddings_out, "fine-tuned embeddings output");
  trn->add("seed", cfg.train.seed, "random seed");
  train_flags(trn);
  scoring_flags(trn);

  Options* score = sub("score", "print per-document log coherence scores");
  score->add("model", cfg.model, "model file");
  score->add("embeddings", cfg.embeddings, "word vector text file");
  score->add("corpus", cfg.corpus, "corpus directory");
  scoring_flags(score);

  Options* order = sub("eval-order", "sentence-ordering accuracy over a pair manifest");
  order->add("model", cfg.model, "model file");
  order->add("embeddings", cfg.embeddings, "word vector text file");
  order->add("manifest", cfg.manifest, "pair manifest");
  order->add("compare", cfg.compare, "earlier report for a paired t-test");
  scoring_flags(order);

  Options* mt = sub("eval-mt", "reference-vs-system translation accuracy");
  mt->add("model", cfg.model, "model file");
  mt->add("embeddings", cfg.embeddings, "word vector text file");
  mt->add("ref-dir", cfg.ref_dir, "reference corpus directory");
  mt->add("sys-dir", cfg.sys_dir, "one corpus subdirectory per system");
  mt->add("compare", cfg.compare, "earlier report for a paired t-test");
  scoring_flags(mt);

  Options* base = sub("baseline", "entity-graph baseline scores or accuracy");
  base->add("corpus", cfg.corpus, "corpus directory (per-document scores)");
  base->add("manifest", cfg.manifest, "pair manifest (accuracy)");
  base->add("mode", cfg.mode, "weighted, unweighted or all");
  base->flag("discount", cfg.discount, "divide edge weights by sentence distance");
  base->add("compare", cfg.compare, "earlier report for a paired t-test");
  base->add("noun-prefixes", cfg.noun_prefixes, "comma-separated POS prefixes marking nouns");

  Options* gc = sub("gradcheck", "finite-difference gradient verification");
  gc->add("seed", cfg.gradcheck.seed, "random seed");
  gc->add("dim", cfg.gradcheck.dim, "embedding dimension K");
  gc->add("hidden", cfg.gradcheck.hidden, "hidden units H");
  gc->add("window", cfg.gradcheck.window, "clique window L");
  gc->add("instances", cfg.gradcheck.instances, "random instances");
  gc->add("max-leaves", cfg.gradcheck.max_leaves, "maximum tokens per sentence");
  gc->flag("check-embeddings", cfg.gradcheck.embeddings, "also check embedding gradients");
  gc->add("perturb", cfg.gradcheck.perturb, "corrupt one analytic entry (negative control)")->group("");

  std::string command;
  try {
    if (!args.empty()) command = args.front();
    cfg.train.seed = cfg.gradcheck.seed = seed_from_env();
    if (auto path = find_config_arg(args)) {
      auto it = options.find(command);
      if (it == options.end()) throw ConfigError("--config must follow a subcommand");
      it->second.apply_config(read_config_file(*path), command);
    }

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
      app.parse(argv);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kSuccess : kUsageError;
    }

    const auto resolved = options.at(command).resolved();
    for (const auto& line : resolved) err << "# " << line << '\n';

    if (command == "permute") return cmd_permute(cfg, out);
    if (command == "train") return cmd_train(cfg, resolved, out);
    if (command == "score") return cmd_score(cfg, out);
    if (command == "eval-order") return cmd_eval_order(cfg, out);
    if (command == "eval-mt") return cmd_eval_mt(cfg, out);
    if (command == "baseline") return cmd_baseline(cfg, out);
    if (command == "gradcheck") return cmd_gradcheck(cfg, out);
    err << "unknown command '" << command << "'\n";
    return kUsageError;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
}

}  // namespace coherentia::cli
