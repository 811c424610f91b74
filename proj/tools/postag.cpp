// Command-line front end: training (source, target, joint, CRF), tagging,
// evaluation, the lambda sweep and the paired sign test.
//
// Exit codes: 0 success, 1 internal error, 2 usage or input error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "postag/checkpoint.hpp"
#include "postag/config.hpp"
#include "postag/corpus.hpp"
#include "postag/crf.hpp"
#include "postag/evaluation.hpp"
#include "postag/lexicon.hpp"
#include "postag/synthetic.hpp"
#include "postag/training.hpp"
#include "postag/transfer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace postag;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct LexiconOptions {
  std::vector<std::string> vectors;
  std::vector<std::string> subwords;
  int min_n = 3;
  int max_n = 6;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--lexicon", vectors, "Frozen word-vector file (text format); repeatable")
        ->check(CLI::ExistingFile);
    cmd->add_option("--subwords", subwords, "Character n-gram vectors for the lexicon at the same position")
        ->check(CLI::ExistingFile);
    cmd->add_option("--subword-min", min_n, "Shortest n-gram length")->capture_default_str();
    cmd->add_option("--subword-max", max_n, "Longest n-gram length")->capture_default_str();
  }

  std::vector<Lexicon> load() const {
    if (subwords.size() > vectors.size()) throw UsageError("more --subwords files than --lexicon files");
    std::vector<Lexicon> out;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      out.push_back(load_text_vectors(vectors[i]));
      if (i < subwords.size()) out.back().set_subword(load_subword_vectors(subwords[i], min_n, max_n, out.back().dim()));
    }
    return out;
  }

  json digests() const {
    json j = json::array();
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      json e = {{"vectors", file_digest(vectors[i])}};
      if (i < subwords.size()) e["subwords"] = file_digest(subwords[i]);
      j.push_back(e);
    }
    return j;
  }
};

// Options shared by the neural training commands. Precedence: built-in
// defaults, then --config, then --set, then dedicated flags.
struct TrainingOptions {
  std::string config_path;
  std::vector<std::string> set;
  std::optional<std::uint64_t> seed;
  std::optional<double> lr;
  std::optional<int> max_epochs;
  std::optional<int> patience;
  std::optional<double> clip_norm;
  std::vector<std::string> vocab;
  std::string log_path;
  std::string summary_path;
  LexiconOptions lexicons;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key=value configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--set", set, "Override one configuration key (key=value); repeatable");
    cmd->add_option("--seed", seed, "Random seed (default 42)");
    cmd->add_option("--lr", lr, "Adam learning rate");
    cmd->add_option("--max-epochs", max_epochs, "Epoch limit");
    cmd->add_option("--patience", patience, "Epochs without dev improvement before stopping");
    cmd->add_option("--clip-norm", clip_norm, "Global gradient-norm threshold (0 disables)");
    cmd->add_option("--vocab", vocab, "Extra corpus whose words widen the model alphabets; repeatable")
        ->check(CLI::ExistingFile);
    cmd->add_option("--log", log_path, "Write the per-epoch log here");
    cmd->add_option("--summary", summary_path, "Write the key=value training summary here");
    lexicons.add_to(cmd);
  }

  RunConfig resolve() const {
    RunConfig rc;
    if (!config_path.empty()) postag::apply(rc, read_key_values(config_path));
    std::map<std::string, std::string> overrides;
    for (const auto& kv : set) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got '" + kv + "'");
      overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    postag::apply(rc, overrides);
    if (seed) rc.train.seed = *seed;
    if (lr) rc.train.lr = *lr;
    if (max_epochs) rc.train.max_epochs = *max_epochs;
    if (patience) rc.train.patience = *patience;
    if (clip_norm) rc.train.clip_norm = *clip_norm;
    return rc;
  }

  std::vector<Corpus> vocab_corpora() const {
    std::vector<Corpus> out;
    for (const auto& p : vocab) out.push_back(read_conll(p));
    return out;
  }

  json vocab_digests() const {
    json j = json::array();
    for (const auto& p : vocab) j.push_back(file_digest(p));
    return j;
  }
};

json base_manifest(const std::string& command, const RunConfig& rc) {
  return {{"command", command}, {"version", POSTAG_VERSION}, {"seed", rc.train.seed}, {"config", to_json(rc)}};
}

void write_reports(const TrainingOptions& opts, const training::TrainReport& report) {
  if (!opts.log_path.empty()) write_file(opts.log_path, report.log_text());
  if (!opts.summary_path.empty()) write_file(opts.summary_path, report.summary_text());
}

training::TrainOptions with_vocabulary(const std::vector<Corpus>& vocab) {
  training::TrainOptions options;
  for (const auto& c : vocab) options.vocabulary.push_back(&c);
  return options;
}

// Lexicon widths come from the files, so they override whatever the
// configuration says.
tagger::ArchConfig arch_for(const RunConfig& rc, const std::vector<Lexicon>& lexicons) {
  auto arch = rc.arch;
  arch.lexicon_dims.clear();
  for (const auto& l : lexicons) arch.lexicon_dims.push_back(l.dim());
  return arch;
}

struct TrainSourceCommand {
  std::string train;
  std::string dev;
  std::string out;
  TrainingOptions opts;

  void add_to(CLI::App& app) {
    auto* cmd = app.add_subcommand("train-source", "Train a tagger on the source domain");
    cmd->add_option("--train", train, "Training corpus")->required()->check(CLI::ExistingFile);
    cmd->add_option("--dev", dev, "Development corpus for early stopping")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", out, "Checkpoint to write")->required();
    opts.add_to(cmd);
    cmd->callback([this] { run(); });
  }

  void run() {
    auto rc = opts.resolve();
    rc.train.mode = training::Mode::source;
    const auto train_corpus = read_conll(train);
    const auto dev_corpus = read_conll(dev);
    const auto lexicons = opts.lexicons.load();
    const auto vocab = opts.vocab_corpora();
    auto result = training::train(train_corpus, dev_corpus, lexicons, arch_for(rc, lexicons), rc.train, nullptr,
                                  with_vocabulary(vocab));
    result.report.model_path = out;
    auto manifest = base_manifest("train-source", rc);
    manifest["inputs"] = {{"train", file_digest(train)}, {"dev", file_digest(dev)},
                          {"lexicons", opts.lexicons.digests()}, {"vocab", opts.vocab_digests()}};
    manifest["best_epoch"] = result.report.best_epoch;
    transfer::save_checkpoint(out, result.model, manifest);
    write_reports(opts, result.report);
  }
};

struct TrainTargetCommand {
  std::string train;
  std::string dev;
  std::string prior;
  std::string out;
  std::optional<double> lambda;
  TrainingOptions opts;

  void add_to(CLI::App& app) {
    auto* cmd = app.add_subcommand("train-target", "Train a tagger on the target domain with an optional prior");
    cmd->add_option("--train", train, "Training corpus")->required()->check(CLI::ExistingFile);
    cmd->add_option("--dev", dev, "Development corpus for early stopping")->required()->check(CLI::ExistingFile);
    cmd->add_option("--prior", prior, "Source checkpoint whose weights act as the prior")->check(CLI::ExistingFile);
    cmd->add_option("--lambda", lambda, "Penalty strength");
    cmd->add_option("--out", out, "Checkpoint to write")->required();
    opts.add_to(cmd);
    cmd->callback([this] { run(); });
  }

  void run() {
    auto rc = opts.resolve();
    rc.train.mode = training::Mode::target;
    if (lambda) rc.train.lambda = *lambda;
    if (rc.train.lambda > 0.0 && prior.empty()) throw UsageError("--lambda > 0 needs --prior");
    const auto train_corpus = read_conll(train);
    const auto dev_corpus = read_conll(dev);
    const auto lexicons = opts.lexicons.load();
    const auto vocab = opts.vocab_corpora();
    std::optional<tagger::ParamStore> prior_weights;
    if (!prior.empty()) prior_weights = transfer::load_checkpoint(prior);
    auto result = training::train(train_corpus, dev_corpus, lexicons, arch_for(rc, lexicons), rc.train,
                                  prior_weights ? &*prior_weights : nullptr, with_vocabulary(vocab));
    result.report.model_path = out;
    auto manifest = base_manifest("train-target", rc);
    manifest["lambda"] = rc.train.lambda;
    manifest["inputs"] = {{"train", file_digest(train)},
                          {"dev", file_digest(dev)},
                          {"prior", prior.empty() ? json(nullptr) : json(file_digest(prior))},
                          {"lexicons", opts.lexicons.digests()},
                          {"vocab", opts.vocab_digests()}};
    manifest["best_epoch"] = result.report.best_epoch;
    transfer::save_checkpoint(out, result.model, manifest);
    write_reports(opts, result.report);
  }
};

struct TrainJointCommand {
  std::string source;
  std::string target;
  std::string dev;
  std::string out;
  TrainingOptions opts;

  void add_to(CLI::App& app) {
    auto* cmd = app.add_subcommand("train-joint", "Train one tagger on the merged source and target corpora");
    cmd->add_option("--source", source, "Source training corpus")->required()->check(CLI::ExistingFile);
    cmd->add_option("--target", target, "Target training corpus")->required()->check(CLI::ExistingFile);
    cmd->add_option("--dev", dev, "Development corpus for early stopping")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", out, "Checkpoint to write")->required();
    opts.add_to(cmd);
    cmd->callback([this] { run(); });
  }

  void run() {
    auto rc = opts.resolve();
    rc.train.mode = training::Mode::joint;
    rc.train.lambda = 0.0;
    const auto source_corpus = read_conll(source);
    const auto target_corpus = read_conll(target);
    const auto dev_corpus = read_conll(dev);
    const auto lexicons = opts.lexicons.load();
    const auto vocab = opts.vocab_corpora();
    auto result = training::train_joint(source_corpus, target_corpus, dev_corpus, lexicons, arch_for(rc, lexicons),
                                        rc.train, with_vocabulary(vocab));
    result.report.model_path = out;
    auto manifest = base_manifest("train-joint", rc);
    manifest["inputs"] = {{"source", file_digest(source)}, {"target", file_digest(target)},
                          {"dev", file_digest(dev)},       {"lexicons", opts.lexicons.digests()},
                          {"vocab", opts.vocab_digests()}};
    manifest["best_epoch"] = result.report.best_epoch;
    transfer::save_checkpoint(out, result.model, manifest);
    write_reports(opts, result.report);
  }
};

struct TrainCrfCommand {
  std::string train;
  std::string out;
  crf::TrainConfig config;

  void add_to(CLI::App& app) {
    auto* cmd = app.add_subcommand("train-crf", "Train the linear-chain CRF baseline");
    cmd->add_option("--train", train, "Training corpus")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", out, "Model file to write")->required();
    cmd->add_option("--epochs", config.epochs, "Gradient-ascent iterations")->capture_default_str();
    cmd->add_option("--lr", config.learning_rate, "Step size")->capture_default_str();
    cmd->add_option("--l2", config.l2, "L2 weight decay")->capture_default_str();
    cmd->callback([this] { run(); });
  }

  void run() {
    if (config.epochs < 1 || !(config.learning_rate > 0.0) || !(config.l2 >= 0.0))
      throw UsageError("train-crf needs epochs >= 1, lr > 0 and l2 >= 0");
    crf::save(out, crf::train(read_conll(train), config));
  }
};

struct TagCommand {
  std::string model;
  std::string input;
  std::string output;
  LexiconOptions lexicons;

  void add_to(CLI::App& app) {
    auto* cmd = app.add_subcommand("tag", "Tag a corpus with a tagger or CRF model");
    cmd->add_option("--model", model, "Model file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--input", input, "Corpus to tag (one or two columns)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--output", output, "Where to write the tagged corpus")->required();
    lexicons.add_to(cmd);
    cmd->callback([this] { run(); });
  }

  void run() {
    const auto checkpoint = read_checkpoint(model);
    const auto corpus = read_conll(input);
    Predictions predictions;
    if (checkpoint.kind == crf::kCheckpointKind) {
      const auto m = crf::load(model);
      predictions = {m.tags(), crf::tag(m, corpus)};
    } else if (checkpoint.kind == transfer::kTaggerKind) {
      const auto params = transfer::from_checkpoint(checkpoint);
      const auto lex = lexicons.load();
      predictions = {params.alphabets.tags, tagger::tag_corpus(params, corpus, lex)};
    } else {
      throw UsageError("unknown model kind '" + checkpoint.kind + "'");
    }
    write_conll(output, corpus, &predictions);
  }
};

struct EvaluateCommand {
  std::string gold;
  std::string pred;
  std::string report;
  std::string per_tag;
  std::string confusion;
  std::size_t top_k = 6;

  void add_to(CLI::App& app) {
    auto* cmd = app.add_subcommand("evaluate", "Score predictions against a gold corpus");
    cmd->add_option("--gold", gold, "Gold corpus")->required()->check(CLI::ExistingFile);
    cmd->add_option("--pred", pred, "Predicted corpus")->required()->check(CLI::ExistingFile);
    cmd->add_option("--report", report, "Text report to write")->required();
    cmd->add_option("--per-tag-csv", per_tag, "Per-tag error CSV to write");
    cmd->add_option("--confusion-csv", confusion, "Confusion-pair CSV to write");
    cmd->add_option("--top-k", top_k, "Tags listed in the report")->capture_default_str();
    cmd->callback([this] { run(); });
  }

  void run() {
    const auto result = evaluation::evaluate(read_conll(gold), read_conll(pred));
    write_file(report, evaluation::report_text(result, top_k));
    if (!per_tag.empty()) write_file(per_tag, evaluation::per_tag_csv(result));
    if (!confusion.empty()) write_file(confusion, evaluation::confusion_csv(result));
  }
};

std::vector<double> parse_lambdas(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw UsageError("bad lambda '" + item + "'");
    }
    if (used != item.size()) throw UsageError("bad lambda '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("--lambdas is empty");
  return out;
}

struct SweepCommand {
  std::string train;
  std::string dev;
  std::string test;
  std::string prior;
  std::string lambdas = "0,0.0001,0.001,0.01,0.1";
  std::string out;
  TrainingOptions opts;

  void add_to(CLI::App& app) {
    auto* cmd = app.add_subcommand("sweep-lambda", "Train one target model per lambda and tabulate accuracies");
    cmd->add_option("--train", train, "Target training corpus")->required()->check(CLI::ExistingFile);
    cmd->add_option("--dev", dev, "Target development corpus")->required()->check(CLI::ExistingFile);
    cmd->add_option("--test", test, "Target test corpus")->required()->check(CLI::ExistingFile);
    cmd->add_option("--prior", prior, "Source checkpoint")->required()->check(CLI::ExistingFile);
    cmd->add_option("--lambdas", lambdas, "Comma-separated, strictly increasing")->capture_default_str();
    cmd->add_option("--out", out, "CSV to write")->required();
    opts.add_to(cmd);
    cmd->callback([this] { run(); });
  }

  void run() {
    auto rc = opts.resolve();
    rc.train.mode = training::Mode::target;
    const auto values = parse_lambdas(lambdas);
    const auto train_corpus = read_conll(train);
    const auto dev_corpus = read_conll(dev);
    const auto test_corpus = read_conll(test);
    const auto lexicons = opts.lexicons.load();
    const auto vocab = opts.vocab_corpora();
    const auto prior_weights = transfer::load_checkpoint(prior);
    evaluation::SweepSetup setup;
    setup.train = &train_corpus;
    setup.dev = &dev_corpus;
    setup.test = &test_corpus;
    setup.lexicons = lexicons;
    setup.arch = arch_for(rc, lexicons);
    setup.config = rc.train;
    setup.prior = &prior_weights;
    setup.options = with_vocabulary(vocab);
    write_file(out, evaluation::sweep_lambda(setup, values).to_csv());
  }
};

struct CompareCommand {
  std::string gold;
  std::string a;
  std::string b;
  std::string output;

  void add_to(CLI::App& app) {
    auto* cmd = app.add_subcommand("compare", "Exact sign test between two systems' predictions");
    cmd->add_option("--gold", gold, "Gold corpus")->required()->check(CLI::ExistingFile);
    cmd->add_option("--a", a, "Predictions of system A")->required()->check(CLI::ExistingFile);
    cmd->add_option("--b", b, "Predictions of system B")->required()->check(CLI::ExistingFile);
    cmd->add_option("--output", output, "Write the result here instead of standard output");
    cmd->callback([this] { run(); });
  }

  void run() {
    const auto gold_corpus = read_conll(gold);
    const auto result = evaluation::binomial_test(evaluation::tag_strings(read_conll(a)),
                                                  evaluation::tag_strings(read_conll(b)), gold_corpus);
    const std::string text = "a_only=" + std::to_string(result.a_only) + "\nb_only=" + std::to_string(result.b_only) +
                             "\np_value=" + format_double(result.p_value) + "\n";
    if (output.empty()) {
      std::cout << text;
    } else {
      write_file(output, text);
    }
  }
};

struct MakeFixtureCommand {
  std::uint64_t seed = 42;
  std::string dir;

  void add_to(CLI::App& app) {
    auto* cmd = app.add_subcommand("make-fixture", "Write the synthetic two-domain corpora");
    cmd->add_option("--seed", seed, "Generator seed")->capture_default_str();
    cmd->add_option("--out-dir", dir, "Existing directory for the five corpus files")
        ->required()
        ->check(CLI::ExistingDirectory);
    cmd->callback([this] { run(); });
  }

  void run() {
    const auto f = synthetic::make_two_domain_fixture(seed);
    const fs::path base(dir);
    write_conll(base / "source_train.conll", f.source_train);
    write_conll(base / "source_dev.conll", f.source_dev);
    write_conll(base / "target_train.conll", f.target_train);
    write_conll(base / "target_dev.conll", f.target_dev);
    write_conll(base / "target_test.conll", f.target_test);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"POS tagging with prior-weight domain adaptation"};
  app.set_version_flag("--version", std::string(POSTAG_VERSION));
  app.require_subcommand(1);

  TrainSourceCommand train_source;
  TrainTargetCommand train_target;
  TrainJointCommand train_joint;
  TrainCrfCommand train_crf;
  TagCommand tag;
  EvaluateCommand evaluate;
  SweepCommand sweep;
  CompareCommand compare;
  MakeFixtureCommand make_fixture;
  train_source.add_to(app);
  train_target.add_to(app);
  train_joint.add_to(app);
  train_crf.add_to(app);
  tag.add_to(app);
  evaluate.add_to(app);
  sweep.add_to(app);
  compare.add_to(app);
  make_fixture.add_to(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const UsageError& e) {
    std::cerr << "postag: " << e.what() << "\n";
    return 2;
  } catch (const InputError& e) {
    std::cerr << "postag: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "postag: " << e.what() << "\n";
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << "postag: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "postag: internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
