// Acceptance suite: runs the twelve acceptance criteria and prints one
// PASS/FAIL line per criterion. Exit status is 0 only when all pass.
//
// usage: acceptance <path to postag executable> [criterion numbers...]

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "postag/checkpoint.hpp"
#include "postag/crf.hpp"
#include "postag/evaluation.hpp"
#include "postag/synthetic.hpp"
#include "postag/tagger.hpp"
#include "postag/training.hpp"
#include "postag/transfer.hpp"

namespace fs = std::filesystem;
using namespace postag;

namespace {

// Tolerances and budgets, one per criterion where applicable.
constexpr double kGradientTolerance = 1e-4;      // 1: max relative error
constexpr double kGradientBudgetSeconds = 120;   // 1
constexpr int kGradientConfigs = 50;             // 1
constexpr double kPartitionTolerance = 1e-10;    // 2: absolute
constexpr double kCrfBudgetSeconds = 60;         // 2
constexpr int kCrfInstances = 200;               // 2
constexpr double kPenaltyValueTolerance = 1e-15; // 3: relative, closed-form values
constexpr double kPenaltyFdTolerance = 1e-6;     // 3: relative
constexpr int kTransferSeeds = 5;                // 5
constexpr int kTransferWinsRequired = 4;         // 5
constexpr double kTransferBudgetSeconds = 900;   // 5
constexpr int kOverfitTaggerEpochs = 100;        // 6
constexpr int kOverfitCrfEpochs = 50;            // 6
constexpr double kDropoutRate = 0.75;            // 9
constexpr std::size_t kDropoutElements = 10000;  // 9
constexpr double kDropoutSigmas = 3.0;           // 9
constexpr double kSignTestTolerance = 1e-12;     // 11: relative

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool close_relative(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

Corpus random_corpus(Rng& rng, std::size_t sentences, std::size_t max_len, int n_tags) {
  static const char* pool[] = {"Haus", "das", "#tag", "@user", "lol", "2x", "Über", "gehen", "http://t.co", "!", "ja"};
  std::ostringstream text;
  for (std::size_t s = 0; s < sentences; ++s) {
    const auto len = 1 + rng.below(max_len);
    for (std::uint64_t t = 0; t < len; ++t)
      text << pool[rng.below(std::size(pool))] << "\tT" << rng.below(static_cast<std::uint64_t>(n_tags)) << "\n";
    text << "\n";
  }
  std::istringstream in(text.str());
  return parse_conll(in, "random");
}

tagger::ArchConfig small_arch(double dropout) {
  tagger::ArchConfig a;
  a.word_emb_dim = 16;
  a.char_emb_dim = 8;
  a.char_hidden = 8;
  a.feat_emb_dim = 8;
  a.lstm_hidden = 16;
  a.dropout_lstm = dropout;
  a.dropout_char = dropout;
  a.dropout_input = dropout;
  return a;
}

// 1. Gradients of cross-entropy plus penalty against central differences.
Outcome gradient_fidelity() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(1001);
  double worst = 0.0;
  for (int config = 0; config < kGradientConfigs; ++config) {
    const int n_tags = 2 + static_cast<int>(rng.below(4));
    auto dim = [&] { return 1 + static_cast<int>(rng.below(8)); };
    tagger::ArchConfig arch;
    arch.word_emb_dim = dim();
    arch.char_emb_dim = dim();
    arch.char_hidden = dim();
    arch.feat_emb_dim = dim();
    arch.lstm_hidden = dim();
    arch.dropout_lstm = rng.uniform(0.0, 0.5);
    arch.dropout_char = rng.uniform(0.0, 0.5);
    arch.dropout_input = rng.uniform(0.0, 0.5);
    std::vector<Lexicon> lexicons;
    if (rng.bernoulli(0.5)) {
      const int d = dim();
      std::unordered_map<std::string, std::vector<double>> rows;
      for (const char* w : {"haus", "das", "ja"}) {
        std::vector<double> v;
        for (int i = 0; i < d; ++i) v.push_back(rng.uniform(-1, 1));
        rows.emplace(w, v);
      }
      lexicons.emplace_back(d, rows);
      arch.lexicon_dims = {d};
    }
    const auto target = random_corpus(rng, 3, 5, n_tags);
    const auto source = random_corpus(rng, 3, 5, n_tags);
    auto params = tagger::init_params(arch, tagger::build_alphabets(target), rng.next());
    const auto prior = tagger::init_params(arch, tagger::build_alphabets(source), rng.next());
    const auto aligned = transfer::align_prior(prior, params);
    const double lambda = std::pow(10.0, rng.uniform(-3.0, 0.0));
    const auto& sentence = target.sentences[0];
    const auto enc = tagger::encode_sentence(params, sentence, lexicons);
    const auto gold = tagger::gold_indices(params, sentence, target.tagset);
    const bool train = rng.bernoulli(0.5);
    const auto dropout_seed = rng.next();

    auto grads = params.tensors.zeros_like();
    {
      Rng r(dropout_seed);
      tagger::loss(params, enc, gold, train, r, &grads);
      transfer::penalty(params.tensors, aligned, lambda, &grads);
    }
    const auto f = [&] {
      Rng r(dropout_seed);
      return tagger::loss(params, enc, gold, train, r) + transfer::penalty(params.tensors, aligned, lambda);
    };
    // R_W adds an offset of O(10) to the loss while many gradients are
    // O(1e-6), so the difference uses the fourth-order stencil.
    for (auto& e : params.tensors)
      for (std::size_t i = 0; i < e.tensor.size(); ++i)
        worst = std::max(worst, oracle::relative_error(grads.at(e.name)[i], oracle::central_difference4(f, e.tensor[i])));
  }
  const double elapsed = seconds_since(t0);
  return {worst < kGradientTolerance && elapsed < kGradientBudgetSeconds,
          fmt("max relative error %.3g over %d configs (< %.0e), %.1fs (< %.0fs)", worst, kGradientConfigs,
              kGradientTolerance, elapsed, kGradientBudgetSeconds)};
}

// 2. CRF partition function and Viterbi against exhaustive enumeration.
Outcome crf_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(2002);
  double worst = 0.0;
  int viterbi_mismatches = 0;
  for (int trial = 0; trial < kCrfInstances; ++trial) {
    const int K = 1 + static_cast<int>(rng.below(4));
    const int F = 1 + static_cast<int>(rng.below(5));
    std::vector<std::string> tags;
    std::vector<std::string> features;
    for (int k = 0; k < K; ++k) tags.push_back("T" + std::to_string(k));
    for (int f = 0; f < F; ++f) features.push_back("f" + std::to_string(f));
    crf::Model m(TagSet(tags), features);
    // Every other instance uses integer weights, which produce exact ties.
    const bool ties = trial % 2 == 1;
    for (auto& w : m.weights()) w = ties ? static_cast<double>(rng.below(3)) - 1.0 : rng.uniform(-2.0, 2.0);
    crf::Sequence seq;
    const auto length = 1 + rng.below(5);
    for (std::uint64_t t = 0; t < length; ++t) {
      std::vector<int> active;
      for (int f = 0; f < F; ++f)
        if (rng.bernoulli(0.4)) active.push_back(f);
      seq.features.push_back(active);
    }
    worst = std::max(worst, std::abs(crf::log_partition(m, seq) - oracle::brute_log_partition(m, seq)));
    if (crf::viterbi(m, seq) != oracle::brute_argmax(m, seq)) ++viterbi_mismatches;
  }
  const double elapsed = seconds_since(t0);
  return {worst <= kPartitionTolerance && viterbi_mismatches == 0 && elapsed < kCrfBudgetSeconds,
          fmt("%d instances: max |logZ - brute| %.3g (<= %.0e), viterbi mismatches %d, %.2fs (< %.0fs)",
              kCrfInstances, worst, kPartitionTolerance, viterbi_mismatches, elapsed, kCrfBudgetSeconds)};
}

// 3. Penalty algebra.
Outcome penalty_algebra() {
  bool ok = true;
  std::string notes;

  TensorMap w;
  w.add("w", ad::Tensor::row_vector({1.0, 2.0}));
  transfer::AlignedPrior prior;
  prior.values.add("w", ad::Tensor::row_vector({0.0, 0.0}));
  prior.mask.add("w", ad::Tensor::row_vector({1.0, 1.0}));
  auto grads = w.zeros_like();
  const double r = transfer::penalty(w, prior, 0.001, &grads);
  const bool example = close_relative(r, 0.005, kPenaltyValueTolerance) &&
                       close_relative(grads.at("w")[0], 0.002, kPenaltyValueTolerance) &&
                       close_relative(grads.at("w")[1], 0.004, kPenaltyValueTolerance);
  ok = ok && example;
  notes += fmt("R=%.17g grad=(%.17g, %.17g)", r, grads.at("w")[0], grads.at("w")[1]);

  const auto corpus = read_conll(fixture::data("five.conll"));
  auto params = tagger::init_params(small_arch(0.0), tagger::build_alphabets(corpus), 1);
  const auto source = tagger::init_params(small_arch(0.0), tagger::build_alphabets(corpus), 2);
  const auto at_prior = transfer::align_prior(params, params);
  auto g0 = params.tensors.zeros_like();
  const bool zero_at_prior = transfer::penalty(params.tensors, at_prior, 0.5, &g0) == 0.0;
  bool zero_grad_at_prior = true;
  for (const auto& e : g0)
    for (double v : e.tensor.data()) zero_grad_at_prior = zero_grad_at_prior && v == 0.0;
  const auto aligned = transfer::align_prior(source, params);
  auto gl = params.tensors.zeros_like();
  const bool zero_at_lambda0 = transfer::penalty(params.tensors, aligned, 0.0, &gl) == 0.0;
  bool zero_grad_lambda0 = true;
  for (const auto& e : gl)
    for (double v : e.tensor.data()) zero_grad_lambda0 = zero_grad_lambda0 && v == 0.0;
  ok = ok && zero_at_prior && zero_grad_at_prior && zero_at_lambda0 && zero_grad_lambda0;
  notes += fmt(", R(W=prior)=0: %s, R(lambda=0)=0: %s", zero_at_prior && zero_grad_at_prior ? "yes" : "no",
               zero_at_lambda0 && zero_grad_lambda0 ? "yes" : "no");

  // R is quadratic, so a central difference with a moderate step is exact up
  // to rounding.
  const double lambda = 0.001;
  auto g = params.tensors.zeros_like();
  transfer::penalty(params.tensors, aligned, lambda, &g);
  double worst = 0;
  for (auto& e : params.tensors) {
    for (std::size_t i = 0; i < e.tensor.size(); ++i) {
      const double numeric = oracle::central_difference(
          [&] { return transfer::penalty(params.tensors, aligned, lambda); }, e.tensor[i], 1e-3);
      worst = std::max(worst, oracle::relative_error(g.at(e.name)[i], numeric));
    }
  }
  ok = ok && worst < kPenaltyFdTolerance;
  notes += fmt(", FD max relative error %.3g (< %.0e)", worst, kPenaltyFdTolerance);
  return {ok, notes};
}

// 4. lambda = 0 with a prior is bit-identical to training without one.
Outcome lambda_zero_collapse() {
  const auto f = synthetic::make_two_domain_fixture(11);
  training::TrainConfig sc;
  sc.max_epochs = 1;
  const auto source = training::train(f.source_train, f.source_dev, {}, small_arch(0.2), sc);
  training::TrainConfig tc;
  tc.max_epochs = 5;
  tc.mode = training::Mode::target;
  tc.lambda = 0.0;
  training::TrainOptions options;
  options.vocabulary = {&f.source_train};
  const auto with_prior =
      training::train(f.target_train, f.target_dev, {}, small_arch(0.2), tc, &source.model, options);
  const auto without = training::train(f.target_train, f.target_dev, {}, small_arch(0.2), tc, nullptr, options);
  const bool weights = with_prior.model.tensors.bitwise_equal(without.model.tensors);
  const bool logs = with_prior.report.log_text() == without.report.log_text();
  return {weights && logs, fmt("weights bit-identical: %s, epoch logs identical: %s (%zu epochs)",
                               weights ? "yes" : "no", logs ? "yes" : "no", with_prior.report.epochs.size())};
}

// 5. Synthetic two-domain transfer.
Outcome synthetic_transfer() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> lambdas = {0.0, 1e-4, 1e-3, 1e-2, 0.1};
  int wins = 0;
  std::string notes;
  for (int seed = 1; seed <= kTransferSeeds; ++seed) {
    const auto f = synthetic::make_two_domain_fixture(static_cast<std::uint64_t>(seed));
    training::TrainConfig sc;
    sc.max_epochs = 8;
    sc.patience = 2;
    sc.seed = static_cast<std::uint64_t>(seed);
    const auto source = training::train(f.source_train, f.source_dev, {}, small_arch(0.2), sc);

    evaluation::SweepSetup setup;
    setup.train = &f.target_train;
    setup.dev = &f.target_dev;
    setup.test = &f.target_test;
    setup.arch = small_arch(0.2);
    setup.config.max_epochs = 40;
    setup.config.patience = 5;
    setup.config.seed = static_cast<std::uint64_t>(seed);
    setup.config.mode = training::Mode::target;
    setup.prior = &source.model;
    setup.options.vocabulary = {&f.source_train};
    const auto sweep = evaluation::sweep_lambda(setup, lambdas);
    const auto& best = sweep.points[sweep.best_index()];
    const auto& zero = sweep.points.front();
    const bool win = best.lambda > 0.0 && best.test_accuracy > zero.test_accuracy;
    wins += win ? 1 : 0;
    notes += fmt("\n    seed %d: best lambda %g, test %.3f vs lambda=0 %.3f; test by lambda:", seed, best.lambda,
                 best.test_accuracy, zero.test_accuracy);
    for (const auto& p : sweep.points) notes += fmt(" %.3f", p.test_accuracy);
  }
  const double elapsed = seconds_since(t0);
  return {wins >= kTransferWinsRequired && elapsed < kTransferBudgetSeconds,
          fmt("%d/%d seeds improve with the selected lambda > 0 (need %d), %.0fs (< %.0fs)", wins, kTransferSeeds,
              kTransferWinsRequired, elapsed, kTransferBudgetSeconds) +
              notes};
}

// 6. Overfit sanity on the five-sentence fixture.
Outcome overfit() {
  const auto corpus = read_conll(fixture::data("five.conll"));
  training::TrainConfig config;
  config.max_epochs = kOverfitTaggerEpochs;
  config.patience = kOverfitTaggerEpochs;
  int reached = 0;
  training::TrainOptions options;
  options.on_epoch = [&](const training::EpochRecord& r, const tagger::ParamStore&) {
    if (reached == 0 && r.dev_accuracy == 1.0) reached = r.epoch;
  };
  // Default architecture, including the default dropout rates.
  const auto result = training::train(corpus, corpus, {}, tagger::ArchConfig{}, config, nullptr, options);
  const double tagger_acc = training::accuracy(result.model, corpus, {});

  const auto model = crf::train(corpus, {.epochs = kOverfitCrfEpochs});
  const auto predicted = crf::tag(model, corpus);
  evaluation::TagStrings strings;
  for (const auto& s : predicted) {
    strings.emplace_back();
    for (int t : s) strings.back().push_back(model.tags().tag(t));
  }
  const double crf_acc = evaluation::evaluate(corpus, strings).accuracy;
  return {reached >= 1 && tagger_acc == 1.0 && crf_acc == 1.0,
          fmt("tagger 100%% at epoch %d (<= %d), returned model %.3f; CRF after %d epochs %.3f", reached,
              kOverfitTaggerEpochs, tagger_acc, kOverfitCrfEpochs, crf_acc)};
}

// 7. Forget-gate biases are exactly 1 after init, all other biases 0.
Outcome forget_gate_init() {
  const auto corpus = read_conll(fixture::data("five.conll"));
  std::size_t checked = 0;
  std::size_t wrong = 0;
  std::vector<tagger::ArchConfig> archs = {tagger::ArchConfig{}, small_arch(0.5)};
  archs.back().char_hidden = 3;
  for (const auto& arch : archs) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto p = tagger::init_params(arch, tagger::build_alphabets(corpus), seed);
      for (const auto& name : tagger::lstm_bias_names()) {
        const auto& b = p.tensors.at(name);
        const std::size_t h = b.size() / 4;
        for (std::size_t i = 0; i < b.size(); ++i) {
          const bool forget = i / h == static_cast<std::size_t>(tagger::Gate::forget);
          ++checked;
          if (b[i] != (forget ? 1.0 : 0.0)) ++wrong;
        }
      }
      for (double v : p.tensors.at("output/b").data()) {
        ++checked;
        if (v != 0.0) ++wrong;
      }
    }
  }
  return {wrong == 0, fmt("%zu bias entries checked, %zu wrong", checked, wrong)};
}

// 8. Checkpoint round trip and corruption detection.
Outcome checkpoint_round_trip() {
  const auto corpus = read_conll(fixture::data("five.conll"));
  auto arch = tagger::ArchConfig{};
  arch.lexicon_dims = {3};
  const auto params = tagger::init_params(arch, tagger::build_alphabets(corpus), 8);
  const auto path = fixture::temp("acceptance_round_trip.ckpt");
  transfer::save_checkpoint(path, params, {{"note", "round trip"}});
  const auto loaded = transfer::load_checkpoint(path);
  const bool exact =
      loaded.tensors.bitwise_equal(params.tensors) && loaded.alphabets == params.alphabets && loaded.arch == params.arch;

  const auto crf_model = crf::train(corpus, {.epochs = 5});
  const auto crf_path = fixture::temp("acceptance_round_trip.crf");
  crf::save(crf_path, crf_model);
  const auto crf_loaded = crf::load(crf_path);
  const bool crf_exact =
      crf_loaded.tags() == crf_model.tags() && crf_loaded.feature_names() == crf_model.feature_names() &&
      std::memcmp(crf_loaded.weights().data(), crf_model.weights().data(), crf_model.weights().size() * 8) == 0;

  // Every byte of a small checkpoint, each with several flip patterns.
  auto small = small_arch(0.1);
  small.word_emb_dim = 2;
  small.char_emb_dim = 2;
  small.char_hidden = 2;
  small.feat_emb_dim = 2;
  small.lstm_hidden = 2;
  const auto bytes = serialize_checkpoint(
      transfer::to_checkpoint(tagger::init_params(small, tagger::build_alphabets(corpus), 9)));
  std::size_t trials = 0;
  std::size_t undetected = 0;
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    for (const unsigned char mask : {0x01, 0x20, 0x80, 0xFF}) {
      std::string corrupt = bytes;
      corrupt[i] = static_cast<char>(static_cast<unsigned char>(corrupt[i]) ^ mask);
      ++trials;
      try {
        transfer::from_checkpoint(deserialize_checkpoint(corrupt));
        ++undetected;
      } catch (const CheckpointError&) {
      }
    }
  }
  return {exact && crf_exact && undetected == 0,
          fmt("tagger exact: %s, CRF exact: %s, %zu single-byte corruptions, %zu undetected", exact ? "yes" : "no",
              crf_exact ? "yes" : "no", trials, undetected)};
}

// 9. Dropout contract.
Outcome dropout_contract() {
  Rng rng(42);
  ad::Tape tape;
  ad::Tensor x({kDropoutElements}, 0.0);
  for (auto& v : x.data()) v = rng.uniform(0.5, 1.5);
  const auto v = tape.constant(x);
  const bool p0 = tape.value(tape.dropout(v, 0.0, true, rng)).bitwise_equal(x);
  const bool eval = tape.value(tape.dropout(v, kDropoutRate, false, rng)).bitwise_equal(x);
  const auto& out = tape.value(tape.dropout(v, kDropoutRate, true, rng));
  std::size_t survivors = 0;
  bool scaled = true;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] != 0.0) {
      ++survivors;
      scaled = scaled && out[i] == x[i] / (1.0 - kDropoutRate);
    }
  }
  const double n = static_cast<double>(kDropoutElements);
  const double keep = 1.0 - kDropoutRate;
  const double sd = std::sqrt(n * keep * (1.0 - keep));
  const double z = (static_cast<double>(survivors) - n * keep) / sd;

  // The tagger's eval path must not depend on the RNG either.
  const auto corpus = read_conll(fixture::data("five.conll"));
  const auto params = tagger::init_params(tagger::ArchConfig{}, tagger::build_alphabets(corpus), 5);
  const auto enc = tagger::encode_sentence(params, corpus.sentences[0], {});
  Rng a(1);
  Rng b(2);
  const bool tagger_eval =
      tagger::forward_tagger(params, enc, false, a).bitwise_equal(tagger::forward_tagger(params, enc, false, b));
  return {p0 && eval && scaled && std::abs(z) <= kDropoutSigmas && tagger_eval,
          fmt("p=0 identity: %s, eval identity: %s, survivors %zu/%zu (z = %.2f, |z| <= %.0f), survivors scaled "
              "by 1/(1-p): %s, tagger eval path RNG-free: %s",
              p0 ? "yes" : "no", eval ? "yes" : "no", survivors, kDropoutElements, z, kDropoutSigmas,
              scaled ? "yes" : "no", tagger_eval ? "yes" : "no")};
}

// 10. Early stopping.
Outcome early_stopping() {
  const auto corpus = read_conll(fixture::data("five.conll"));
  bool ok = true;
  std::string notes;
  // Scripted dev accuracy with a dip after epoch 2.
  const std::vector<double> scores = {0.4, 0.7, 0.5, 0.6, 0.69, 0.65, 0.9};
  for (const int patience : {1, 2, 3, 4, 5}) {
    training::TrainConfig config;
    config.max_epochs = static_cast<int>(scores.size());
    config.patience = patience;
    training::TrainOptions options;
    options.dev_score = [&](const tagger::ParamStore&, int epoch) { return scores[static_cast<std::size_t>(epoch - 1)]; };
    std::vector<TensorMap> snapshots;
    options.on_epoch = [&](const training::EpochRecord&, const tagger::ParamStore& p) { snapshots.push_back(p.tensors); };
    const auto r = training::train(corpus, corpus, {}, small_arch(0.2), config, nullptr, options);
    const int run = static_cast<int>(r.report.epochs.size());
    const int expected_best = patience <= 4 ? 2 : 7;
    const bool good = run - r.report.best_epoch <= patience && r.report.best_epoch == expected_best &&
                      r.model.tensors.bitwise_equal(snapshots[static_cast<std::size_t>(r.report.best_epoch - 1)]);
    ok = ok && good;
    notes += fmt("p=%d: best %d, ran %d; ", patience, r.report.best_epoch, run);
  }
  // Real dev accuracy on the synthetic target data.
  const auto f = synthetic::make_two_domain_fixture(21);
  training::TrainConfig config;
  config.max_epochs = 30;
  config.patience = 2;
  std::vector<TensorMap> snapshots;
  training::TrainOptions options;
  options.on_epoch = [&](const training::EpochRecord&, const tagger::ParamStore& p) { snapshots.push_back(p.tensors); };
  const auto r = training::train(f.target_train, f.target_dev, {}, small_arch(0.2), config, nullptr, options);
  double best = 0;
  for (const auto& e : r.report.epochs) best = std::max(best, e.dev_accuracy);
  const bool real = static_cast<int>(r.report.epochs.size()) - r.report.best_epoch <= config.patience &&
                    r.report.best_dev_accuracy == best &&
                    r.model.tensors.bitwise_equal(snapshots[static_cast<std::size_t>(r.report.best_epoch - 1)]);
  ok = ok && real;
  notes += fmt("real dev run: best %d, ran %zu, patience %d", r.report.best_epoch, r.report.epochs.size(),
               config.patience);
  return {ok, notes};
}

// 11. Sign test closed forms.
Outcome sign_test_forms() {
  const auto gold = read_conll(fixture::data("five.conll"));
  const auto same = evaluation::tag_strings(gold);
  const double identical = evaluation::binomial_test(same, same, gold).p_value;
  const double ten = evaluation::sign_test(10, 0);
  const double eight_two = evaluation::sign_test(8, 2);
  const bool ok = identical == 1.0 && close_relative(ten, 2.0 * std::ldexp(1.0, -10), kSignTestTolerance) &&
                  close_relative(eight_two, 0.109375, kSignTestTolerance) &&
                  close_relative(eight_two, oracle::exact_sign_test(8, 2), kSignTestTolerance) &&
                  evaluation::sign_test(2, 8) == eight_two;
  return {ok, fmt("identical p=%.17g, 10-0 p=%.17g, 8-2 p=%.17g", identical, ten, eight_two)};
}

// 12. Every CLI command, run twice from identical inputs, writes identical
// bytes.
Outcome cli_reproducibility(const std::string& cli) {
  const std::vector<std::string> steps = {
      "make-fixture --seed 5 --out-dir .",
      "train-source --train source_train.conll --dev source_dev.conll --config small.cfg --out src.ckpt "
      "--log src.log --summary src.sum",
      "train-target --train target_train.conll --dev target_dev.conll --config small.cfg --prior src.ckpt "
      "--lambda 0.001 --vocab source_train.conll --out tgt.ckpt --log tgt.log --summary tgt.sum",
      "train-joint --source five.conll --target target_train.conll --dev target_dev.conll --config small.cfg "
      "--out joint.ckpt --summary joint.sum",
      "train-crf --train target_train.conll --out crf.model --epochs 20",
      "tag --model tgt.ckpt --input target_test.conll --output tgt.pred",
      "tag --model crf.model --input target_test.conll --output crf.pred",
      "evaluate --gold target_test.conll --pred tgt.pred --report tgt.report --per-tag-csv tgt.csv "
      "--confusion-csv tgt.confusion",
      "compare --gold target_test.conll --a tgt.pred --b crf.pred --output compare.txt",
      "sweep-lambda --train target_train.conll --dev target_dev.conll --test target_test.conll --prior src.ckpt "
      "--config small.cfg --lambdas 0,0.01 --vocab source_train.conll --out sweep.csv",
  };
  const std::string config =
      "word_emb_dim=8\nchar_emb_dim=4\nchar_hidden=4\nfeat_emb_dim=4\nlstm_hidden=8\n"
      "dropout_lstm=0.2\ndropout_char=0.2\ndropout_input=0.2\nmax_epochs=3\npatience=2\n";
  std::vector<fs::path> dirs;
  for (const char* name : {"acceptance_cli_a", "acceptance_cli_b"}) {
    const auto dir = fixture::temp(name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    fs::copy_file(fixture::data("five.conll"), dir / "five.conll");
    write_file(dir / "small.cfg", config);
    for (const auto& step : steps) {
      const std::string cmd = "cd '" + dir.string() + "' && '" + cli + "' " + step + " >/dev/null 2>&1";
      const int status = std::system(cmd.c_str());
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return {false, "command failed: " + step};
    }
    dirs.push_back(dir);
  }
  std::set<std::string> names;
  for (const auto& e : fs::directory_iterator(dirs[0])) names.insert(e.path().filename().string());
  std::set<std::string> other;
  for (const auto& e : fs::directory_iterator(dirs[1])) other.insert(e.path().filename().string());
  std::size_t differing = 0;
  std::string which;
  for (const auto& n : names) {
    if (!other.count(n) || read_file(dirs[0] / n) != read_file(dirs[1] / n)) {
      ++differing;
      which += " " + n;
    }
  }
  const bool ok = names == other && differing == 0;
  return {ok, fmt("%zu commands, %zu output files compared, %zu differ", steps.size(), names.size(), differing) + which};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <postag executable> [criterion...]\n", argv[0]);
    return 2;
  }
  const std::string cli = fs::absolute(argv[1]).string();
  std::set<int> only;
  for (int i = 2; i < argc; ++i) only.insert(std::atoi(argv[i]));

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient fidelity", gradient_fidelity},
      {"CRF oracle equivalence", crf_oracle},
      {"penalty algebra", penalty_algebra},
      {"lambda=0 collapse", lambda_zero_collapse},
      {"synthetic two-domain transfer", synthetic_transfer},
      {"overfit sanity", overfit},
      {"forget-gate init", forget_gate_init},
      {"checkpoint round trip", checkpoint_round_trip},
      {"dropout contract", dropout_contract},
      {"early stopping", early_stopping},
      {"sign test closed forms", sign_test_forms},
      {"reproducibility", [&] { return cli_reproducibility(cli); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(number)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    if (!outcome.pass) ++failed;
    std::printf("%s criterion %2d: %s [%.1fs] %s\n", outcome.pass ? "PASS" : "FAIL", number, criteria[i].first.c_str(),
                seconds_since(t0), outcome.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
