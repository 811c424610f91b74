#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "postag/crf.hpp"
#include "postag/random.hpp"

using namespace postag;

namespace {

crf::Model random_model(int tags, int features, Rng& rng, bool integer_weights) {
  std::vector<std::string> names;
  std::vector<std::string> tag_names;
  for (int f = 0; f < features; ++f) names.push_back("f" + std::to_string(f));
  for (int k = 0; k < tags; ++k) tag_names.push_back("T" + std::to_string(k));
  crf::Model m(TagSet(tag_names), names);
  for (auto& w : m.weights())
    w = integer_weights ? static_cast<double>(rng.below(3)) - 1.0 : rng.uniform(-2.0, 2.0);
  return m;
}

crf::Sequence random_sequence(std::size_t length, int features, Rng& rng) {
  crf::Sequence seq;
  for (std::size_t t = 0; t < length; ++t) {
    std::vector<int> active;
    for (int f = 0; f < features; ++f)
      if (rng.bernoulli(0.4)) active.push_back(f);
    seq.features.push_back(active);
  }
  return seq;
}

Corpus parse(const std::string& text) {
  std::istringstream in(text);
  return parse_conll(in, "mem");
}

double training_accuracy(const crf::Model& m, const Corpus& c) {
  const auto predicted = crf::tag(m, c);
  std::size_t correct = 0;
  std::size_t total = 0;
  for (std::size_t s = 0; s < c.sentences.size(); ++s) {
    for (std::size_t t = 0; t < c.sentences[s].tokens.size(); ++t) {
      ++total;
      const auto& gold = c.tagset.tag(*c.sentences[s].tokens[t].gold_tag);
      if (m.tags().tag(predicted[s][t]) == gold) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("featurize examples") {
  auto sorted = [](std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  CHECK(sorted(crf::featurize({"#yolo", {}})) ==
        sorted({"lower=#yolo", "len=5", "nupper=0", "ndigit=0", "hashtag"}));
  CHECK(sorted(crf::featurize({"Haus", {}})) == sorted({"lower=haus", "len=4", "nupper=1", "ndigit=0"}));
}

TEST_CASE("equal lowercase forms share the lower= feature id") {
  const auto model = crf::train(parse("Haus\tNN\nhaus\tNN\n"), {.epochs = 1});
  const auto seq = model.encode(parse("HAUS\tNN\nhaus\tNN\n").sentences[0]);
  const int id = model.feature_id("lower=haus");
  CHECK(id >= 0);
  CHECK(std::count(seq.features[0].begin(), seq.features[0].end(), id) == 1);
  CHECK(std::count(seq.features[1].begin(), seq.features[1].end(), id) == 1);
}

TEST_CASE("log_score examples") {
  Rng rng(1);
  crf::Model m(TagSet({"A", "B"}), {"f0", "f1"});
  const crf::Sequence seq{{{0}, {0, 1}}};
  const std::vector<int> y = {0, 1};
  CHECK(crf::log_score(m, seq, y) == 0.0);
  m.emission(1, 1) = 1.5;
  CHECK(crf::log_score(m, seq, y) == 1.5);
  const std::vector<int> short_tags = {0};
  CHECK_THROWS_AS(crf::log_score(m, seq, short_tags), std::invalid_argument);

  for (int trial = 0; trial < 50; ++trial) {
    const auto model = random_model(3, 4, rng, false);
    const auto s = random_sequence(1 + rng.below(4), 4, rng);
    std::vector<int> tags;
    for (std::size_t t = 0; t < s.size(); ++t) tags.push_back(static_cast<int>(rng.below(3)));
    CHECK(crf::log_score(model, s, tags) == doctest::Approx(oracle::hand_score(model, s, tags)).epsilon(1e-12));
  }
}

TEST_CASE("log_partition examples") {
  crf::Model m(TagSet({"A", "B"}), {"f"});
  CHECK(crf::log_partition(m, crf::Sequence{{{0}}}) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  crf::Model m3(TagSet({"A", "B", "C"}), {"f"});
  const crf::Sequence four{{{0}, {}, {0}, {}}};
  CHECK(crf::log_partition(m3, four) == doctest::Approx(4.0 * std::log(3.0)).epsilon(1e-14));
}

TEST_CASE("viterbi examples") {
  crf::Model m(TagSet({"A", "B", "C"}), {"f"});
  const crf::Sequence seq{{{0}, {0}, {0}}};
  CHECK(crf::viterbi(m, seq) == std::vector<int>{0, 0, 0});
  m.emission(0, 2) = 0.5;
  m.emission(0, 1) = 0.25;
  CHECK(crf::viterbi(m, crf::Sequence{{{0}}}) == std::vector<int>{2});
}

TEST_CASE("brute-force oracle agreement on 200 random instances") {
  Rng rng(314);
  for (int trial = 0; trial < 200; ++trial) {
    const int K = 1 + static_cast<int>(rng.below(4));
    const int F = 1 + static_cast<int>(rng.below(5));
    const bool ties = trial % 2 == 1;
    const auto m = random_model(K, F, rng, ties);
    const auto seq = random_sequence(1 + rng.below(5), F, rng);
    const double z = crf::log_partition(m, seq);
    CHECK(std::abs(z - oracle::brute_log_partition(m, seq)) <= 1e-10);
    CHECK(crf::viterbi(m, seq) == oracle::brute_argmax(m, seq));

    const auto marg = crf::marginals(m, seq);
    for (const auto& row : marg) {
      double s = 0;
      for (double p : row) s += p;
      CHECK(std::abs(s - 1.0) <= 1e-10);
    }
    oracle::for_each_sequence(seq.size(), K, [&](const std::vector<int>& y) {
      CHECK(z >= crf::log_score(m, seq, y) - 1e-12);
    });
  }
}

TEST_CASE("log-likelihood gradient matches finite differences") {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const int K = 2 + static_cast<int>(rng.below(3));
    const int F = 1 + static_cast<int>(rng.below(4));
    auto m = random_model(K, F, rng, false);
    const auto seq = random_sequence(1 + rng.below(5), F, rng);
    std::vector<int> gold;
    for (std::size_t t = 0; t < seq.size(); ++t) gold.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(K))));
    std::vector<double> grad(m.weights().size(), 0.0);
    crf::log_likelihood(m, seq, gold, &grad);
    double worst = 0;
    for (std::size_t i = 0; i < grad.size(); ++i) {
      const double numeric = oracle::central_difference([&] { return crf::log_likelihood(m, seq, gold); }, m.weights()[i]);
      worst = std::max(worst, oracle::relative_error(grad[i], numeric));
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("regularized objective gradient matches finite differences") {
  Rng rng(21);
  auto m = random_model(3, 3, rng, false);
  std::vector<crf::Sequence> data;
  std::vector<std::vector<int>> gold;
  for (int i = 0; i < 3; ++i) {
    data.push_back(random_sequence(1 + rng.below(4), 3, rng));
    gold.emplace_back();
    for (std::size_t t = 0; t < data.back().size(); ++t) gold.back().push_back(static_cast<int>(rng.below(3)));
  }
  std::vector<double> grad(m.weights().size(), 0.0);
  crf::objective(m, data, gold, 0.3, &grad);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double numeric =
        oracle::central_difference([&] { return crf::objective(m, data, gold, 0.3, nullptr); }, m.weights()[i]);
    CHECK(oracle::relative_error(grad[i], numeric) < 1e-4);
  }
}

TEST_CASE("training reaches 100% on a repeated sentence within 50 epochs") {
  std::string text;
  for (int i = 0; i < 5; ++i) text += "das\tART\nHaus\tNN\nist\tVAFIN\nschön\tADJD\n\n";
  const auto corpus = parse(text);
  crf::TrainStats stats;
  const auto m = crf::train(corpus, {.epochs = 50}, &stats);
  CHECK(training_accuracy(m, corpus) == 1.0);
  CHECK(stats.objective.size() == 50);
  for (std::size_t e = 1; e < stats.objective.size(); ++e) CHECK(stats.objective[e] >= stats.objective[e - 1] - 1e-12);
}

TEST_CASE("training reaches 100% on the five-sentence fixture within 50 epochs") {
  const auto corpus = read_conll(fixture::data("five.conll"));
  const auto m = crf::train(corpus, {.epochs = 50});
  CHECK(training_accuracy(m, corpus) == 1.0);
}

TEST_CASE("larger l2 gives a smaller weight norm") {
  const auto corpus = read_conll(fixture::data("five.conll"));
  auto norm = [](const crf::Model& m) {
    double s = 0;
    for (double w : m.weights()) s += w * w;
    return s;
  };
  const double weak = norm(crf::train(corpus, {.epochs = 30, .l2 = 1e-3}));
  const double strong = norm(crf::train(corpus, {.epochs = 30, .l2 = 1.0}));
  CHECK(strong < weak);
}

TEST_CASE("training rejects empty or untagged corpora and is deterministic") {
  CHECK_THROWS_AS(crf::train(Corpus{}, {}), std::invalid_argument);
  CHECK_THROWS_AS(crf::train(parse("a\nb\n"), {}), std::invalid_argument);
  const auto corpus = read_conll(fixture::data("five.conll"));
  CHECK(crf::train(corpus, {.epochs = 5}).weights() == crf::train(corpus, {.epochs = 5}).weights());
}

TEST_CASE("save and load round trip") {
  const auto corpus = read_conll(fixture::data("five.conll"));
  const auto m = crf::train(corpus, {.epochs = 10});
  const auto path = fixture::temp("crf.ckpt");
  crf::save(path, m);
  const auto loaded = crf::load(path);
  CHECK(loaded.tags() == m.tags());
  CHECK(loaded.feature_names() == m.feature_names());
  CHECK(std::memcmp(loaded.weights().data(), m.weights().data(), m.weights().size() * sizeof(double)) == 0);
  CHECK(crf::tag(loaded, corpus) == crf::tag(m, corpus));
}
