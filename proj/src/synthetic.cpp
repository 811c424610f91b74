#include "postag/synthetic.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

namespace postag::synthetic {

namespace {

constexpr int kStates = 3;

std::size_t draw(const std::vector<double>& weights, Rng& rng) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  for (std::size_t i = weights.size(); i-- > 0;)
    if (weights[i] > 0.0) return i;
  throw std::logic_error("draw from an all-zero distribution");
}

std::string stem(Rng& rng) {
  static const char* onsets[] = {"b", "d", "f", "g", "h", "k", "l", "m", "n", "p", "r", "s", "t", "w", "z", "sch", "st"};
  static const char* vowels[] = {"a", "e", "i", "o", "u", "ei", "au"};
  std::string s;
  const auto syllables = 1 + rng.below(2);
  for (std::uint64_t i = 0; i < syllables; ++i) {
    s += onsets[rng.below(std::size(onsets))];
    s += vowels[rng.below(std::size(vowels))];
  }
  return s;
}

std::string word_for_tag(int tag, Rng& rng) {
  static const char* suffixes[] = {"er", "ung", "en", "lich", "te", "ig", "ch", "s"};
  std::string w;
  switch (tag % 8) {
    case 7:
      w = std::to_string(1 + rng.below(2999));
      break;
    case 1:
      w = stem(rng) + suffixes[1];
      w[0] = static_cast<char>(w[0] - 'a' + 'A');
      break;
    default:
      w = stem(rng) + suffixes[tag % 8];
      break;
  }
  return w;
}

}  // namespace

Corpus Generator::sample(std::size_t n_sentences, Rng& rng, const std::string& name) const {
  Corpus c;
  c.name = name;
  for (const auto& t : tags) c.tagset.add(t);
  for (std::size_t s = 0; s < n_sentences; ++s) {
    const auto len = static_cast<std::size_t>(min_length) + rng.below(static_cast<std::uint64_t>(max_length - min_length + 1));
    Sentence sent;
    std::size_t state = rng.below(kStates);
    for (std::size_t i = 0; i < len; ++i) {
      if (i > 0) state = draw(state_transitions[state], rng);
      const auto tag = draw(tag_given_state[state], rng);
      const auto word = draw(word_given_tag[tag], rng);
      sent.tokens.push_back({words[word], static_cast<int>(tag)});
    }
    c.sentences.push_back(std::move(sent));
  }
  return c;
}

Generator make_source(std::uint64_t seed, int n_words, int n_tags) {
  if (n_tags < kStates || n_words < n_tags) throw std::invalid_argument("generator needs more words and tags");
  Rng rng(seed);
  Generator g;
  for (int t = 0; t < n_tags; ++t) g.tags.push_back("T" + std::to_string(t));

  // Each word has a primary tag; a quarter of the words are ambiguous with a
  // secondary tag, which only the context can resolve.
  std::set<std::string> used;
  std::vector<int> primary;
  while (static_cast<int>(g.words.size()) < n_words) {
    const int tag = static_cast<int>(g.words.size()) % n_tags;
    auto w = word_for_tag(tag, rng);
    if (!used.insert(w).second) continue;
    g.words.push_back(w);
    primary.push_back(tag);
  }
  g.word_given_tag.assign(static_cast<std::size_t>(n_tags), std::vector<double>(g.words.size(), 0.0));
  for (std::size_t w = 0; w < g.words.size(); ++w) {
    const double weight = 1.0 / (1.0 + static_cast<double>(w / static_cast<std::size_t>(n_tags)) * 0.15);
    g.word_given_tag[static_cast<std::size_t>(primary[w])][w] += weight;
    if (rng.uniform() < 0.25) {
      auto other = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(n_tags - 1)));
      if (other >= static_cast<std::size_t>(primary[w])) ++other;
      g.word_given_tag[other][w] += 0.5 * weight;
    }
  }

  // Phrase states prefer disjoint tag groups and are sticky.
  g.state_transitions.assign(kStates, std::vector<double>(kStates, 0.0));
  for (int s = 0; s < kStates; ++s)
    for (int u = 0; u < kStates; ++u) g.state_transitions[static_cast<std::size_t>(s)][static_cast<std::size_t>(u)] = s == u ? 0.5 : (u == (s + 1) % kStates ? 0.35 : 0.15);
  g.tag_given_state.assign(kStates, std::vector<double>(static_cast<std::size_t>(n_tags), 0.02));
  for (int t = 0; t < n_tags; ++t) {
    g.tag_given_state[static_cast<std::size_t>(t % kStates)][static_cast<std::size_t>(t)] = 1.0 + rng.uniform();
  }
  return g;
}

Generator perturb(const Generator& source, std::uint64_t seed, double fraction, int extra_words, int extra_tags) {
  Rng rng(seed);
  Generator g = source;
  const auto n_tags = g.tags.size();
  const auto n_words = g.words.size();

  std::vector<std::size_t> order(n_words);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order.begin(), order.end());
  const auto moved = static_cast<std::size_t>(fraction * static_cast<double>(n_words) + 0.5);
  for (std::size_t i = 0; i < moved; ++i) {
    const auto w = order[i];
    double mass = 0.0;
    std::size_t dominant = 0;
    for (std::size_t t = 0; t < n_tags; ++t) {
      auto& row = g.word_given_tag[t];
      if (row[w] > g.word_given_tag[dominant][w]) dominant = t;
      mass += row[w];
    }
    for (auto& row : g.word_given_tag) row[w] = 0.0;
    auto to = static_cast<std::size_t>(rng.below(n_tags - 1));
    if (to >= dominant) ++to;
    g.word_given_tag[to][w] = mass;
  }

  static const char* markers[] = {"#", "@"};
  for (int t = 0; t < extra_tags; ++t) {
    g.tags.push_back("X" + std::to_string(t));
    for (auto& row : g.tag_given_state) row.push_back(0.12);
  }
  for (auto& row : g.word_given_tag) row.resize(n_words + static_cast<std::size_t>(extra_words), 0.0);
  for (int t = 0; t < extra_tags; ++t) g.word_given_tag.emplace_back(n_words + static_cast<std::size_t>(extra_words), 0.0);
  for (int i = 0; i < extra_words; ++i) {
    const auto tag = n_tags + static_cast<std::size_t>(extra_tags > 0 ? i % extra_tags : 0);
    std::string w = std::string(markers[i % 2]) + stem(rng);
    while (std::find(g.words.begin(), g.words.end(), w) != g.words.end()) w += "x";
    g.words.push_back(w);
    if (extra_tags > 0) g.word_given_tag[tag].back() = 1.0;
    else g.word_given_tag[rng.below(n_tags)].back() = 1.0;
  }
  return g;
}

TwoDomainFixture make_two_domain_fixture(std::uint64_t seed) {
  const auto source = make_source(seed);
  const auto target = perturb(source, seed + 1);
  Rng rng(seed + 2);
  TwoDomainFixture f;
  f.source_train = source.sample(2000, rng, "source-train");
  f.source_dev = source.sample(200, rng, "source-dev");
  f.target_train = target.sample(40, rng, "target-train");
  f.target_dev = target.sample(100, rng, "target-dev");
  f.target_test = target.sample(100, rng, "target-test");
  return f;
}

}  // namespace postag::synthetic
