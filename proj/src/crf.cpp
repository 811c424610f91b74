#include "postag/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "postag/checkpoint.hpp"
#include "postag/features.hpp"

namespace postag::crf {

namespace {

double log_sum_exp(std::span<const double> xs) {
  const double mx = *std::max_element(xs.begin(), xs.end());
  if (mx == -std::numeric_limits<double>::infinity()) return mx;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - mx);
  return mx + std::log(s);
}

struct Lattice {
  std::vector<std::vector<double>> emit;
  std::vector<std::vector<double>> alpha;
  std::vector<std::vector<double>> beta;
  double log_z = 0.0;
};

Lattice forward_backward(const Model& m, const Sequence& seq, bool with_beta) {
  const int K = m.num_tags();
  const std::size_t T = seq.size();
  Lattice L;
  L.emit = emission_scores(m, seq);
  L.alpha.assign(T, std::vector<double>(static_cast<std::size_t>(K)));
  std::vector<double> buf(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) L.alpha[0][static_cast<std::size_t>(k)] = m.begin(k) + L.emit[0][static_cast<std::size_t>(k)];
  for (std::size_t t = 1; t < T; ++t) {
    for (int k = 0; k < K; ++k) {
      for (int j = 0; j < K; ++j) buf[static_cast<std::size_t>(j)] = L.alpha[t - 1][static_cast<std::size_t>(j)] + m.transition(j, k);
      L.alpha[t][static_cast<std::size_t>(k)] = log_sum_exp(buf) + L.emit[t][static_cast<std::size_t>(k)];
    }
  }
  for (int k = 0; k < K; ++k) buf[static_cast<std::size_t>(k)] = L.alpha[T - 1][static_cast<std::size_t>(k)] + m.end(k);
  L.log_z = log_sum_exp(buf);
  if (!with_beta) return L;
  L.beta.assign(T, std::vector<double>(static_cast<std::size_t>(K)));
  for (int k = 0; k < K; ++k) L.beta[T - 1][static_cast<std::size_t>(k)] = m.end(k);
  for (std::size_t t = T - 1; t-- > 0;) {
    for (int j = 0; j < K; ++j) {
      for (int k = 0; k < K; ++k) {
        buf[static_cast<std::size_t>(k)] =
            m.transition(j, k) + L.emit[t + 1][static_cast<std::size_t>(k)] + L.beta[t + 1][static_cast<std::size_t>(k)];
      }
      L.beta[t][static_cast<std::size_t>(j)] = log_sum_exp(buf);
    }
  }
  return L;
}

void require_nonempty(const Sequence& seq) {
  if (seq.size() == 0) throw std::invalid_argument("CRF sequence is empty");
}

}  // namespace

std::vector<std::string> featurize(const Token& token) {
  const auto b = extract(token.surface);
  std::vector<std::string> out = {
      "lower=" + b.lower,
      "len=" + std::to_string(b.length_bucket),
      "nupper=" + std::to_string(b.n_upper_bucket),
      "ndigit=" + std::to_string(b.n_digit_bucket),
  };
  if (b.is_hashtag) out.emplace_back("hashtag");
  if (b.is_url) out.emplace_back("url");
  if (b.is_mention) out.emplace_back("mention");
  if (b.has_symbol) out.emplace_back("symbol");
  return out;
}

Model::Model(TagSet tags, std::vector<std::string> features)
    : tags_(std::move(tags)), feature_names_(std::move(features)) {
  if (tags_.empty()) throw std::invalid_argument("CRF model needs at least one tag");
  for (std::size_t i = 0; i < feature_names_.size(); ++i) {
    if (!feature_ids_.emplace(feature_names_[i], static_cast<int>(i)).second) {
      throw std::invalid_argument("duplicate CRF feature '" + feature_names_[i] + "'");
    }
  }
  const auto K = static_cast<std::size_t>(num_tags());
  weights_.assign(static_cast<std::size_t>(num_features()) * K + K * K + 2 * K, 0.0);
}

int Model::feature_id(const std::string& feature) const {
  auto it = feature_ids_.find(feature);
  return it == feature_ids_.end() ? -1 : it->second;
}

Sequence Model::encode(const Sentence& sentence) const {
  Sequence seq;
  seq.features.reserve(sentence.tokens.size());
  for (const auto& tok : sentence.tokens) {
    std::vector<int> ids;
    for (const auto& f : featurize(tok)) {
      const int id = feature_id(f);
      if (id >= 0) ids.push_back(id);
    }
    seq.features.push_back(std::move(ids));
  }
  return seq;
}

std::vector<std::vector<double>> emission_scores(const Model& m, const Sequence& seq) {
  const int K = m.num_tags();
  std::vector<std::vector<double>> out(seq.size(), std::vector<double>(static_cast<std::size_t>(K), 0.0));
  for (std::size_t t = 0; t < seq.size(); ++t)
    for (int f : seq.features[t])
      for (int k = 0; k < K; ++k) out[t][static_cast<std::size_t>(k)] += m.emission(f, k);
  return out;
}

double log_score(const Model& m, const Sequence& seq, std::span<const int> tags) {
  if (tags.size() != seq.size()) {
    throw std::invalid_argument("tag sequence length " + std::to_string(tags.size()) + " differs from sentence length " +
                                std::to_string(seq.size()));
  }
  require_nonempty(seq);
  double s = m.begin(tags.front()) + m.end(tags.back());
  for (std::size_t t = 0; t < seq.size(); ++t) {
    for (int f : seq.features[t]) s += m.emission(f, tags[t]);
    if (t > 0) s += m.transition(tags[t - 1], tags[t]);
  }
  return s;
}

double log_partition(const Model& m, const Sequence& seq) {
  require_nonempty(seq);
  return forward_backward(m, seq, false).log_z;
}

std::vector<std::vector<double>> marginals(const Model& m, const Sequence& seq) {
  require_nonempty(seq);
  const auto L = forward_backward(m, seq, true);
  std::vector<std::vector<double>> out(seq.size(), std::vector<double>(static_cast<std::size_t>(m.num_tags())));
  for (std::size_t t = 0; t < seq.size(); ++t)
    for (std::size_t k = 0; k < out[t].size(); ++k) out[t][k] = std::exp(L.alpha[t][k] + L.beta[t][k] - L.log_z);
  return out;
}

std::vector<int> viterbi(const Model& m, const Sequence& seq) {
  require_nonempty(seq);
  const int K = m.num_tags();
  const std::size_t T = seq.size();
  const auto emit = emission_scores(m, seq);
  std::vector<std::vector<double>> delta(T, std::vector<double>(static_cast<std::size_t>(K)));
  std::vector<std::vector<int>> back(T, std::vector<int>(static_cast<std::size_t>(K), 0));
  for (int k = 0; k < K; ++k) delta[0][static_cast<std::size_t>(k)] = m.begin(k) + emit[0][static_cast<std::size_t>(k)];
  for (std::size_t t = 1; t < T; ++t) {
    for (int k = 0; k < K; ++k) {
      int best = 0;
      double best_score = delta[t - 1][0] + m.transition(0, k);
      for (int j = 1; j < K; ++j) {
        const double s = delta[t - 1][static_cast<std::size_t>(j)] + m.transition(j, k);
        if (s > best_score) {
          best_score = s;
          best = j;
        }
      }
      delta[t][static_cast<std::size_t>(k)] = best_score + emit[t][static_cast<std::size_t>(k)];
      back[t][static_cast<std::size_t>(k)] = best;
    }
  }
  int last = 0;
  double best_score = delta[T - 1][0] + m.end(0);
  for (int k = 1; k < K; ++k) {
    const double s = delta[T - 1][static_cast<std::size_t>(k)] + m.end(k);
    if (s > best_score) {
      best_score = s;
      last = k;
    }
  }
  std::vector<int> path(T);
  path[T - 1] = last;
  for (std::size_t t = T - 1; t > 0; --t) path[t - 1] = back[t][static_cast<std::size_t>(path[t])];
  return path;
}

double log_likelihood(const Model& m, const Sequence& seq, std::span<const int> gold, std::vector<double>* grad) {
  const double score = log_score(m, seq, gold);
  if (!grad) return score - log_partition(m, seq);
  if (grad->size() != m.weights().size()) throw std::invalid_argument("gradient buffer has wrong size");
  const auto L = forward_backward(m, seq, true);
  const int K = m.num_tags();
  const std::size_t T = seq.size();
  auto& g = *grad;
  // Observed counts.
  g[m.begin_index(gold.front())] += 1.0;
  g[m.end_index(gold.back())] += 1.0;
  for (std::size_t t = 0; t < T; ++t) {
    for (int f : seq.features[t]) g[m.emission_index(f, gold[t])] += 1.0;
    if (t > 0) g[m.transition_index(gold[t - 1], gold[t])] += 1.0;
  }
  // Expected counts.
  for (std::size_t t = 0; t < T; ++t) {
    for (int k = 0; k < K; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      const double p = std::exp(L.alpha[t][ku] + L.beta[t][ku] - L.log_z);
      for (int f : seq.features[t]) g[m.emission_index(f, k)] -= p;
      if (t == 0) g[m.begin_index(k)] -= p;
      if (t == T - 1) g[m.end_index(k)] -= p;
    }
    if (t + 1 < T) {
      for (int j = 0; j < K; ++j)
        for (int k = 0; k < K; ++k) {
          const auto ju = static_cast<std::size_t>(j), ku = static_cast<std::size_t>(k);
          g[m.transition_index(j, k)] -=
              std::exp(L.alpha[t][ju] + m.transition(j, k) + L.emit[t + 1][ku] + L.beta[t + 1][ku] - L.log_z);
        }
    }
  }
  return score - L.log_z;
}

double objective(const Model& model, std::span<const Sequence> data, std::span<const std::vector<int>> gold, double l2,
                 std::vector<double>* grad) {
  if (data.size() != gold.size()) throw std::invalid_argument("CRF data and gold differ in length");
  if (data.empty()) throw std::invalid_argument("CRF objective over no data");
  const auto& w = model.weights();
  std::vector<double> g;
  if (grad) g.assign(w.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) total += log_likelihood(model, data[i], gold[i], grad ? &g : nullptr);
  const double n = static_cast<double>(data.size());
  double sq = 0.0;
  for (double v : w) sq += v * v;
  if (grad) {
    grad->assign(w.size(), 0.0);
    for (std::size_t i = 0; i < w.size(); ++i) (*grad)[i] = g[i] / n - l2 * w[i];
  }
  return total / n - 0.5 * l2 * sq;
}

Model train(const Corpus& corpus, const TrainConfig& config, TrainStats* stats) {
  if (corpus.sentences.empty()) throw std::invalid_argument("cannot train a CRF on an empty corpus");
  if (!corpus.fully_tagged()) throw std::invalid_argument("CRF training corpus has untagged tokens");
  if (corpus.tagset.empty()) throw std::invalid_argument("CRF training corpus has no tags");
  std::vector<std::string> features;
  std::unordered_map<std::string, int> seen;
  for (const auto& s : corpus.sentences)
    for (const auto& t : s.tokens)
      for (auto& f : featurize(t))
        if (seen.emplace(f, static_cast<int>(features.size())).second) features.push_back(std::move(f));
  Model model(corpus.tagset, std::move(features));

  std::vector<Sequence> data;
  std::vector<std::vector<int>> gold;
  for (const auto& s : corpus.sentences) {
    data.push_back(model.encode(s));
    std::vector<int> g;
    for (const auto& t : s.tokens) g.push_back(*t.gold_tag);
    gold.push_back(std::move(g));
  }
  std::vector<double> grad;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double obj = objective(model, data, gold, config.l2, &grad);
    if (stats) stats->objective.push_back(obj);
    auto& w = model.weights();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += config.learning_rate * grad[i];
  }
  return model;
}

std::vector<std::vector<int>> tag(const Model& model, const Corpus& corpus) {
  std::vector<std::vector<int>> out;
  out.reserve(corpus.sentences.size());
  for (const auto& s : corpus.sentences) out.push_back(viterbi(model, model.encode(s)));
  return out;
}

void save(const std::filesystem::path& path, const Model& model) {
  Checkpoint ckpt;
  ckpt.kind = kCheckpointKind;
  ckpt.alphabets["tags"] = model.tags().tags();
  ckpt.alphabets["features"] = model.feature_names();
  const auto K = static_cast<std::size_t>(model.num_tags());
  const auto F = static_cast<std::size_t>(model.num_features());
  const auto& w = model.weights();
  auto slice = [&](std::size_t off, std::size_t n) {
    return std::vector<double>(w.begin() + static_cast<std::ptrdiff_t>(off),
                               w.begin() + static_cast<std::ptrdiff_t>(off + n));
  };
  if (F > 0) ckpt.tensors.add("emission", ad::Tensor({F, K}, slice(0, F * K)));
  ckpt.tensors.add("transition", ad::Tensor({K, K}, slice(F * K, K * K)));
  ckpt.tensors.add("begin", ad::Tensor({K}, slice(F * K + K * K, K)));
  ckpt.tensors.add("end", ad::Tensor({K}, slice(F * K + K * K + K, K)));
  write_checkpoint(path, ckpt);
}

Model load(const std::filesystem::path& path) {
  const auto ckpt = read_checkpoint(path);
  if (ckpt.kind != kCheckpointKind) {
    throw CheckpointManifestError(path.string() + " holds a '" + ckpt.kind + "' model, not a CRF");
  }
  Model model(TagSet(ckpt.alphabets.at("tags")), ckpt.alphabets.at("features"));
  auto& w = model.weights();
  const auto K = static_cast<std::size_t>(model.num_tags());
  const auto F = static_cast<std::size_t>(model.num_features());
  auto put = [&](const char* name, std::size_t off, std::vector<std::size_t> shape) {
    const auto& t = ckpt.tensors.at(name);
    if (t.shape() != shape) {
      throw CheckpointManifestError(std::string("CRF tensor '") + name + "' has shape " + t.shape_string() +
                                    ", expected " + ad::shape_string(shape));
    }
    std::copy(t.data().begin(), t.data().end(), w.begin() + static_cast<std::ptrdiff_t>(off));
  };
  if (F > 0) put("emission", 0, {F, K});
  put("transition", F * K, {K, K});
  put("begin", F * K + K * K, {K});
  put("end", F * K + K * K + K, {K});
  return model;
}

}  // namespace postag::crf
