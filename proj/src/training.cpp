#include "postag/training.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace postag::training {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Example {
  tagger::EncodedSentence input;
  std::vector<int> gold;
};

}  // namespace

std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::source: return "source";
    case Mode::target: return "target";
    case Mode::joint: return "joint";
  }
  return "?";
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw std::invalid_argument("lr must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("Adam betas must be in [0, 1)");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (max_epochs < 1) throw std::invalid_argument("max_epochs must be at least 1");
  if (patience < 1) throw std::invalid_argument("patience must be at least 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite and >= 0");
  if (!std::isfinite(clip_norm) || clip_norm < 0.0) throw std::invalid_argument("clip_norm must be >= 0");
}

AdamState AdamState::like(const TensorMap& params) { return {params.zeros_like(), params.zeros_like(), 0}; }

void adam_step(TensorMap& params, const TensorMap& grads, AdamState& state, double lr, double beta1, double beta2,
               double eps) {
  for (const auto& [name, g] : grads) {
    if (params.at(name).shape() != g.shape()) {
      throw std::invalid_argument("gradient '" + name + "' has shape " + g.shape_string() + ", parameter has " +
                                  params.at(name).shape_string());
    }
    if (!g.all_finite()) throw std::domain_error("non-finite gradient in tensor '" + name + "'");
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (auto& [name, w] : params) {
    const ad::Tensor* g = grads.find(name);
    if (!g) continue;
    auto& m = state.m.at(name);
    auto& v = state.v.at(name);
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * (*g)[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * (*g)[i] * (*g)[i];
      w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    }
  }
}

double clip_global_norm(TensorMap& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& e : grads)
    for (double v : e.tensor.data()) sq += v * v;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (auto& e : grads)
      for (auto& v : e.tensor.data()) v *= s;
  }
  return norm;
}

EarlyStopping::EarlyStopping(int patience) : patience_(patience) {
  if (patience < 1) throw std::invalid_argument("patience must be at least 1");
}

bool EarlyStopping::update(double score) {
  ++epoch_;
  if (best_epoch_ == 0 || score > best_score_) {
    best_score_ = score;
    best_epoch_ = epoch_;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

std::string TrainReport::log_text() const {
  std::ostringstream out;
  for (const auto& e : epochs) {
    out << "epoch=" << e.epoch << " train_loss=" << num(e.train_loss) << " cross_entropy=" << num(e.cross_entropy)
        << " penalty=" << num(e.penalty) << " dev_accuracy=" << num(e.dev_accuracy) << '\n';
  }
  return out.str();
}

std::string TrainReport::summary_text() const {
  std::ostringstream out;
  out << "best_epoch=" << best_epoch << '\n';
  out << "best_dev_accuracy=" << num(best_dev_accuracy) << '\n';
  out << "epochs_run=" << epochs.size() << '\n';
  out << "stopped_early=" << (stopped_early ? "true" : "false") << '\n';
  if (!epochs.empty()) {
    out << "final_train_loss=" << num(epochs.back().train_loss) << '\n';
    out << "final_cross_entropy=" << num(epochs.back().cross_entropy) << '\n';
    out << "final_penalty=" << num(epochs.back().penalty) << '\n';
  }
  out << "model_path=" << model_path << '\n';
  return out.str();
}

double accuracy(const tagger::ParamStore& params, const Corpus& corpus, std::span<const Lexicon> lexicons) {
  std::size_t correct = 0, total = 0;
  for (const auto& s : corpus.sentences) {
    const auto pred = tagger::decode(params, tagger::encode_sentence(params, s, lexicons));
    for (std::size_t t = 0; t < s.tokens.size(); ++t) {
      const auto& gold = s.tokens[t].gold_tag;
      if (!gold) throw std::invalid_argument("evaluation corpus has untagged tokens");
      correct += corpus.tagset.tag(*gold) == params.alphabets.tags.tag(pred[t]) ? 1 : 0;
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

TrainResult train(const Corpus& train_corpus, const Corpus& dev, std::span<const Lexicon> lexicons,
                  const tagger::ArchConfig& arch_in, const TrainConfig& config, const transfer::PriorWeights* prior,
                  const TrainOptions& options) {
  config.validate();
  if (train_corpus.sentences.empty()) throw std::invalid_argument("training corpus is empty");
  if (!train_corpus.fully_tagged()) throw std::invalid_argument("training corpus has untagged tokens");
  if (!dev.fully_tagged()) throw std::invalid_argument("dev corpus has untagged tokens");

  Rng rng(config.seed);
  tagger::ParamStore params;
  if (options.initial) {
    params = *options.initial;
  } else {
    tagger::ArchConfig arch = arch_in;
    arch.lexicon_dims.clear();
    for (const auto& lex : lexicons) arch.lexicon_dims.push_back(lex.dim());
    params = tagger::init_params(arch, tagger::build_alphabets(train_corpus, options.vocabulary), rng);
  }

  std::vector<Example> examples;
  examples.reserve(train_corpus.sentences.size());
  for (const auto& s : train_corpus.sentences) {
    examples.push_back({tagger::encode_sentence(params, s, lexicons),
                        tagger::gold_indices(params, s, train_corpus.tagset)});
  }

  std::optional<transfer::AlignedPrior> aligned;
  if (prior) aligned = transfer::align_prior(*prior, params, transfer::default_regularized_layers());
  const bool regularize = aligned && config.lambda > 0.0;

  TensorMap grads = params.tensors.zeros_like();
  AdamState adam = AdamState::like(params.tensors);
  EarlyStopping stopper(config.patience);
  TrainResult result;
  result.model = params;
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    double ce_sum = 0.0, pen_sum = 0.0;
    for (std::size_t idx : order) {
      grads.zero();
      ce_sum += tagger::loss(params, examples[idx].input, examples[idx].gold, true, rng, &grads);
      if (regularize) pen_sum += transfer::penalty(params.tensors, *aligned, config.lambda, &grads);
      clip_global_norm(grads, config.clip_norm);
      adam_step(params.tensors, grads, adam, config.lr, config.beta1, config.beta2, config.eps);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    const double n = static_cast<double>(examples.size());
    rec.cross_entropy = ce_sum / n;
    rec.penalty = pen_sum / n;
    rec.train_loss = rec.cross_entropy + rec.penalty;
    rec.dev_accuracy = options.dev_score ? options.dev_score(params, epoch) : accuracy(params, dev, lexicons);
    result.report.epochs.push_back(rec);
    if (options.on_epoch) options.on_epoch(rec, params);
    if (stopper.update(rec.dev_accuracy)) result.model.tensors = params.tensors;
    if (stopper.should_stop()) {
      result.report.stopped_early = true;
      break;
    }
  }
  result.model.arch = params.arch;
  result.model.alphabets = params.alphabets;
  result.report.best_epoch = stopper.best_epoch();
  result.report.best_dev_accuracy = stopper.best_score();
  return result;
}

TrainResult train_joint(const Corpus& source, const Corpus& target, const Corpus& dev,
                        std::span<const Lexicon> lexicons, const tagger::ArchConfig& arch, TrainConfig config,
                        const TrainOptions& options) {
  config.mode = Mode::joint;
  return train(merge(source, target), dev, lexicons, arch, config, nullptr, options);
}

}  // namespace postag::training
