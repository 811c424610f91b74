// Optimization loop for the neural tagger: Adam, global-norm clipping,
// seeded shuffling, dev-accuracy early stopping and the optional prior
// penalty.
#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "postag/corpus.hpp"
#include "postag/lexicon.hpp"
#include "postag/tagger.hpp"
#include "postag/tensor_map.hpp"
#include "postag/transfer.hpp"

namespace postag::training {

enum class Mode { source, target, joint };
std::string_view mode_name(Mode m);

struct TrainConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int max_epochs = 50;
  int patience = 5;
  double lambda = 0.0;
  std::uint64_t seed = 42;
  /// Global gradient-norm threshold; 0 disables clipping.
  double clip_norm = 5.0;
  Mode mode = Mode::source;

  void validate() const;
};

struct AdamState {
  TensorMap m;
  TensorMap v;
  long step = 0;

  static AdamState like(const TensorMap& params);
};

/// One bias-corrected Adam update. Throws std::domain_error naming the
/// tensor when a gradient is not finite.
void adam_step(TensorMap& params, const TensorMap& grads, AdamState& state, double lr, double beta1, double beta2,
               double eps);

/// Rescales `grads` so their global L2 norm is at most `max_norm` (no-op
/// when max_norm <= 0). Returns the norm before clipping.
double clip_global_norm(TensorMap& grads, double max_norm);

/// Patience bookkeeping over per-epoch dev scores.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience);

  /// Records the score of the next epoch; true when it is a new best.
  bool update(double score);
  bool should_stop() const { return since_best_ >= patience_; }
  int best_epoch() const { return best_epoch_; }
  double best_score() const { return best_score_; }

 private:
  int patience_;
  int epoch_ = 0;
  int best_epoch_ = 0;
  double best_score_ = -1.0;
  int since_best_ = 0;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;  // cross_entropy + penalty
  double cross_entropy = 0.0;
  double penalty = 0.0;
  double dev_accuracy = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_dev_accuracy = 0.0;
  bool stopped_early = false;
  std::string model_path;

  /// One line per epoch.
  std::string log_text() const;
  /// key=value lines.
  std::string summary_text() const;
};

struct TrainResult {
  TrainReport report;
  tagger::ParamStore model;
};

struct TrainOptions {
  /// Start from these parameters instead of a fresh init.
  const tagger::ParamStore* initial = nullptr;
  /// Corpora that only widen the word/char/feature alphabets.
  std::vector<const Corpus*> vocabulary;
  /// Replaces dev-set accuracy (used to script early-stopping scenarios).
  std::function<double(const tagger::ParamStore&, int epoch)> dev_score;
  /// Called after every epoch with the current parameters.
  std::function<void(const EpochRecord&, const tagger::ParamStore&)> on_epoch;
};

/// Token accuracy of `params` on a tagged corpus, compared by tag string.
double accuracy(const tagger::ParamStore& params, const Corpus& corpus, std::span<const Lexicon> lexicons);

/// Trains on `train`, early-stopping on `dev`, and returns the best-dev
/// model. With a prior and lambda > 0 each sentence loss gets the penalty.
/// Throws std::invalid_argument for an empty or untagged training set, an
/// untagged dev set, or a prior that cannot be aligned.
TrainResult train(const Corpus& train, const Corpus& dev, std::span<const Lexicon> lexicons,
                  const tagger::ArchConfig& arch, const TrainConfig& config,
                  const transfer::PriorWeights* prior = nullptr, const TrainOptions& options = {});

/// Training on merge(source, target) without any prior.
TrainResult train_joint(const Corpus& source, const Corpus& target, const Corpus& dev,
                        std::span<const Lexicon> lexicons, const tagger::ArchConfig& arch, TrainConfig config,
                        const TrainOptions& options = {});

}  // namespace postag::training
