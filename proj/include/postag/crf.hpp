// Linear-chain CRF over per-token feature dictionaries with adjacent-tag
// transitions and explicit begin/end potentials.
#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "postag/corpus.hpp"

namespace postag::crf {

/// Feature strings for one token: lower=, len=, nupper=, ndigit= and the
/// hashtag/url/mention/symbol flags when set.
std::vector<std::string> featurize(const Token& token);

/// Active feature ids per position.
struct Sequence {
  std::vector<std::vector<int>> features;
  std::size_t size() const { return features.size(); }
};

class Model {
 public:
  Model() = default;
  /// Zero weights over the given tags and feature strings.
  Model(TagSet tags, std::vector<std::string> features);

  int num_tags() const { return tags_.size(); }
  int num_features() const { return static_cast<int>(feature_names_.size()); }
  const TagSet& tags() const { return tags_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  /// -1 for features unknown to the model.
  int feature_id(const std::string& feature) const;

  double& emission(int feature, int tag) { return weights_[emission_index(feature, tag)]; }
  double emission(int feature, int tag) const { return weights_[emission_index(feature, tag)]; }
  double& transition(int from, int to) { return weights_[transition_index(from, to)]; }
  double transition(int from, int to) const { return weights_[transition_index(from, to)]; }
  double& begin(int tag) { return weights_[begin_index(tag)]; }
  double begin(int tag) const { return weights_[begin_index(tag)]; }
  double& end(int tag) { return weights_[end_index(tag)]; }
  double end(int tag) const { return weights_[end_index(tag)]; }

  /// Flat parameter vector: emissions (feature-major), transitions, begin, end.
  std::vector<double>& weights() { return weights_; }
  const std::vector<double>& weights() const { return weights_; }

  std::size_t emission_index(int feature, int tag) const {
    return static_cast<std::size_t>(feature) * static_cast<std::size_t>(num_tags()) + static_cast<std::size_t>(tag);
  }
  std::size_t transition_index(int from, int to) const {
    return transition_offset() + static_cast<std::size_t>(from) * static_cast<std::size_t>(num_tags()) +
           static_cast<std::size_t>(to);
  }
  std::size_t begin_index(int tag) const {
    return transition_offset() + static_cast<std::size_t>(num_tags()) * static_cast<std::size_t>(num_tags()) +
           static_cast<std::size_t>(tag);
  }
  std::size_t end_index(int tag) const { return begin_index(tag) + static_cast<std::size_t>(num_tags()); }

  /// Maps tokens onto feature ids, dropping unknown features.
  Sequence encode(const Sentence& sentence) const;

 private:
  std::size_t transition_offset() const {
    return static_cast<std::size_t>(num_features()) * static_cast<std::size_t>(num_tags());
  }

  TagSet tags_;
  std::vector<std::string> feature_names_;
  std::unordered_map<std::string, int> feature_ids_;
  std::vector<double> weights_;
};

/// Per-position, per-tag emission scores.
std::vector<std::vector<double>> emission_scores(const Model& model, const Sequence& seq);

/// Throws std::invalid_argument when |tags| != |seq|.
double log_score(const Model& model, const Sequence& seq, std::span<const int> tags);
double log_partition(const Model& model, const Sequence& seq);
/// Per-position tag marginals from forward-backward.
std::vector<std::vector<double>> marginals(const Model& model, const Sequence& seq);
/// Highest-scoring tag sequence; ties go to the lower tag index.
std::vector<int> viterbi(const Model& model, const Sequence& seq);

/// Log-likelihood log_score(gold) - log_partition; adds its gradient into
/// `grad` (same layout as Model::weights) when given.
double log_likelihood(const Model& model, const Sequence& seq, std::span<const int> gold,
                      std::vector<double>* grad = nullptr);

struct TrainConfig {
  int epochs = 50;
  double learning_rate = 1.0;
  double l2 = 1e-4;
};

struct TrainStats {
  std::vector<double> objective;  // per epoch, before that epoch's update
};

/// Mean log-likelihood minus (l2/2)||w||^2, with its gradient.
double objective(const Model& model, std::span<const Sequence> data, std::span<const std::vector<int>> gold,
                 double l2, std::vector<double>* grad);

/// Batch gradient ascent on the L2-regularized mean log-likelihood.
/// Throws std::invalid_argument for an empty or untagged corpus.
Model train(const Corpus& corpus, const TrainConfig& config, TrainStats* stats = nullptr);

/// Decodes every sentence; tags index into model.tags().
std::vector<std::vector<int>> tag(const Model& model, const Corpus& corpus);

void save(const std::filesystem::path& path, const Model& model);
Model load(const std::filesystem::path& path);

inline constexpr const char* kCheckpointKind = "linear-chain-crf";

}  // namespace postag::crf
