// Prior-weight adaptation: tagger checkpoints, alignment of a source-trained
// model onto a target model by tensor name and string key, and the penalty
// lambda * ||W - W_prior||^2 over the aligned entries.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "postag/checkpoint.hpp"
#include "postag/tagger.hpp"
#include "postag/tensor_map.hpp"

namespace postag::transfer {

inline constexpr const char* kTaggerKind = "bilstm-tagger";

Checkpoint to_checkpoint(const tagger::ParamStore& params);
/// Throws CheckpointManifestError when tensors disagree with the
/// architecture and alphabets recorded alongside them.
tagger::ParamStore from_checkpoint(const Checkpoint& checkpoint);

void save_checkpoint(const std::filesystem::path& path, const tagger::ParamStore& params,
                     const nlohmann::json& run = nlohmann::json::object());
tagger::ParamStore load_checkpoint(const std::filesystem::path& path);

/// Source-trained weights with their alphabets.
using PriorWeights = tagger::ParamStore;

/// Name prefixes of the layers the penalty covers by default: the three
/// LSTMs, every embedding table and the output layer.
std::vector<std::string> default_regularized_layers();

struct TransferConfig {
  double lambda = 0.001;
  std::vector<std::string> layers = default_regularized_layers();
};

/// Prior values laid out like the target parameters, plus a 0/1 mask of the
/// entries that have a prior. Only regularized tensors are present.
struct AlignedPrior {
  TensorMap values;
  TensorMap mask;

  std::size_t covered() const;
};

/// LSTM tensors map by name and must have identical shapes. Embedding rows
/// map by word / character / feature value, output columns and bias entries
/// by tag name; target keys the source lacks stay uncovered. Throws
/// std::invalid_argument naming the tensor and both shapes on a mismatch.
AlignedPrior align_prior(const PriorWeights& prior, const tagger::ParamStore& params,
                         const std::vector<std::string>& layers = default_regularized_layers());

/// lambda * sum of mask * (W - W_prior)^2. When `grads` is given,
/// 2 * lambda * mask * (W - W_prior) is added to it.
double penalty(const TensorMap& params, const AlignedPrior& prior, double lambda, TensorMap* grads = nullptr);

/// Sum over covered entries of (W - W_prior)^2.
double squared_distance(const TensorMap& params, const AlignedPrior& prior);

}  // namespace postag::transfer
