// BiLSTM tagger: per-token input channels (trainable word embedding,
// character BiLSTM encoding, summed feature embeddings, frozen lexicon
// vectors), two stacked BiLSTMs and an independent softmax per position.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "postag/autodiff.hpp"
#include "postag/corpus.hpp"
#include "postag/features.hpp"
#include "postag/lexicon.hpp"
#include "postag/random.hpp"
#include "postag/tensor_map.hpp"
#include "postag/vocabulary.hpp"

namespace postag::tagger {

struct ArchConfig {
  int word_emb_dim = 100;
  int char_emb_dim = 25;
  int char_hidden = 25;  // per direction
  int feat_emb_dim = 20;
  int lstm_hidden = 100;  // per direction
  int n_lstm_layers = 2;
  double dropout_lstm = 0.75;   // after each main BiLSTM layer
  double dropout_char = 0.75;   // on the character encoder output
  double dropout_input = 0.75;  // on the concatenated input
  /// Width of each frozen lexicon channel, in input order.
  std::vector<int> lexicon_dims;

  /// Throws std::invalid_argument on a non-positive size or a rate outside [0, 1).
  void validate() const;
  int input_dim() const;

  nlohmann::json to_json() const;
  static ArchConfig from_json(const nlohmann::json& j);
  bool operator==(const ArchConfig&) const = default;
};

struct Alphabets {
  Vocabulary words;  // lowercased forms
  Vocabulary chars;  // single scalar values, UTF-8 encoded
  FeatureAlphabets features;
  TagSet tags;

  /// Adds the words, characters and feature values of `corpus` (not its tags).
  void observe(const Corpus& corpus);
  bool operator==(const Alphabets&) const = default;
};

/// Alphabets from a training corpus; `extra` corpora only widen the
/// word/char/feature alphabets.
Alphabets build_alphabets(const Corpus& train, std::span<const Corpus* const> extra = {});

struct ParamStore {
  ArchConfig arch;
  Alphabets alphabets;
  TensorMap tensors;
};

/// Gate layout of the packed LSTM matrices: [input | forget | cell | output].
enum class Gate { input = 0, forget = 1, cell = 2, output = 3 };

/// Names of every LSTM bias tensor ("<lstm>/<dir>/b").
std::vector<std::string> lstm_bias_names();
/// Prefixes of the three LSTMs: "char_lstm", "lstm1", "lstm2".
std::vector<std::string> lstm_names();

/// Glorot-uniform matrices, zero biases except forget gates (1), embeddings
/// uniform in [-0.05, 0.05].
ParamStore init_params(const ArchConfig& arch, Alphabets alphabets, Rng& rng);
ParamStore init_params(const ArchConfig& arch, Alphabets alphabets, std::uint64_t seed);

/// Index form of a sentence for one model.
struct EncodedSentence {
  std::vector<int> words;
  std::vector<std::vector<int>> chars;
  std::vector<FeatureIndices> features;
  /// T x sum(lexicon dims); empty when the model has no lexicon channels.
  ad::Tensor lexicon;
  std::size_t size() const { return words.size(); }
};

/// Throws std::invalid_argument when the lexicon widths differ from the
/// model's lexicon_dims.
EncodedSentence encode_sentence(const ParamStore& params, const Sentence& sentence,
                                std::span<const Lexicon> lexicons);

/// Gold tags of `sentence` in model tag indices. Throws when a token is
/// untagged or its tag is unknown to the model.
std::vector<int> gold_indices(const ParamStore& params, const Sentence& sentence, const TagSet& corpus_tags);

/// Builds the network on a tape. With `grads` the parameters become
/// gradient leaves accumulating into it; otherwise they are constants.
class Network {
 public:
  Network(ad::Tape& tape, const ParamStore& params, TensorMap* grads = nullptr);

  ad::Var param(const std::string& name);

  /// 1 x 2*char_hidden: final forward state then final backward state.
  ad::Var encode_chars(std::span<const int> chars);
  /// T x input_dim.
  ad::Var assemble_input(const EncodedSentence& sentence, bool train, Rng& rng);
  /// T x hidden: the per-position outputs of one LSTM direction.
  ad::Var lstm(const std::string& prefix, ad::Var inputs, bool reverse);
  ad::Var bilstm(const std::string& prefix, ad::Var inputs);
  /// T x |tags| unnormalized scores.
  ad::Var logits(const EncodedSentence& sentence, bool train, Rng& rng);

 private:
  ad::Tape& tape_;
  const ParamStore& params_;
  TensorMap* grads_;
  std::unordered_map<std::string, ad::Var> leaves_;
};

/// Character indices of `surface` (unknown characters map to 0).
std::vector<int> char_indices(const ParamStore& params, std::string_view surface);

/// Per-position tag distributions, T x |tags|.
ad::Tensor forward_tagger(const ParamStore& params, const EncodedSentence& sentence, bool train, Rng& rng);

/// Mean cross-entropy; accumulates parameter gradients into `grads` when given.
double loss(const ParamStore& params, const EncodedSentence& sentence, std::span<const int> gold, bool train,
            Rng& rng, TensorMap* grads = nullptr);

/// Per-row argmax; ties go to the lower index.
std::vector<int> argmax_rows(const ad::Tensor& probs);
std::vector<int> decode(const ParamStore& params, const EncodedSentence& sentence);

/// Tags every sentence of `corpus`; indices refer to params.alphabets.tags.
std::vector<std::vector<int>> tag_corpus(const ParamStore& params, const Corpus& corpus,
                                         std::span<const Lexicon> lexicons);

}  // namespace postag::tagger
