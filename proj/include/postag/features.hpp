// Per-token categorical features shared by the CRF baseline and the
// feature-embedding channel of the neural tagger.
#pragma once

#include <array>
#include <string>
#include <string_view>

#include "postag/corpus.hpp"
#include "postag/vocabulary.hpp"

namespace postag {

inline constexpr int kMaxLengthBucket = 20;
inline constexpr int kMaxCountBucket = 10;

struct FeatureBundle {
  std::string lower;
  int length_bucket = 1;
  int n_upper_bucket = 0;
  int n_digit_bucket = 0;
  bool is_hashtag = false;
  bool is_url = false;
  bool is_mention = false;
  bool has_symbol = false;
  bool starts_digit = false;
  bool starts_upper = false;
};

/// Feature types that get their own embedding table. The lowercased form is
/// not one of them; it reaches the network through the word channel.
enum class FeatureType {
  length,
  n_upper,
  n_digit,
  hashtag,
  url,
  mention,
  symbol,
  starts_digit,
  starts_upper,
};
inline constexpr std::size_t kFeatureTypeCount = 9;

std::string_view feature_name(FeatureType type);
FeatureType feature_type(std::size_t i);

/// String form of one feature value, the key of its alphabet entry.
std::string feature_value(const FeatureBundle& bundle, FeatureType type);

/// Throws std::invalid_argument for an empty surface.
FeatureBundle extract(std::string_view surface);

struct FeatureAlphabets {
  std::array<Vocabulary, kFeatureTypeCount> types;

  const Vocabulary& operator[](FeatureType t) const { return types[static_cast<std::size_t>(t)]; }
  Vocabulary& operator[](FeatureType t) { return types[static_cast<std::size_t>(t)]; }

  /// Adds every value observed in `corpus`.
  void observe(const Corpus& corpus);

  bool operator==(const FeatureAlphabets& other) const { return types == other.types; }
};

FeatureAlphabets build_alphabets(const Corpus& corpus);

using FeatureIndices = std::array<int, kFeatureTypeCount>;

/// Unseen values map to Vocabulary::kUnseen.
FeatureIndices encode(const FeatureBundle& bundle, const FeatureAlphabets& alphabets);

}  // namespace postag
