#include "postag/features.hpp"

#include <algorithm>
#include <stdexcept>

#include "postag/text.hpp"

namespace postag {

namespace {

constexpr std::array<std::string_view, kFeatureTypeCount> kNames = {
    "length", "n_upper", "n_digit", "hashtag", "url", "mention", "symbol", "starts_digit", "starts_upper",
};

bool starts_with_ci(const std::string& lower, std::string_view prefix) {
  return lower.size() >= prefix.size() && std::equal(prefix.begin(), prefix.end(), lower.begin());
}

}  // namespace

std::string_view feature_name(FeatureType type) { return kNames[static_cast<std::size_t>(type)]; }

FeatureType feature_type(std::size_t i) {
  if (i >= kFeatureTypeCount) throw std::out_of_range("feature type index " + std::to_string(i));
  return static_cast<FeatureType>(i);
}

std::string feature_value(const FeatureBundle& b, FeatureType type) {
  auto flag = [](bool v) { return std::string(v ? "true" : "false"); };
  switch (type) {
    case FeatureType::length: return std::to_string(b.length_bucket);
    case FeatureType::n_upper: return std::to_string(b.n_upper_bucket);
    case FeatureType::n_digit: return std::to_string(b.n_digit_bucket);
    case FeatureType::hashtag: return flag(b.is_hashtag);
    case FeatureType::url: return flag(b.is_url);
    case FeatureType::mention: return flag(b.is_mention);
    case FeatureType::symbol: return flag(b.has_symbol);
    case FeatureType::starts_digit: return flag(b.starts_digit);
    case FeatureType::starts_upper: return flag(b.starts_upper);
  }
  throw std::logic_error("unhandled feature type");
}

FeatureBundle extract(std::string_view surface) {
  if (surface.empty()) throw std::invalid_argument("cannot extract features from an empty token");
  const auto cps = text::decode(surface);
  FeatureBundle b;
  b.lower = text::to_lower(surface);
  b.length_bucket = static_cast<int>(std::min<std::size_t>(cps.size(), kMaxLengthBucket));
  int upper = 0;
  int digits = 0;
  for (char32_t cp : cps) {
    if (text::is_upper(cp)) ++upper;
    if (text::is_digit(cp)) ++digits;
    if (!text::is_letter(cp) && !text::is_digit(cp) && cp != U'#' && cp != U'@' && cp != U'-') {
      b.has_symbol = true;
    }
  }
  b.n_upper_bucket = std::min(upper, kMaxCountBucket);
  b.n_digit_bucket = std::min(digits, kMaxCountBucket);
  b.is_hashtag = cps.front() == U'#' && cps.size() > 1;
  b.is_mention = cps.front() == U'@' && cps.size() > 1;
  b.is_url = starts_with_ci(b.lower, "http://") || starts_with_ci(b.lower, "https://") ||
             starts_with_ci(b.lower, "www.");
  b.starts_digit = text::is_digit(cps.front());
  b.starts_upper = text::is_upper(cps.front());
  return b;
}

void FeatureAlphabets::observe(const Corpus& corpus) {
  for (const auto& s : corpus.sentences) {
    for (const auto& t : s.tokens) {
      const auto bundle = extract(t.surface);
      for (std::size_t i = 0; i < kFeatureTypeCount; ++i) {
        types[i].add(feature_value(bundle, feature_type(i)));
      }
    }
  }
}

FeatureAlphabets build_alphabets(const Corpus& corpus) {
  FeatureAlphabets a;
  a.observe(corpus);
  return a;
}

FeatureIndices encode(const FeatureBundle& bundle, const FeatureAlphabets& alphabets) {
  FeatureIndices out{};
  for (std::size_t i = 0; i < kFeatureTypeCount; ++i) {
    out[i] = alphabets.types[i].index(feature_value(bundle, feature_type(i)));
  }
  return out;
}

}  // namespace postag
