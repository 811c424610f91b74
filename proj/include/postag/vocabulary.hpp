#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace postag {

/// Value -> index bijection with index 0 reserved for values never seen
/// while building. The reserved slot has no string key, so no real value can
/// collide with it.
class Vocabulary {
 public:
  static constexpr int kUnseen = 0;

  Vocabulary() = default;
  /// Rebuilds from the known values in index order (index 1, 2, ...).
  explicit Vocabulary(const std::vector<std::string>& values);

  int add(std::string_view value);
  /// Index of `value`, or kUnseen.
  int index(std::string_view value) const;
  std::optional<int> find(std::string_view value) const;
  /// Value at `i` (i >= 1).
  const std::string& value(int i) const { return values_.at(static_cast<std::size_t>(i - 1)); }

  /// Number of indices including the reserved one.
  int size() const { return static_cast<int>(values_.size()) + 1; }
  /// Known values, index 1 first.
  const std::vector<std::string>& values() const { return values_; }

  bool operator==(const Vocabulary& other) const { return values_ == other.values_; }

 private:
  std::vector<std::string> values_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace postag
