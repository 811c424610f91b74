#include "postag/vocabulary.hpp"

#include <stdexcept>

namespace postag {

Vocabulary::Vocabulary(const std::vector<std::string>& values) {
  for (const auto& v : values) {
    if (index_.count(v) != 0) throw std::invalid_argument("duplicate vocabulary entry '" + v + "'");
    add(v);
  }
}

int Vocabulary::add(std::string_view value) {
  std::string key(value);
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  values_.push_back(key);
  const int i = static_cast<int>(values_.size());
  index_.emplace(std::move(key), i);
  return i;
}

std::optional<int> Vocabulary::find(std::string_view value) const {
  auto it = index_.find(std::string(value));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int Vocabulary::index(std::string_view value) const { return find(value).value_or(kUnseen); }

}  // namespace postag
