#include "postag/tensor_map.hpp"

#include <stdexcept>

namespace postag {

ad::Tensor& TensorMap::add(std::string name, ad::Tensor tensor) {
  if (index_.count(name) != 0) throw std::invalid_argument("duplicate tensor name '" + name + "'");
  index_.emplace(name, entries_.size());
  entries_.push_back({std::move(name), std::move(tensor)});
  return entries_.back().tensor;
}

ad::Tensor* TensorMap::find(std::string_view name) {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? nullptr : &entries_[it->second].tensor;
}

const ad::Tensor* TensorMap::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? nullptr : &entries_[it->second].tensor;
}

ad::Tensor& TensorMap::at(std::string_view name) {
  if (auto* t = find(name)) return *t;
  throw std::out_of_range("no tensor named '" + std::string(name) + "'");
}

const ad::Tensor& TensorMap::at(std::string_view name) const {
  if (const auto* t = find(name)) return *t;
  throw std::out_of_range("no tensor named '" + std::string(name) + "'");
}

std::size_t TensorMap::parameter_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.tensor.size();
  return n;
}

TensorMap TensorMap::zeros_like() const {
  TensorMap out;
  for (const auto& e : entries_) out.add(e.name, ad::Tensor(e.tensor.shape(), 0.0));
  return out;
}

void TensorMap::zero() {
  for (auto& e : entries_) e.tensor.fill(0.0);
}

bool TensorMap::bitwise_equal(const TensorMap& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name != other.entries_[i].name) return false;
    if (!entries_[i].tensor.bitwise_equal(other.entries_[i].tensor)) return false;
  }
  return true;
}

}  // namespace postag
