#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "postag/tensor.hpp"

namespace postag {

/// Named tensors in insertion order. Used for parameters, their gradients,
/// optimizer moments and prior weights, which all share one naming scheme.
class TensorMap {
 public:
  struct Entry {
    std::string name;
    ad::Tensor tensor;
  };

  /// Throws std::invalid_argument on a duplicate name.
  ad::Tensor& add(std::string name, ad::Tensor tensor);

  ad::Tensor& at(std::string_view name);
  const ad::Tensor& at(std::string_view name) const;
  ad::Tensor* find(std::string_view name);
  const ad::Tensor* find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }

  std::size_t size() const { return entries_.size(); }
  std::size_t parameter_count() const;
  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<Entry>::iterator begin() { return entries_.begin(); }
  std::vector<Entry>::iterator end() { return entries_.end(); }
  std::vector<Entry>::const_iterator begin() const { return entries_.begin(); }
  std::vector<Entry>::const_iterator end() const { return entries_.end(); }

  /// Same names and shapes, all zeros.
  TensorMap zeros_like() const;
  void zero();
  bool bitwise_equal(const TensorMap& other) const;

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace postag
