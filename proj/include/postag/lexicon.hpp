// Frozen pretrained word vectors in the plain text format, with optional
// character n-gram vectors for out-of-vocabulary composition.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace postag {

struct SubwordTable {
  int min_n = 3;
  int max_n = 6;
  std::unordered_map<std::string, std::vector<double>> ngrams;
};

class Lexicon {
 public:
  Lexicon() = default;
  Lexicon(int dim, std::unordered_map<std::string, std::vector<double>> table);

  int dim() const { return dim_; }
  std::size_t size() const { return table_.size(); }
  const std::unordered_map<std::string, std::vector<double>>& table() const { return table_; }
  const std::optional<SubwordTable>& subword() const { return subword_; }

  /// Throws std::invalid_argument when the n-gram dimension differs from dim().
  void set_subword(SubwordTable table);

  /// Exact match on the lowercased surface; otherwise the mean over known
  /// n-grams of "<surface>"; otherwise zeros. Always returns dim() values.
  std::vector<double> lookup(std::string_view surface) const;

 private:
  int dim_ = 0;
  std::unordered_map<std::string, std::vector<double>> table_;
  std::optional<SubwordTable> subword_;
};

/// Rows `key v1 ... vD`, optional `count dim` header. Keys are lowercased
/// when `lowercase_keys` is set; later duplicates are ignored.
std::unordered_map<std::string, std::vector<double>> parse_text_vectors(std::istream& in, const std::string& source,
                                                                        int& dim, bool lowercase_keys);

Lexicon load_text_vectors(const std::filesystem::path& path);
SubwordTable load_subword_vectors(const std::filesystem::path& path, int min_n, int max_n, int expected_dim);

/// All character n-grams of "<word>" with min_n <= length <= max_n,
/// measured in Unicode scalar values.
std::vector<std::string> char_ngrams(std::string_view word, int min_n, int max_n);

}  // namespace postag
