#include "postag/lexicon.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "postag/corpus.hpp"
#include "postag/text.hpp"

namespace postag {

Lexicon::Lexicon(int dim, std::unordered_map<std::string, std::vector<double>> table)
    : dim_(dim), table_(std::move(table)) {
  if (dim_ <= 0) throw std::invalid_argument("lexicon dimension must be positive");
  for (const auto& [word, vec] : table_) {
    if (static_cast<int>(vec.size()) != dim_) {
      throw std::invalid_argument("vector for '" + word + "' has wrong dimension");
    }
  }
}

void Lexicon::set_subword(SubwordTable table) {
  if (table.min_n < 1 || table.max_n < table.min_n) throw std::invalid_argument("invalid n-gram bounds");
  for (const auto& [gram, vec] : table.ngrams) {
    if (static_cast<int>(vec.size()) != dim_) {
      throw std::invalid_argument("n-gram vector for '" + gram + "' has wrong dimension");
    }
  }
  subword_ = std::move(table);
}

std::vector<std::string> char_ngrams(std::string_view word, int min_n, int max_n) {
  std::vector<char32_t> cps{U'<'};
  for (char32_t c : text::decode(word)) cps.push_back(c);
  cps.push_back(U'>');
  std::vector<std::string> out;
  for (std::size_t start = 0; start < cps.size(); ++start) {
    for (int n = min_n; n <= max_n && start + static_cast<std::size_t>(n) <= cps.size(); ++n) {
      out.push_back(text::encode(std::vector<char32_t>(cps.begin() + static_cast<std::ptrdiff_t>(start),
                                                       cps.begin() + static_cast<std::ptrdiff_t>(start) + n)));
    }
  }
  return out;
}

std::vector<double> Lexicon::lookup(std::string_view surface) const {
  std::vector<double> out(static_cast<std::size_t>(dim_), 0.0);
  if (surface.empty()) return out;
  const std::string lower = text::to_lower(surface);
  if (auto it = table_.find(lower); it != table_.end()) return it->second;
  if (!subword_) return out;
  std::size_t found = 0;
  for (const auto& gram : char_ngrams(lower, subword_->min_n, subword_->max_n)) {
    auto it = subword_->ngrams.find(gram);
    if (it == subword_->ngrams.end()) continue;
    for (std::size_t d = 0; d < out.size(); ++d) out[d] += it->second[d];
    ++found;
  }
  if (found > 0)
    for (auto& v : out) v /= static_cast<double>(found);
  return out;
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_int(std::string_view s, long& v) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc{} && p == s.data() + s.size();
}

}  // namespace

std::unordered_map<std::string, std::vector<double>> parse_text_vectors(std::istream& in, const std::string& source,
                                                                        int& dim, bool lowercase_keys) {
  std::unordered_map<std::string, std::vector<double>> table;
  dim = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (lineno == 1 && fields.size() == 2) {
      long count = 0;
      long d = 0;
      if (parse_int(fields[0], count) && parse_int(fields[1], d)) continue;
    }
    if (fields.size() < 2) throw ParseError(source, lineno, "vector row has no components");
    const int row_dim = static_cast<int>(fields.size()) - 1;
    if (dim == 0) dim = row_dim;
    if (row_dim != dim) {
      throw ParseError(source, lineno,
                       "dimension " + std::to_string(row_dim) + " differs from " + std::to_string(dim));
    }
    std::vector<double> vec(static_cast<std::size_t>(dim));
    for (int d = 0; d < dim; ++d) {
      const std::string field(fields[static_cast<std::size_t>(d) + 1]);
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(field, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != field.size() || !std::isfinite(v)) {
        throw ParseError(source, lineno, "non-numeric component '" + field + "'");
      }
      vec[static_cast<std::size_t>(d)] = v;
    }
    std::string key(fields[0]);
    try {
      if (lowercase_keys) key = text::to_lower(key);
    } catch (const std::invalid_argument& e) {
      throw ParseError(source, lineno, e.what());
    }
    table.emplace(std::move(key), std::move(vec));
  }
  if (dim == 0) throw ParseError(source, lineno, "no vectors found");
  return table;
}

Lexicon load_text_vectors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open vector file " + path.string());
  int dim = 0;
  auto table = parse_text_vectors(in, path.string(), dim, true);
  return Lexicon(dim, std::move(table));
}

SubwordTable load_subword_vectors(const std::filesystem::path& path, int min_n, int max_n, int expected_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open n-gram file " + path.string());
  int dim = 0;
  SubwordTable t;
  t.min_n = min_n;
  t.max_n = max_n;
  t.ngrams = parse_text_vectors(in, path.string(), dim, true);
  if (dim != expected_dim) {
    throw std::invalid_argument("n-gram dimension " + std::to_string(dim) + " differs from lexicon dimension " +
                                std::to_string(expected_dim));
  }
  return t;
}

}  // namespace postag
