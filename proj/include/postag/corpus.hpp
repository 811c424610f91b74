// Tagged corpora: the token data model, the tag inventory and the
// two-column TSV reader/writer.
#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace postag {

/// A problem with user-supplied input: an unreadable file or bad content.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public InputError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : InputError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct Token {
  std::string surface;
  std::optional<int> gold_tag;
};

struct Sentence {
  std::vector<Token> tokens;

  std::size_t size() const { return tokens.size(); }
};

/// Ordered tag inventory; tags(i) and index() are inverse bijections.
class TagSet {
 public:
  TagSet() = default;
  explicit TagSet(const std::vector<std::string>& tags);

  /// Returns the index of `tag`, appending it if new.
  int add(std::string_view tag);
  std::optional<int> find(std::string_view tag) const;
  /// Throws std::out_of_range for unknown tags.
  int index(std::string_view tag) const;
  const std::string& tag(int i) const { return tags_.at(static_cast<std::size_t>(i)); }

  const std::vector<std::string>& tags() const { return tags_; }
  int size() const { return static_cast<int>(tags_.size()); }
  bool empty() const { return tags_.empty(); }

  bool operator==(const TagSet& other) const { return tags_ == other.tags_; }

 private:
  std::vector<std::string> tags_;
  std::unordered_map<std::string, int> index_;
};

struct Corpus {
  std::string name;
  std::vector<Sentence> sentences;
  TagSet tagset;

  std::size_t token_count() const;
  bool fully_tagged() const;
};

/// Per-token predicted tags together with the inventory they index into.
struct Predictions {
  TagSet tagset;
  std::vector<std::vector<int>> tags;
};

/// Throws std::invalid_argument when a corpus invariant is violated.
void validate(const Corpus& corpus);

/// Parses the TSV format. When `pinned` is given the tag order is taken from
/// it and tags outside it are a parse error.
Corpus parse_conll(std::istream& in, const std::string& name, const TagSet* pinned = nullptr);
Corpus read_conll(const std::filesystem::path& path, const TagSet* pinned = nullptr);

void write_conll(std::ostream& out, const Corpus& corpus, const Predictions* predictions = nullptr);
void write_conll(const std::filesystem::path& path, const Corpus& corpus,
                 const Predictions* predictions = nullptr);

/// Sentences of `a` followed by those of `b`; tagset is a's tags then b's novel ones.
Corpus merge(const Corpus& a, const Corpus& b);

/// One tag per line, blank lines ignored.
TagSet read_tagset(const std::filesystem::path& path);

}  // namespace postag
