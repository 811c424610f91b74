#include "postag/corpus.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "postag/text.hpp"

namespace postag {

TagSet::TagSet(const std::vector<std::string>& tags) {
  for (const auto& t : tags) {
    if (index_.count(t) != 0) throw std::invalid_argument("duplicate tag '" + t + "'");
    add(t);
  }
}

int TagSet::add(std::string_view tag) {
  const std::string key(tag);
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  const int i = static_cast<int>(tags_.size());
  tags_.push_back(key);
  index_.emplace(key, i);
  return i;
}

std::optional<int> TagSet::find(std::string_view tag) const {
  auto it = index_.find(std::string(tag));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int TagSet::index(std::string_view tag) const {
  auto i = find(tag);
  if (!i) throw std::out_of_range("unknown tag '" + std::string(tag) + "'");
  return *i;
}

std::size_t Corpus::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.tokens.size();
  return n;
}

bool Corpus::fully_tagged() const {
  for (const auto& s : sentences)
    for (const auto& t : s.tokens)
      if (!t.gold_tag) return false;
  return true;
}

namespace {

bool has_space(std::string_view s) {
  for (char c : s)
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') return true;
  return false;
}

}  // namespace

void validate(const Corpus& corpus) {
  for (std::size_t si = 0; si < corpus.sentences.size(); ++si) {
    const auto& s = corpus.sentences[si];
    if (s.tokens.empty()) {
      throw std::invalid_argument("sentence " + std::to_string(si) + " is empty");
    }
    for (const auto& t : s.tokens) {
      if (t.surface.empty() || has_space(t.surface)) {
        throw std::invalid_argument("invalid token surface in sentence " + std::to_string(si));
      }
      if (t.gold_tag && (*t.gold_tag < 0 || *t.gold_tag >= corpus.tagset.size())) {
        throw std::invalid_argument("gold tag index out of range in sentence " + std::to_string(si));
      }
    }
  }
}

Corpus parse_conll(std::istream& in, const std::string& name, const TagSet* pinned) {
  Corpus corpus;
  corpus.name = name;
  if (pinned) corpus.tagset = *pinned;

  Sentence current;
  std::string line;
  std::size_t lineno = 0;
  bool saw_content = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (!current.tokens.empty()) {
        corpus.sentences.push_back(std::move(current));
        current = Sentence{};
      }
      continue;
    }
    saw_content = true;
    const auto tab = line.find('\t');
    std::string_view surface = std::string_view(line).substr(0, tab);
    std::optional<std::string_view> tag;
    if (tab != std::string::npos) {
      tag = std::string_view(line).substr(tab + 1);
      if (tag->find('\t') != std::string_view::npos) {
        throw ParseError(name, lineno, "expected at most 2 tab-separated columns");
      }
      if (tag->empty()) throw ParseError(name, lineno, "empty tag column");
    }
    if (surface.empty()) throw ParseError(name, lineno, "empty token");
    if (has_space(surface)) throw ParseError(name, lineno, "token contains whitespace");
    try {
      text::decode(surface);
      if (tag) text::decode(*tag);
    } catch (const std::invalid_argument& e) {
      throw ParseError(name, lineno, e.what());
    }
    Token tok{std::string(surface), std::nullopt};
    if (tag) {
      if (pinned) {
        auto idx = corpus.tagset.find(*tag);
        if (!idx) throw ParseError(name, lineno, "tag '" + std::string(*tag) + "' not in pinned tagset");
        tok.gold_tag = *idx;
      } else {
        tok.gold_tag = corpus.tagset.add(*tag);
      }
    }
    current.tokens.push_back(std::move(tok));
  }
  if (!current.tokens.empty()) corpus.sentences.push_back(std::move(current));
  if (!saw_content) throw ParseError(name, lineno, "corpus is empty");
  return corpus;
}

Corpus read_conll(const std::filesystem::path& path, const TagSet* pinned) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open corpus file " + path.string());
  return parse_conll(in, path.string(), pinned);
}

void write_conll(std::ostream& out, const Corpus& corpus, const Predictions* predictions) {
  if (predictions && predictions->tags.size() != corpus.sentences.size()) {
    throw std::invalid_argument("predictions cover " + std::to_string(predictions->tags.size()) +
                                " sentences, corpus has " + std::to_string(corpus.sentences.size()));
  }
  for (std::size_t si = 0; si < corpus.sentences.size(); ++si) {
    const auto& s = corpus.sentences[si];
    if (predictions && predictions->tags[si].size() != s.tokens.size()) {
      throw std::invalid_argument("predictions for sentence " + std::to_string(si) +
                                  " are not aligned with its tokens");
    }
    if (si > 0) out << '\n';
    for (std::size_t ti = 0; ti < s.tokens.size(); ++ti) {
      const auto& t = s.tokens[ti];
      out << t.surface;
      if (predictions) {
        out << '\t' << predictions->tagset.tag(predictions->tags[si][ti]);
      } else if (t.gold_tag) {
        out << '\t' << corpus.tagset.tag(*t.gold_tag);
      }
      out << '\n';
    }
  }
}

void write_conll(const std::filesystem::path& path, const Corpus& corpus, const Predictions* predictions) {
  // Render first so that an alignment error leaves no partial file behind.
  std::ostringstream buffer;
  write_conll(buffer, corpus, predictions);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << buffer.str();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

Corpus merge(const Corpus& a, const Corpus& b) {
  Corpus out;
  out.name = a.name + "+" + b.name;
  out.tagset = a.tagset;
  std::vector<int> remap;
  remap.reserve(static_cast<std::size_t>(b.tagset.size()));
  for (const auto& t : b.tagset.tags()) remap.push_back(out.tagset.add(t));
  out.sentences = a.sentences;
  out.sentences.reserve(a.sentences.size() + b.sentences.size());
  for (const auto& s : b.sentences) {
    Sentence copy = s;
    for (auto& t : copy.tokens)
      if (t.gold_tag) t.gold_tag = remap[static_cast<std::size_t>(*t.gold_tag)];
    out.sentences.push_back(std::move(copy));
  }
  return out;
}

TagSet read_tagset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open tagset file " + path.string());
  std::vector<std::string> tags;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) tags.push_back(line);
  }
  return TagSet(tags);
}

}  // namespace postag
