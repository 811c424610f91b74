#include "postag/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "postag/corpus.hpp"

namespace postag {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) throw std::invalid_argument("'" + key + "' expects an integer, got '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) throw std::invalid_argument("'" + key + "' expects an unsigned integer, got '" + v + "'");
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw std::invalid_argument("'" + key + "' expects a number, got '" + v + "'");
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

training::Mode to_mode(const std::string& v) {
  if (v == "source") return training::Mode::source;
  if (v == "target") return training::Mode::target;
  if (v == "joint") return training::Mode::joint;
  throw std::invalid_argument("'mode' must be source, target or joint, got '" + v + "'");
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::istream& in, const std::string& source) {
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source, lineno, "expected key=value");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError(source, lineno, "empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path.string());
  return parse_key_values(in, path.string());
}

void apply(RunConfig& c, const std::map<std::string, std::string>& values) {
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"word_emb_dim", [&](auto& k, auto& v) { c.arch.word_emb_dim = to_int(k, v); }},
      {"char_emb_dim", [&](auto& k, auto& v) { c.arch.char_emb_dim = to_int(k, v); }},
      {"char_hidden", [&](auto& k, auto& v) { c.arch.char_hidden = to_int(k, v); }},
      {"feat_emb_dim", [&](auto& k, auto& v) { c.arch.feat_emb_dim = to_int(k, v); }},
      {"lstm_hidden", [&](auto& k, auto& v) { c.arch.lstm_hidden = to_int(k, v); }},
      {"n_lstm_layers", [&](auto& k, auto& v) { c.arch.n_lstm_layers = to_int(k, v); }},
      {"dropout_lstm", [&](auto& k, auto& v) { c.arch.dropout_lstm = to_double(k, v); }},
      {"dropout_char", [&](auto& k, auto& v) { c.arch.dropout_char = to_double(k, v); }},
      {"dropout_input", [&](auto& k, auto& v) { c.arch.dropout_input = to_double(k, v); }},
      {"lr", [&](auto& k, auto& v) { c.train.lr = to_double(k, v); }},
      {"beta1", [&](auto& k, auto& v) { c.train.beta1 = to_double(k, v); }},
      {"beta2", [&](auto& k, auto& v) { c.train.beta2 = to_double(k, v); }},
      {"eps", [&](auto& k, auto& v) { c.train.eps = to_double(k, v); }},
      {"max_epochs", [&](auto& k, auto& v) { c.train.max_epochs = to_int(k, v); }},
      {"patience", [&](auto& k, auto& v) { c.train.patience = to_int(k, v); }},
      {"lambda", [&](auto& k, auto& v) { c.train.lambda = to_double(k, v); }},
      {"seed", [&](auto& k, auto& v) { c.train.seed = to_u64(k, v); }},
      {"clip_norm", [&](auto& k, auto& v) { c.train.clip_norm = to_double(k, v); }},
      {"mode", [&](auto&, auto& v) { c.train.mode = to_mode(v); }},
  };
  for (const auto& [key, value] : values) {
    auto it = setters.find(key);
    if (it == setters.end()) throw std::invalid_argument("unknown config key '" + key + "'");
    it->second(key, value);
  }
}

std::string to_key_values(const RunConfig& c) {
  std::ostringstream out;
  out << "word_emb_dim=" << c.arch.word_emb_dim << '\n'
      << "char_emb_dim=" << c.arch.char_emb_dim << '\n'
      << "char_hidden=" << c.arch.char_hidden << '\n'
      << "feat_emb_dim=" << c.arch.feat_emb_dim << '\n'
      << "lstm_hidden=" << c.arch.lstm_hidden << '\n'
      << "n_lstm_layers=" << c.arch.n_lstm_layers << '\n'
      << "dropout_lstm=" << num(c.arch.dropout_lstm) << '\n'
      << "dropout_char=" << num(c.arch.dropout_char) << '\n'
      << "dropout_input=" << num(c.arch.dropout_input) << '\n'
      << "lr=" << num(c.train.lr) << '\n'
      << "beta1=" << num(c.train.beta1) << '\n'
      << "beta2=" << num(c.train.beta2) << '\n'
      << "eps=" << num(c.train.eps) << '\n'
      << "max_epochs=" << c.train.max_epochs << '\n'
      << "patience=" << c.train.patience << '\n'
      << "lambda=" << num(c.train.lambda) << '\n'
      << "seed=" << c.train.seed << '\n'
      << "clip_norm=" << num(c.train.clip_norm) << '\n'
      << "mode=" << training::mode_name(c.train.mode) << '\n';
  return out.str();
}

nlohmann::json to_json(const RunConfig& c) {
  std::istringstream in(to_key_values(c));
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : parse_key_values(in, "config")) j[k] = v;
  return j;
}

}  // namespace postag
