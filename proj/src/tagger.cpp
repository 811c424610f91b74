#include "postag/tagger.hpp"

#include <cmath>
#include <stdexcept>

#include "postag/text.hpp"

namespace postag::tagger {

namespace {

void require_positive(int v, const char* name) {
  if (v <= 0) throw std::invalid_argument(std::string("architecture: ") + name + " must be positive");
}

void require_rate(double p, const char* name) {
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument(std::string("architecture: ") + name + " must be in [0, 1)");
}

std::string feature_table(std::size_t i) { return "feat_emb/" + std::string(feature_name(feature_type(i))); }

ad::Tensor uniform(std::vector<std::size_t> shape, double limit, Rng& rng) {
  ad::Tensor t(std::move(shape), 0.0);
  for (auto& v : t.data()) v = rng.uniform(-limit, limit);
  return t;
}

ad::Tensor glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  return uniform({fan_in, fan_out}, std::sqrt(6.0 / static_cast<double>(fan_in + fan_out)), rng);
}

void add_lstm(TensorMap& t, const std::string& prefix, std::size_t input, std::size_t hidden, Rng& rng) {
  for (const char* dir : {"fw", "bw"}) {
    const std::string p = prefix + "/" + dir;
    t.add(p + "/W_x", glorot(input, 4 * hidden, rng));
    t.add(p + "/W_h", glorot(hidden, 4 * hidden, rng));
    ad::Tensor bias = ad::Tensor::matrix(1, 4 * hidden);
    const auto forget = static_cast<std::size_t>(Gate::forget) * hidden;
    for (std::size_t j = 0; j < hidden; ++j) bias[forget + j] = 1.0;
    t.add(p + "/b", std::move(bias));
  }
}

constexpr double kEmbeddingInit = 0.05;

}  // namespace

void ArchConfig::validate() const {
  require_positive(word_emb_dim, "word_emb_dim");
  require_positive(char_emb_dim, "char_emb_dim");
  require_positive(char_hidden, "char_hidden");
  require_positive(feat_emb_dim, "feat_emb_dim");
  require_positive(lstm_hidden, "lstm_hidden");
  if (n_lstm_layers != 2) throw std::invalid_argument("architecture: n_lstm_layers must be 2");
  require_rate(dropout_lstm, "dropout_lstm");
  require_rate(dropout_char, "dropout_char");
  require_rate(dropout_input, "dropout_input");
  for (int d : lexicon_dims) require_positive(d, "lexicon dimension");
}

int ArchConfig::input_dim() const {
  int d = word_emb_dim + 2 * char_hidden + feat_emb_dim;
  for (int l : lexicon_dims) d += l;
  return d;
}

nlohmann::json ArchConfig::to_json() const {
  return {{"word_emb_dim", word_emb_dim},   {"char_emb_dim", char_emb_dim},   {"char_hidden", char_hidden},
          {"feat_emb_dim", feat_emb_dim},   {"lstm_hidden", lstm_hidden},     {"n_lstm_layers", n_lstm_layers},
          {"dropout_lstm", dropout_lstm},   {"dropout_char", dropout_char},   {"dropout_input", dropout_input},
          {"lexicon_dims", lexicon_dims}};
}

ArchConfig ArchConfig::from_json(const nlohmann::json& j) {
  ArchConfig a;
  a.word_emb_dim = j.at("word_emb_dim").get<int>();
  a.char_emb_dim = j.at("char_emb_dim").get<int>();
  a.char_hidden = j.at("char_hidden").get<int>();
  a.feat_emb_dim = j.at("feat_emb_dim").get<int>();
  a.lstm_hidden = j.at("lstm_hidden").get<int>();
  a.n_lstm_layers = j.at("n_lstm_layers").get<int>();
  a.dropout_lstm = j.at("dropout_lstm").get<double>();
  a.dropout_char = j.at("dropout_char").get<double>();
  a.dropout_input = j.at("dropout_input").get<double>();
  a.lexicon_dims = j.at("lexicon_dims").get<std::vector<int>>();
  a.validate();
  return a;
}

void Alphabets::observe(const Corpus& corpus) {
  for (const auto& s : corpus.sentences) {
    for (const auto& t : s.tokens) {
      words.add(text::to_lower(t.surface));
      for (char32_t cp : text::decode(t.surface)) chars.add(text::encode(cp));
    }
  }
  features.observe(corpus);
}

Alphabets build_alphabets(const Corpus& train, std::span<const Corpus* const> extra) {
  Alphabets a;
  a.observe(train);
  for (const Corpus* c : extra) a.observe(*c);
  a.tags = train.tagset;
  return a;
}

std::vector<std::string> lstm_names() { return {"char_lstm", "lstm1", "lstm2"}; }

std::vector<std::string> lstm_bias_names() {
  std::vector<std::string> out;
  for (const auto& l : lstm_names())
    for (const char* dir : {"fw", "bw"}) out.push_back(l + "/" + dir + "/b");
  return out;
}

ParamStore init_params(const ArchConfig& arch, Alphabets alphabets, Rng& rng) {
  arch.validate();
  if (alphabets.tags.size() < 1) throw std::invalid_argument("tagger needs at least one tag");
  ParamStore p{arch, std::move(alphabets), {}};
  auto& t = p.tensors;
  const auto u = [](int v) { return static_cast<std::size_t>(v); };
  t.add("word_emb", uniform({u(p.alphabets.words.size()), u(arch.word_emb_dim)}, kEmbeddingInit, rng));
  t.add("char_emb", uniform({u(p.alphabets.chars.size()), u(arch.char_emb_dim)}, kEmbeddingInit, rng));
  for (std::size_t i = 0; i < kFeatureTypeCount; ++i) {
    t.add(feature_table(i),
          uniform({u(p.alphabets.features.types[i].size()), u(arch.feat_emb_dim)}, kEmbeddingInit, rng));
  }
  add_lstm(t, "char_lstm", u(arch.char_emb_dim), u(arch.char_hidden), rng);
  add_lstm(t, "lstm1", u(arch.input_dim()), u(arch.lstm_hidden), rng);
  add_lstm(t, "lstm2", 2 * u(arch.lstm_hidden), u(arch.lstm_hidden), rng);
  t.add("output/W", glorot(2 * u(arch.lstm_hidden), u(p.alphabets.tags.size()), rng));
  t.add("output/b", ad::Tensor::matrix(1, u(p.alphabets.tags.size())));
  return p;
}

ParamStore init_params(const ArchConfig& arch, Alphabets alphabets, std::uint64_t seed) {
  Rng rng(seed);
  return init_params(arch, std::move(alphabets), rng);
}

std::vector<int> char_indices(const ParamStore& params, std::string_view surface) {
  std::vector<int> out;
  for (char32_t cp : text::decode(surface)) out.push_back(params.alphabets.chars.index(text::encode(cp)));
  return out;
}

EncodedSentence encode_sentence(const ParamStore& params, const Sentence& sentence,
                                std::span<const Lexicon> lexicons) {
  const auto& dims = params.arch.lexicon_dims;
  if (lexicons.size() != dims.size()) {
    throw std::invalid_argument("model expects " + std::to_string(dims.size()) + " lexicons, got " +
                                std::to_string(lexicons.size()));
  }
  std::size_t lex_width = 0;
  for (std::size_t i = 0; i < lexicons.size(); ++i) {
    if (lexicons[i].dim() != dims[i]) {
      throw std::invalid_argument("lexicon " + std::to_string(i) + " has dimension " +
                                  std::to_string(lexicons[i].dim()) + ", model expects " + std::to_string(dims[i]));
    }
    lex_width += static_cast<std::size_t>(dims[i]);
  }
  if (sentence.tokens.empty()) throw std::invalid_argument("cannot encode an empty sentence");
  EncodedSentence e;
  const auto T = sentence.tokens.size();
  if (lex_width > 0) e.lexicon = ad::Tensor::matrix(T, lex_width);
  for (std::size_t t = 0; t < T; ++t) {
    const auto& surface = sentence.tokens[t].surface;
    const auto bundle = extract(surface);
    e.words.push_back(params.alphabets.words.index(bundle.lower));
    e.chars.push_back(char_indices(params, surface));
    e.features.push_back(encode(bundle, params.alphabets.features));
    std::size_t off = 0;
    for (const auto& lex : lexicons) {
      const auto v = lex.lookup(surface);
      std::copy(v.begin(), v.end(), e.lexicon.row(t).begin() + static_cast<std::ptrdiff_t>(off));
      off += v.size();
    }
  }
  return e;
}

std::vector<int> gold_indices(const ParamStore& params, const Sentence& sentence, const TagSet& corpus_tags) {
  std::vector<int> gold;
  gold.reserve(sentence.tokens.size());
  for (const auto& t : sentence.tokens) {
    if (!t.gold_tag) throw std::invalid_argument("token '" + t.surface + "' has no gold tag");
    const auto& name = corpus_tags.tag(*t.gold_tag);
    const auto idx = params.alphabets.tags.find(name);
    if (!idx) throw std::invalid_argument("gold tag '" + name + "' is not in the model tagset");
    gold.push_back(*idx);
  }
  return gold;
}

Network::Network(ad::Tape& tape, const ParamStore& params, TensorMap* grads)
    : tape_(tape), params_(params), grads_(grads) {}

ad::Var Network::param(const std::string& name) {
  if (auto it = leaves_.find(name); it != leaves_.end()) return it->second;
  const auto& value = params_.tensors.at(name);
  const ad::Var v = grads_ ? tape_.parameter(value, grads_->at(name)) : tape_.reference(value);
  leaves_.emplace(name, v);
  return v;
}

ad::Var Network::lstm(const std::string& prefix, ad::Var inputs, bool reverse) {
  const auto H = params_.tensors.at(prefix + "/W_h").rows();
  const ad::Var w_h = param(prefix + "/W_h");
  const ad::Var projected = tape_.add(tape_.matmul(inputs, param(prefix + "/W_x")), param(prefix + "/b"));
  const std::size_t T = tape_.value(inputs).rows();
  std::vector<ad::Var> outputs(T);
  ad::Var h, c;
  for (std::size_t step = 0; step < T; ++step) {
    const std::size_t t = reverse ? T - 1 - step : step;
    ad::Var z = tape_.row(projected, t);
    if (step > 0) z = tape_.add(z, tape_.matmul(h, w_h));
    const auto gate = [&](Gate g) { return tape_.slice_cols(z, static_cast<std::size_t>(g) * H, H); };
    const ad::Var i = tape_.sigmoid(gate(Gate::input));
    const ad::Var g = tape_.tanh(gate(Gate::cell));
    const ad::Var o = tape_.sigmoid(gate(Gate::output));
    c = step > 0 ? tape_.add(tape_.mul(tape_.sigmoid(gate(Gate::forget)), c), tape_.mul(i, g)) : tape_.mul(i, g);
    h = tape_.mul(o, tape_.tanh(c));
    outputs[t] = h;
  }
  return tape_.stack_rows(outputs);
}

ad::Var Network::bilstm(const std::string& prefix, ad::Var inputs) {
  return tape_.concat({lstm(prefix + "/fw", inputs, false), lstm(prefix + "/bw", inputs, true)});
}

ad::Var Network::encode_chars(std::span<const int> chars) {
  if (chars.empty()) throw std::invalid_argument("cannot encode an empty character sequence");
  const ad::Var emb = tape_.embedding(param("char_emb"), chars);
  const ad::Var fw = lstm("char_lstm/fw", emb, false);
  const ad::Var bw = lstm("char_lstm/bw", emb, true);
  return tape_.concat({tape_.row(fw, chars.size() - 1), tape_.row(bw, 0)});
}

ad::Var Network::assemble_input(const EncodedSentence& s, bool train, Rng& rng) {
  const auto& arch = params_.arch;
  std::vector<ad::Var> channels;
  channels.push_back(tape_.embedding(param("word_emb"), s.words));

  std::vector<ad::Var> char_rows;
  char_rows.reserve(s.size());
  for (const auto& chars : s.chars) char_rows.push_back(encode_chars(chars));
  channels.push_back(tape_.dropout(tape_.stack_rows(char_rows), arch.dropout_char, train, rng));

  ad::Var features;
  std::vector<int> ids(s.size());
  for (std::size_t i = 0; i < kFeatureTypeCount; ++i) {
    for (std::size_t t = 0; t < s.size(); ++t) ids[t] = s.features[t][i];
    const ad::Var e = tape_.embedding(param(feature_table(i)), ids);
    features = i == 0 ? e : tape_.add(features, e);
  }
  channels.push_back(features);

  if (!s.lexicon.empty()) channels.push_back(tape_.reference(s.lexicon));
  return tape_.dropout(tape_.concat(channels), arch.dropout_input, train, rng);
}

ad::Var Network::logits(const EncodedSentence& s, bool train, Rng& rng) {
  const double p = params_.arch.dropout_lstm;
  ad::Var x = assemble_input(s, train, rng);
  x = tape_.dropout(bilstm("lstm1", x), p, train, rng);
  x = tape_.dropout(bilstm("lstm2", x), p, train, rng);
  return tape_.add(tape_.matmul(x, param("output/W")), param("output/b"));
}

ad::Tensor forward_tagger(const ParamStore& params, const EncodedSentence& sentence, bool train, Rng& rng) {
  ad::Tape tape;
  Network net(tape, params);
  return tape.value(tape.softmax(net.logits(sentence, train, rng)));
}

double loss(const ParamStore& params, const EncodedSentence& sentence, std::span<const int> gold, bool train,
            Rng& rng, TensorMap* grads) {
  ad::Tape tape;
  Network net(tape, params, grads);
  const ad::Var l = tape.softmax_cross_entropy(net.logits(sentence, train, rng), gold);
  if (grads) tape.backward(l);
  return tape.value(l)[0];
}

std::vector<int> argmax_rows(const ad::Tensor& probs) {
  std::vector<int> out(probs.rows(), 0);
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    const auto r = probs.row(i);
    std::size_t best = 0;
    for (std::size_t j = 1; j < r.size(); ++j)
      if (r[j] > r[best]) best = j;
    out[i] = static_cast<int>(best);
  }
  return out;
}

std::vector<int> decode(const ParamStore& params, const EncodedSentence& sentence) {
  Rng unused(0);
  return argmax_rows(forward_tagger(params, sentence, false, unused));
}

std::vector<std::vector<int>> tag_corpus(const ParamStore& params, const Corpus& corpus,
                                         std::span<const Lexicon> lexicons) {
  std::vector<std::vector<int>> out;
  out.reserve(corpus.sentences.size());
  for (const auto& s : corpus.sentences) out.push_back(decode(params, encode_sentence(params, s, lexicons)));
  return out;
}

}  // namespace postag::tagger
