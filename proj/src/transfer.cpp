#include "postag/transfer.hpp"

#include <stdexcept>

namespace postag::transfer {

namespace {

constexpr const char* kFeaturePrefix = "feature/";

bool regularized(const std::string& name, const std::vector<std::string>& layers) {
  for (const auto& l : layers)
    if (name.compare(0, l.size(), l) == 0) return true;
  return false;
}

[[noreturn]] void mismatch(const std::string& name, const ad::Tensor& target, const ad::Tensor& source) {
  throw std::invalid_argument("tensor '" + name + "': target shape " + target.shape_string() + ", prior shape " +
                              source.shape_string());
}

const Vocabulary* row_vocabulary(const tagger::Alphabets& a, const std::string& name) {
  if (name == "word_emb") return &a.words;
  if (name == "char_emb") return &a.chars;
  const std::string prefix = "feat_emb/";
  if (name.compare(0, prefix.size(), prefix) == 0) {
    for (std::size_t i = 0; i < kFeatureTypeCount; ++i)
      if (name.substr(prefix.size()) == feature_name(feature_type(i))) return &a.features.types[i];
  }
  return nullptr;
}

void copy_row(const ad::Tensor& from, std::size_t from_row, ad::Tensor& to, ad::Tensor& mask, std::size_t to_row) {
  for (std::size_t j = 0; j < to.cols(); ++j) {
    to(to_row, j) = from(from_row, j);
    mask(to_row, j) = 1.0;
  }
}

}  // namespace

Checkpoint to_checkpoint(const tagger::ParamStore& params) {
  Checkpoint c;
  c.kind = kTaggerKind;
  c.config = params.arch.to_json();
  const auto& a = params.alphabets;
  c.alphabets["words"] = a.words.values();
  c.alphabets["chars"] = a.chars.values();
  c.alphabets["tags"] = a.tags.tags();
  for (std::size_t i = 0; i < kFeatureTypeCount; ++i) {
    c.alphabets[kFeaturePrefix + std::string(feature_name(feature_type(i)))] = a.features.types[i].values();
  }
  c.tensors = params.tensors;
  return c;
}

tagger::ParamStore from_checkpoint(const Checkpoint& c) {
  if (c.kind != kTaggerKind) throw CheckpointManifestError("checkpoint holds a '" + c.kind + "' model, not a tagger");
  tagger::ParamStore p;
  try {
    p.arch = tagger::ArchConfig::from_json(c.config);
    p.alphabets.words = Vocabulary(c.alphabets.at("words"));
    p.alphabets.chars = Vocabulary(c.alphabets.at("chars"));
    p.alphabets.tags = TagSet(c.alphabets.at("tags"));
    for (std::size_t i = 0; i < kFeatureTypeCount; ++i) {
      p.alphabets.features.types[i] = Vocabulary(c.alphabets.at(kFeaturePrefix + std::string(feature_name(feature_type(i)))));
    }
  } catch (const std::exception& e) {
    throw CheckpointManifestError(std::string("invalid tagger manifest: ") + e.what());
  }
  // The reference layout comes from a fresh init with the recorded
  // architecture and alphabets; names, order and shapes must agree.
  const auto reference = tagger::init_params(p.arch, p.alphabets, 0);
  if (reference.tensors.size() != c.tensors.size()) {
    throw CheckpointManifestError("checkpoint has " + std::to_string(c.tensors.size()) + " tensors, architecture needs " +
                                  std::to_string(reference.tensors.size()));
  }
  for (std::size_t i = 0; i < reference.tensors.size(); ++i) {
    const auto& want = reference.tensors.entries()[i];
    const auto& got = c.tensors.entries()[i];
    if (want.name != got.name || want.tensor.shape() != got.tensor.shape()) {
      throw CheckpointManifestError("tensor '" + got.name + "' " + got.tensor.shape_string() + " does not match '" +
                                    want.name + "' " + want.tensor.shape_string());
    }
  }
  p.tensors = c.tensors;
  return p;
}

void save_checkpoint(const std::filesystem::path& path, const tagger::ParamStore& params, const nlohmann::json& run) {
  auto c = to_checkpoint(params);
  c.run = run;
  write_checkpoint(path, c);
}

tagger::ParamStore load_checkpoint(const std::filesystem::path& path) { return from_checkpoint(read_checkpoint(path)); }

std::vector<std::string> default_regularized_layers() {
  return {"lstm1/", "lstm2/", "char_lstm/", "word_emb", "char_emb", "feat_emb/", "output/"};
}

std::size_t AlignedPrior::covered() const {
  std::size_t n = 0;
  for (const auto& e : mask)
    for (double v : e.tensor.data()) n += v != 0.0 ? 1 : 0;
  return n;
}

AlignedPrior align_prior(const PriorWeights& prior, const tagger::ParamStore& params,
                         const std::vector<std::string>& layers) {
  AlignedPrior out;
  for (const auto& [name, target] : params.tensors) {
    if (!regularized(name, layers)) continue;
    const ad::Tensor* source = prior.tensors.find(name);
    if (!source) throw std::invalid_argument("prior has no tensor '" + name + "'");
    ad::Tensor values(target.shape(), 0.0);
    ad::Tensor mask(target.shape(), 0.0);

    if (const Vocabulary* tv = row_vocabulary(params.alphabets, name)) {
      const Vocabulary* sv = row_vocabulary(prior.alphabets, name);
      if (source->cols() != target.cols()) mismatch(name, target, *source);
      copy_row(*source, Vocabulary::kUnseen, values, mask, Vocabulary::kUnseen);
      for (int i = 1; i < tv->size(); ++i) {
        if (auto j = sv->find(tv->value(i))) {
          copy_row(*source, static_cast<std::size_t>(*j), values, mask, static_cast<std::size_t>(i));
        }
      }
    } else if (name == "output/W" || name == "output/b") {
      if (source->rows() != target.rows()) mismatch(name, target, *source);
      const auto& tt = params.alphabets.tags;
      for (int k = 0; k < tt.size(); ++k) {
        const auto j = prior.alphabets.tags.find(tt.tag(k));
        if (!j) continue;
        for (std::size_t r = 0; r < target.rows(); ++r) {
          values(r, static_cast<std::size_t>(k)) = (*source)(r, static_cast<std::size_t>(*j));
          mask(r, static_cast<std::size_t>(k)) = 1.0;
        }
      }
    } else {
      if (source->shape() != target.shape()) mismatch(name, target, *source);
      values = *source;
      mask.fill(1.0);
    }
    out.values.add(name, std::move(values));
    out.mask.add(name, std::move(mask));
  }
  return out;
}

double penalty(const TensorMap& params, const AlignedPrior& prior, double lambda, TensorMap* grads) {
  double sum = 0.0;
  for (const auto& [name, ref] : prior.values) {
    const auto& w = params.at(name);
    const auto& m = prior.mask.at(name);
    ad::Tensor* g = grads ? &grads->at(name) : nullptr;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (m[i] == 0.0) continue;
      const double d = w[i] - ref[i];
      sum += d * d;
      if (g) (*g)[i] += 2.0 * lambda * d;
    }
  }
  return lambda * sum;
}

double squared_distance(const TensorMap& params, const AlignedPrior& prior) { return penalty(params, prior, 1.0); }

}  // namespace postag::transfer
