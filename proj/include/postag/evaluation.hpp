// Token accuracy, per-tag error analysis, the lambda sweep and the paired
// sign test.
#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "postag/corpus.hpp"
#include "postag/lexicon.hpp"
#include "postag/tagger.hpp"
#include "postag/training.hpp"
#include "postag/transfer.hpp"

namespace postag::evaluation {

/// Predicted tag strings, one list per sentence.
using TagStrings = std::vector<std::vector<std::string>>;

struct EvalResult {
  std::size_t n_tokens = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  /// Errors attributed to the gold tag; every gold tag has an entry.
  std::map<std::string, std::size_t> errors;
  std::map<std::string, std::size_t> gold_counts;
  /// (gold, predicted) -> count over the wrong tokens.
  std::map<std::pair<std::string, std::string>, std::size_t> confusion;
};

TagStrings tag_strings(const Predictions& predictions);
/// Gold tags of a fully tagged corpus as strings.
TagStrings tag_strings(const Corpus& corpus);

/// Throws std::invalid_argument when `predicted` is not aligned with `gold`
/// or gold has untagged tokens.
EvalResult evaluate(const Corpus& gold, const TagStrings& predicted);
/// Compares two corpora token by token; surfaces must agree.
EvalResult evaluate(const Corpus& gold, const Corpus& predicted);

/// The k gold tags with the most errors; ties by tag string.
std::vector<std::pair<std::string, std::size_t>> top_error_tags(const EvalResult& result, std::size_t k);

/// tag,gold_count,errors,error_rate
std::string per_tag_csv(const EvalResult& result);
/// gold,predicted,count
std::string confusion_csv(const EvalResult& result);
std::string report_text(const EvalResult& result, std::size_t top_k = 6);

/// Exact two-sided sign test: p = min(1, 2 * P(X <= min(a, b))) for
/// X ~ Binomial(a + b, 1/2). Returns 1 when a + b == 0.
double sign_test(std::size_t a_only, std::size_t b_only);

struct SignTestResult {
  std::size_t a_only = 0;  // tokens only system A gets right
  std::size_t b_only = 0;
  double p_value = 1.0;
};

/// Paired comparison of two systems on the same gold corpus.
SignTestResult binomial_test(const TagStrings& a, const TagStrings& b, const Corpus& gold);

struct SweepPoint {
  double lambda = 0.0;
  double dev_accuracy = 0.0;
  double test_accuracy = 0.0;
  training::TrainReport report;
};

struct SweepResult {
  std::vector<SweepPoint> points;

  /// Index of the highest dev accuracy; ties go to the smaller lambda.
  std::size_t best_index() const;
  /// lambda,dev_accuracy,test_accuracy,best_epoch
  std::string to_csv() const;
};

struct SweepSetup {
  const Corpus* train = nullptr;
  const Corpus* dev = nullptr;
  const Corpus* test = nullptr;
  std::span<const Lexicon> lexicons;
  tagger::ArchConfig arch;
  training::TrainConfig config;
  const transfer::PriorWeights* prior = nullptr;
  training::TrainOptions options;
};

/// One training run per lambda with the same seed. Throws
/// std::invalid_argument unless lambdas are strictly increasing and >= 0.
SweepResult sweep_lambda(const SweepSetup& setup, std::span<const double> lambdas);

}  // namespace postag::evaluation
