#include "postag/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace postag::evaluation {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

double log_sum_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

}  // namespace

TagStrings tag_strings(const Predictions& predictions) {
  TagStrings out;
  for (const auto& s : predictions.tags) {
    std::vector<std::string> row;
    for (int t : s) row.push_back(predictions.tagset.tag(t));
    out.push_back(std::move(row));
  }
  return out;
}

TagStrings tag_strings(const Corpus& corpus) {
  TagStrings out;
  for (const auto& s : corpus.sentences) {
    std::vector<std::string> row;
    for (const auto& t : s.tokens) {
      if (!t.gold_tag) throw std::invalid_argument("corpus '" + corpus.name + "' has untagged tokens");
      row.push_back(corpus.tagset.tag(*t.gold_tag));
    }
    out.push_back(std::move(row));
  }
  return out;
}

EvalResult evaluate(const Corpus& gold, const TagStrings& predicted) {
  if (predicted.size() != gold.sentences.size()) {
    throw std::invalid_argument("prediction has " + std::to_string(predicted.size()) + " sentences, gold has " +
                                std::to_string(gold.sentences.size()));
  }
  EvalResult r;
  for (const auto& t : gold.tagset.tags()) r.errors[t] = 0;
  for (std::size_t si = 0; si < predicted.size(); ++si) {
    const auto& s = gold.sentences[si];
    if (predicted[si].size() != s.tokens.size()) {
      throw std::invalid_argument("sentence " + std::to_string(si + 1) + " has " + std::to_string(predicted[si].size()) +
                                  " predicted and " + std::to_string(s.tokens.size()) + " gold tokens");
    }
    for (std::size_t ti = 0; ti < s.tokens.size(); ++ti) {
      if (!s.tokens[ti].gold_tag) throw std::invalid_argument("gold corpus has untagged tokens");
      const auto& g = gold.tagset.tag(*s.tokens[ti].gold_tag);
      const auto& p = predicted[si][ti];
      ++r.n_tokens;
      ++r.gold_counts[g];
      if (g == p) {
        ++r.correct;
      } else {
        ++r.errors[g];
        ++r.confusion[{g, p}];
      }
    }
  }
  r.accuracy = r.n_tokens == 0 ? 0.0 : static_cast<double>(r.correct) / static_cast<double>(r.n_tokens);
  return r;
}

EvalResult evaluate(const Corpus& gold, const Corpus& predicted) {
  if (predicted.sentences.size() != gold.sentences.size()) {
    throw std::invalid_argument("prediction has " + std::to_string(predicted.sentences.size()) +
                                " sentences, gold has " + std::to_string(gold.sentences.size()));
  }
  for (std::size_t si = 0; si < gold.sentences.size(); ++si) {
    const auto& g = gold.sentences[si].tokens;
    const auto& p = predicted.sentences[si].tokens;
    if (g.size() != p.size()) {
      throw std::invalid_argument("sentence " + std::to_string(si + 1) + " differs in length");
    }
    for (std::size_t ti = 0; ti < g.size(); ++ti) {
      if (g[ti].surface != p[ti].surface) {
        throw std::invalid_argument("token mismatch in sentence " + std::to_string(si + 1) + ": '" + g[ti].surface +
                                    "' vs '" + p[ti].surface + "'");
      }
    }
  }
  return evaluate(gold, tag_strings(predicted));
}

std::vector<std::pair<std::string, std::size_t>> top_error_tags(const EvalResult& result, std::size_t k) {
  std::vector<std::pair<std::string, std::size_t>> all(result.errors.begin(), result.errors.end());
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

std::string per_tag_csv(const EvalResult& r) {
  std::ostringstream out;
  out << "tag,gold_count,errors,error_rate\n";
  for (const auto& [tag, errors] : r.errors) {
    const auto it = r.gold_counts.find(tag);
    const std::size_t n = it == r.gold_counts.end() ? 0 : it->second;
    out << csv_field(tag) << ',' << n << ',' << errors << ','
        << num(n == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(n)) << '\n';
  }
  return out.str();
}

std::string confusion_csv(const EvalResult& r) {
  std::ostringstream out;
  out << "gold,predicted,count\n";
  for (const auto& [pair, count] : r.confusion) {
    out << csv_field(pair.first) << ',' << csv_field(pair.second) << ',' << count << '\n';
  }
  return out.str();
}

std::string report_text(const EvalResult& r, std::size_t top_k) {
  std::ostringstream out;
  out << "tokens:   " << r.n_tokens << '\n';
  out << "correct:  " << r.correct << '\n';
  out << "accuracy: " << num(r.accuracy) << '\n';
  out << "\nmost frequent errors by gold tag:\n";
  for (const auto& [tag, n] : top_error_tags(r, top_k)) out << "  " << tag << '\t' << n << '\n';
  return out.str();
}

double sign_test(std::size_t a_only, std::size_t b_only) {
  const std::size_t n = a_only + b_only;
  if (n == 0) return 1.0;
  const std::size_t k = std::min(a_only, b_only);
  const double nd = static_cast<double>(n);
  // log P(X <= k) = log sum_i C(n, i) - n log 2
  double log_tail = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= k; ++i) {
    const double id = static_cast<double>(i);
    const double log_c = std::lgamma(nd + 1.0) - std::lgamma(id + 1.0) - std::lgamma(nd - id + 1.0);
    log_tail = log_sum_exp(log_tail, log_c);
  }
  const double p = 2.0 * std::exp(log_tail - nd * std::log(2.0));
  return std::min(1.0, p);
}

SignTestResult binomial_test(const TagStrings& a, const TagStrings& b, const Corpus& gold) {
  const auto g = tag_strings(gold);
  if (a.size() != g.size() || b.size() != g.size()) throw std::invalid_argument("systems are not aligned with gold");
  SignTestResult r;
  for (std::size_t si = 0; si < g.size(); ++si) {
    if (a[si].size() != g[si].size() || b[si].size() != g[si].size()) {
      throw std::invalid_argument("sentence " + std::to_string(si + 1) + " is not aligned with gold");
    }
    for (std::size_t ti = 0; ti < g[si].size(); ++ti) {
      const bool ca = a[si][ti] == g[si][ti];
      const bool cb = b[si][ti] == g[si][ti];
      if (ca && !cb) ++r.a_only;
      if (cb && !ca) ++r.b_only;
    }
  }
  r.p_value = sign_test(r.a_only, r.b_only);
  return r;
}

std::size_t SweepResult::best_index() const {
  if (points.empty()) throw std::logic_error("empty sweep");
  std::size_t best = 0;
  for (std::size_t i = 1; i < points.size(); ++i)
    if (points[i].dev_accuracy > points[best].dev_accuracy) best = i;
  return best;
}

std::string SweepResult::to_csv() const {
  std::ostringstream out;
  out << "lambda,dev_accuracy,test_accuracy,best_epoch\n";
  for (const auto& p : points) {
    out << num(p.lambda) << ',' << num(p.dev_accuracy) << ',' << num(p.test_accuracy) << ',' << p.report.best_epoch
        << '\n';
  }
  return out.str();
}

SweepResult sweep_lambda(const SweepSetup& setup, std::span<const double> lambdas) {
  if (!setup.train || !setup.dev || !setup.test) throw std::invalid_argument("sweep needs train, dev and test corpora");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] >= 0.0) || !std::isfinite(lambdas[i])) throw std::invalid_argument("lambda values must be >= 0");
    if (i > 0 && !(lambdas[i] > lambdas[i - 1])) throw std::invalid_argument("lambda values must be strictly increasing");
  }
  SweepResult out;
  for (double lambda : lambdas) {
    auto config = setup.config;
    config.lambda = lambda;
    config.mode = training::Mode::target;
    auto run = training::train(*setup.train, *setup.dev, setup.lexicons, setup.arch, config, setup.prior,
                               setup.options);
    SweepPoint p;
    p.lambda = lambda;
    p.dev_accuracy = run.report.best_dev_accuracy;
    p.test_accuracy = training::accuracy(run.model, *setup.test, setup.lexicons);
    p.report = std::move(run.report);
    out.points.push_back(std::move(p));
  }
  return out;
}

}  // namespace postag::evaluation
