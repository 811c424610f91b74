// Generated corpora for tests and demos: an HMM-style generator with three
// latent phrase states, tag-dependent word emissions and words whose
// spelling (suffix, capitalization, digits) correlates with their tag.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "postag/corpus.hpp"
#include "postag/random.hpp"

namespace postag::synthetic {

struct Generator {
  std::vector<std::string> tags;
  std::vector<std::string> words;
  /// state -> state
  std::vector<std::vector<double>> state_transitions;
  /// state -> tag
  std::vector<std::vector<double>> tag_given_state;
  /// tag -> word
  std::vector<std::vector<double>> word_given_tag;
  int min_length = 5;
  int max_length = 12;

  Corpus sample(std::size_t n_sentences, Rng& rng, const std::string& name) const;
};

/// Source-domain generator over `n_words` words and `n_tags` tags.
Generator make_source(std::uint64_t seed, int n_words = 200, int n_tags = 8);

/// Target-domain variant: a fraction `perturb` of the words move their
/// emission mass to a different tag, `extra_words` new words appear under
/// `extra_tags` new tags.
Generator perturb(const Generator& source, std::uint64_t seed, double perturb = 0.2, int extra_words = 5,
                  int extra_tags = 2);

struct TwoDomainFixture {
  Corpus source_train;
  Corpus source_dev;
  Corpus target_train;
  Corpus target_dev;
  Corpus target_test;
};

/// 2000 source training sentences, 200 source dev, and 40 / 100 / 100
/// target train / dev / test sentences.
TwoDomainFixture make_two_domain_fixture(std::uint64_t seed);

}  // namespace postag::synthetic
