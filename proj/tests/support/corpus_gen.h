#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "prestamo/features.h"
#include "prestamo/ingest.h"
#include "prestamo/morphology.h"
#include "prestamo/regression.h"

namespace testsupport {

// Shipped pair tables, exclusions attached, expanded. Loanwords first.
std::vector<prestamo::ExpandedLexicon> load_shipped_lexicons(
    const std::string& data_dir);

// Synthetic posts mixing filler, punctuation, clitics, hashtags, mentions,
// urls, case noise, decomposed accents, and planted lexicon material
// (integrated surfaces, complete light phrases, and broken phrases).
std::vector<prestamo::Post> random_posts(
    const std::vector<prestamo::ExpandedLexicon>& lexicons, std::uint64_t seed,
    std::size_t count);

struct PlantedWord {
  std::string base;
  std::uint64_t integrated_a = 0;
  std::uint64_t light_a = 0;
  std::uint64_t integrated_b = 0;
  std::uint64_t light_b = 0;
};

struct TwoCorpusFixture {
  std::vector<prestamo::Post> corpus_a;
  std::vector<prestamo::Post> corpus_b;
  std::vector<PlantedWord> words;
  double mean_rate_a = 0.0;
  double mean_rate_b = 0.0;
};

// Twenty loanword bases with occurrence counts planted so the per-word rates
// average 0.91 in corpus A and 0.82 in corpus B, every per-word difference
// positive.
TwoCorpusFixture build_two_corpus_fixture(
    const std::vector<prestamo::ExpandedLexicon>& lexicons);

struct PlantedRegression {
  std::vector<prestamo::Observation> observations;
  std::unordered_map<std::string, prestamo::AuthorProfile> profiles;
  std::vector<std::pair<std::string, double>> planted;  // column -> true beta
};

// Outcomes drawn from a known logistic model over mention, hashtag, region,
// and language bin; scalar covariates held constant so their columns are
// inert. Authors stay under the rare threshold, words well above it.
PlantedRegression build_planted_regression(std::uint64_t seed,
                                           std::size_t n_authors,
                                           std::size_t records_per_author,
                                           std::size_t n_words);

// Writes `count` JSONL post lines; returns bytes written.
std::uint64_t write_throughput_corpus(const std::string& path,
                                      std::size_t count, std::uint64_t seed);

// VmHWM from /proc/self/status, in kilobytes; 0 when unavailable.
std::size_t peak_rss_kb();

}  // namespace testsupport
