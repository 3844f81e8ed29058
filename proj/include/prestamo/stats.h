#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "prestamo/matcher.h"

namespace prestamo {

// I_w = integrated / (integrated + light). Throws UndefinedRate on (0, 0).
double integration_rate(std::uint64_t integrated, std::uint64_t light);
std::optional<double> try_integration_rate(std::uint64_t integrated,
                                           std::uint64_t light);

struct RateRow {
  std::string base;
  WordClass word_class;
  std::uint64_t integrated = 0;
  std::uint64_t light = 0;
  std::optional<double> rate;  // absent means undefined (0, 0)
};

using RateTable = std::vector<RateRow>;

// Rows for the k largest integrated+light totals, ties alphabetical by base.
RateTable top_k_rate_table(const CorpusSummary& summary, std::size_t k,
                           WordClass word_class);

struct WilcoxonResult {
  double w_plus = 0.0;
  double p_value = 1.0;
  std::size_t n_nonzero = 0;
  bool exact = false;
};

// Two-sided signed-rank test; exact tail enumeration up to n = 25 pairs,
// normal approximation with tie and continuity corrections above.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& differences,
                                    std::size_t exact_limit = 25);

double wilcoxon_normal_p(const std::vector<double>& differences);

double bonferroni(double p, std::size_t m);

struct ComparisonRow {
  std::string base;
  std::uint64_t total = 0;  // combined integrated+light over both corpora
  double rate_a = 0.0;
  double rate_b = 0.0;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  double mean_rate_a = 0.0;
  double mean_rate_b = 0.0;
  std::optional<WilcoxonResult> test;  // absent when every difference is zero
  double p_adjusted = 1.0;
  std::size_t bonferroni_m = 1;
};

ComparisonReport compare_domains(const CorpusSummary& a, const CorpusSummary& b,
                                 WordClass word_class, std::size_t k = 50,
                                 std::size_t bonferroni_m = 1);

}  // namespace prestamo
