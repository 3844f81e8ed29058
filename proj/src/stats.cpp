#include "prestamo/stats.h"

#include <algorithm>
#include <cmath>

#include "prestamo/error.h"

namespace prestamo {

namespace {

struct RankedDifferences {
  std::vector<double> ranks;       // of |d|, average ranks for ties
  std::vector<bool> positive;      // sign of each kept difference
  std::vector<std::size_t> ties;   // tie group sizes
};

RankedDifferences rank_differences(const std::vector<double>& differences) {
  std::vector<double> kept;
  for (double d : differences) {
    if (d != 0.0) kept.push_back(d);
  }
  if (kept.empty()) {
    throw Error(ErrorCode::AllZeroDifferences,
                "signed-rank test needs at least one nonzero difference");
  }

  std::vector<std::size_t> order(kept.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(kept[a]) < std::abs(kept[b]);
  });

  RankedDifferences out;
  out.ranks.resize(kept.size());
  out.positive.resize(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) out.positive[i] = kept[i] > 0.0;

  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() &&
           std::abs(kept[order[j + 1]]) == std::abs(kept[order[i]])) {
      ++j;
    }
    double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) out.ranks[order[k]] = avg;
    out.ties.push_back(j - i + 1);
    i = j + 1;
  }
  return out;
}

double w_plus_of(const RankedDifferences& r) {
  double w = 0.0;
  for (std::size_t i = 0; i < r.ranks.size(); ++i) {
    if (r.positive[i]) w += r.ranks[i];
  }
  return w;
}

// Exact null distribution of 2*W+ by dynamic programming over doubled ranks
// (doubling makes half-integer average ranks integral).
double exact_two_sided_p(const RankedDifferences& r, double w_plus) {
  std::vector<long> doubled;
  long total = 0;
  for (double rank : r.ranks) {
    long d = std::lround(2.0 * rank);
    doubled.push_back(d);
    total += d;
  }

  std::vector<double> counts(static_cast<std::size_t>(total) + 1, 0.0);
  counts[0] = 1.0;
  long reached = 0;
  for (long d : doubled) {
    reached += d;
    for (long s = reached; s >= d; --s) {
      counts[s] += counts[s - d];
    }
  }

  double n_assignments = std::ldexp(1.0, static_cast<int>(r.ranks.size()));
  long w2 = std::lround(2.0 * w_plus);
  double below = 0.0, above = 0.0;
  for (long s = 0; s <= total; ++s) {
    if (s <= w2) below += counts[s];
    if (s >= w2) above += counts[s];
  }
  double p = 2.0 * std::min(below, above) / n_assignments;
  return std::min(1.0, p);
}

double normal_two_sided_p(const RankedDifferences& r, double w_plus) {
  double n = static_cast<double>(r.ranks.size());
  double mu = n * (n + 1.0) / 4.0;
  double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
  for (std::size_t t : r.ties) {
    double td = static_cast<double>(t);
    var -= (td * td * td - td) / 48.0;
  }
  if (var <= 0.0) return 1.0;

  double diff = w_plus - mu;
  if (diff == 0.0) return 1.0;
  double corrected = diff > 0.0 ? diff - 0.5 : diff + 0.5;
  double z = corrected / std::sqrt(var);
  return std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
}

}  // namespace

double integration_rate(std::uint64_t integrated, std::uint64_t light) {
  if (integrated + light == 0) {
    throw Error(ErrorCode::UndefinedRate,
                "integration rate is undefined when both counts are zero");
  }
  return static_cast<double>(integrated) /
         static_cast<double>(integrated + light);
}

std::optional<double> try_integration_rate(std::uint64_t integrated,
                                           std::uint64_t light) {
  if (integrated + light == 0) return std::nullopt;
  return integration_rate(integrated, light);
}

RateTable top_k_rate_table(const CorpusSummary& summary, std::size_t k,
                           WordClass word_class) {
  RateTable rows;
  for (const auto& [key, counts] : summary) {
    if (key.first != word_class) continue;
    RateRow row;
    row.base = key.second;
    row.word_class = key.first;
    row.integrated = counts.integrated;
    row.light = counts.light;
    row.rate = try_integration_rate(counts.integrated, counts.light);
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end(), [](const RateRow& a, const RateRow& b) {
    std::uint64_t ta = a.integrated + a.light, tb = b.integrated + b.light;
    if (ta != tb) return ta > tb;
    return a.base < b.base;
  });
  if (rows.size() > k) rows.resize(k);
  return rows;
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& differences,
                                    std::size_t exact_limit) {
  RankedDifferences ranked = rank_differences(differences);
  WilcoxonResult result;
  result.n_nonzero = ranked.ranks.size();
  result.w_plus = w_plus_of(ranked);
  result.exact = ranked.ranks.size() <= exact_limit;
  result.p_value = result.exact ? exact_two_sided_p(ranked, result.w_plus)
                                : normal_two_sided_p(ranked, result.w_plus);
  return result;
}

double wilcoxon_normal_p(const std::vector<double>& differences) {
  RankedDifferences ranked = rank_differences(differences);
  return normal_two_sided_p(ranked, w_plus_of(ranked));
}

double bonferroni(double p, std::size_t m) {
  return std::min(1.0, p * static_cast<double>(m));
}

ComparisonReport compare_domains(const CorpusSummary& a, const CorpusSummary& b,
                                 WordClass word_class, std::size_t k,
                                 std::size_t bonferroni_m) {
  ComparisonReport report;
  report.bonferroni_m = std::max<std::size_t>(bonferroni_m, 1);

  for (const auto& [key, counts_a] : a) {
    if (key.first != word_class) continue;
    auto it = b.find(key);
    if (it == b.end()) continue;
    auto rate_a = try_integration_rate(counts_a.integrated, counts_a.light);
    auto rate_b = try_integration_rate(it->second.integrated, it->second.light);
    if (!rate_a || !rate_b) continue;

    ComparisonRow row;
    row.base = key.second;
    row.total = counts_a.integrated + counts_a.light + it->second.integrated +
                it->second.light;
    row.rate_a = *rate_a;
    row.rate_b = *rate_b;
    report.rows.push_back(std::move(row));
  }
  if (report.rows.empty()) {
    throw Error(ErrorCode::DisjointVocabulary,
                "the two corpora share no word with a defined rate");
  }

  std::sort(report.rows.begin(), report.rows.end(),
            [](const ComparisonRow& x, const ComparisonRow& y) {
              if (x.total != y.total) return x.total > y.total;
              return x.base < y.base;
            });
  if (report.rows.size() > k) report.rows.resize(k);

  std::vector<double> diffs;
  for (const ComparisonRow& row : report.rows) {
    report.mean_rate_a += row.rate_a;
    report.mean_rate_b += row.rate_b;
    diffs.push_back(row.rate_a - row.rate_b);
  }
  report.mean_rate_a /= static_cast<double>(report.rows.size());
  report.mean_rate_b /= static_cast<double>(report.rows.size());

  try {
    report.test = wilcoxon_signed_rank(diffs);
    report.p_adjusted = bonferroni(report.test->p_value, report.bonferroni_m);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::AllZeroDifferences) throw;
  }
  return report;
}

}  // namespace prestamo
