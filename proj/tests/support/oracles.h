#pragma once

// Independent reference implementations the tests compare the library
// against. Everything here is written from the operation definitions, not
// by calling into the code under test.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "prestamo/ingest.h"
#include "prestamo/matcher.h"
#include "prestamo/morphology.h"

namespace testsupport {

// Exhaustive matcher: enumerates every integrated surface and every fully
// expanded light phrase against the token sequence, then applies the same
// published resolution order. Strict adjacency only (window 0).
std::vector<prestamo::MatchRecord> brute_force_match(
    const prestamo::Post& post,
    const std::vector<prestamo::ExpandedLexicon>& lexicons,
    bool fold_diacritics = false);

bool same_records(const std::vector<prestamo::MatchRecord>& a,
                  const std::vector<prestamo::MatchRecord>& b);
std::string describe_records(const std::vector<prestamo::MatchRecord>& records);

// Two-sided signed-rank p by enumerating all 2^n sign assignments.
double wilcoxon_enumerate_p(const std::vector<double>& diffs);
// The W+ statistic under average ranks, for cross-checking.
double wilcoxon_enumerate_w_plus(const std::vector<double>& diffs);

// Plain gradient-ascent fit of the ridge-penalized Bernoulli likelihood,
// with backtracking line search. Slow but independent of the Newton path.
Eigen::VectorXd gradient_ascent_logistic(const Eigen::SparseMatrix<double>& X,
                                         const Eigen::VectorXd& y,
                                         double lambda,
                                         const std::vector<char>& penalized,
                                         double grad_tolerance = 1e-5,
                                         int max_iterations = 200000);

}  // namespace testsupport
