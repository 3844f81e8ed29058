#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "prestamo/features.h"
#include "prestamo/matcher.h"

namespace prestamo {

struct Observation {
  MatchRecord record;
  PostFeatures features;
};

struct RegressionSpec {
  WordClass word_class = WordClass::Loanword;
  std::size_t rare_threshold = 5;
  std::vector<double> l2_grid;  // empty selects the default grid
  double test_fraction = 0.10;
  std::uint64_t seed = 0;
  double tolerance = 1e-8;
  int max_iterations = 100;
  std::size_t bonferroni_m = 0;  // 0 means "number of non-fixed-effect terms"
};

std::vector<double> default_l2_grid();  // 7 log-spaced weights, 1e-3..1e3

struct DesignMatrix {
  Eigen::SparseMatrix<double> X;
  Eigen::VectorXd y;
  std::vector<std::string> column_names;
  std::vector<char> penalized;  // per column; intercept is the only exception
  std::size_t n_dropped_no_language = 0;
  std::size_t n_dropped_no_native_rate = 0;
};

// One row per usable observation: intercept, post variables, author
// background variables, region and language dummies, then author and word
// fixed effects with sub-threshold levels collapsed into RARE columns.
DesignMatrix encode_design(
    const std::vector<Observation>& observations,
    const std::unordered_map<std::string, AuthorProfile>& profiles,
    const RegressionSpec& spec);

struct FitResult {
  Eigen::VectorXd beta;
  std::vector<double> standard_errors;
  double log_likelihood = 0.0;  // unpenalized, at beta
  int iterations = 0;
};

// Maximizes sum log Bernoulli(y | sigmoid(X beta)) - lambda * |beta_pen|^2
// by damped Newton iteration to gradient norm below `tolerance`.
FitResult fit_ridge_logistic(const Eigen::SparseMatrix<double>& X,
                             const Eigen::VectorXd& y, double lambda,
                             const std::vector<char>& penalized,
                             double tolerance = 1e-8, int max_iterations = 100);

double bernoulli_log_likelihood(const Eigen::SparseMatrix<double>& X,
                                const Eigen::VectorXd& y,
                                const Eigen::VectorXd& beta);

// Analytic gradient of the penalized log likelihood, exposed for testing.
Eigen::VectorXd penalized_gradient(const Eigen::SparseMatrix<double>& X,
                                   const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& beta, double lambda,
                                   const std::vector<char>& penalized);
double penalized_log_likelihood(const Eigen::SparseMatrix<double>& X,
                                const Eigen::VectorXd& y,
                                const Eigen::VectorXd& beta, double lambda,
                                const std::vector<char>& penalized);

struct Coefficient {
  std::string name;
  double beta = 0.0;
  double standard_error = 0.0;
  double p_value = 1.0;
  double p_adjusted = 1.0;
  bool fixed_effect = false;
};

struct RegressionResult {
  std::vector<Coefficient> coefficients;
  double chosen_lambda = 0.0;
  double train_log_likelihood = 0.0;    // held-out fit at the chosen lambda
  double holdout_log_likelihood = 0.0;
  double full_log_likelihood = 0.0;     // final refit on all rows
  double null_log_likelihood = 0.0;
  double lr_statistic = 0.0;
  std::size_t n_observations = 0;
  std::size_t bonferroni_m = 1;
};

// Deterministic seeded stratified holdout; largest held-out likelihood wins,
// smaller lambda on ties; final refit on all rows.
RegressionResult grid_search_l2(const DesignMatrix& design,
                                const RegressionSpec& spec);

double wald_p_value(double beta, double standard_error);

}  // namespace prestamo
