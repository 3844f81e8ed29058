#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "doctest.h"
#include "prestamo/error.h"
#include "prestamo/regression.h"
#include "prestamo/stats.h"
#include "support/corpus_gen.h"
#include "support/oracles.h"

using namespace prestamo;

namespace {

Eigen::SparseMatrix<double> dense_to_sparse(const Eigen::MatrixXd& m) {
  std::vector<Eigen::Triplet<double>> triplets;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (m(i, j) != 0.0) triplets.emplace_back(i, j, m(i, j));
    }
  }
  Eigen::SparseMatrix<double> out(m.rows(), m.cols());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

struct Simulated {
  Eigen::SparseMatrix<double> X;
  Eigen::VectorXd y;
};

// Intercept plus two standard normal covariates, outcome from the logistic
// model with the given coefficients.
Simulated simulate_logistic(const Eigen::Vector3d& beta, std::size_t n,
                            std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = normal(gen);
    X(i, 2) = normal(gen);
    double eta = X.row(i).dot(beta);
    y(i) = unit(gen) < 1.0 / (1.0 + std::exp(-eta)) ? 1.0 : 0.0;
  }
  return {dense_to_sparse(X), y};
}

Observation make_obs(const std::string& author, const std::string& base,
                     Variant variant, bool mention = false,
                     bool hashtag = false, long length = 20) {
  Observation obs;
  obs.record.post_id = "p";
  obs.record.author_id = author;
  obs.record.base = base;
  obs.record.word_class = WordClass::Loanword;
  obs.record.variant = variant;
  obs.features.has_mention = mention;
  obs.features.has_hashtag = hashtag;
  obs.features.post_length = length;
  return obs;
}

AuthorProfile make_profile(const std::string& author, double spanish,
                           LanguageBin bin, Region region,
                           std::optional<double> native_rate) {
  AuthorProfile p;
  p.author_id = author;
  p.activity = 2.0;
  p.rt_share = 0.1;
  p.url_share = 0.2;
  p.region = region;
  p.spanish_rate = spanish;
  p.language_bin = bin;
  p.native_integration_rate = native_rate;
  return p;
}

}  // namespace

TEST_SUITE("regression") {

TEST_CASE("the default grid spans six decades") {
  std::vector<double> grid = default_l2_grid();
  REQUIRE(grid.size() == 7);
  CHECK(grid.front() == doctest::Approx(1e-3));
  CHECK(grid.back() == doctest::Approx(1e3));
  CHECK(std::is_sorted(grid.begin(), grid.end()));
}

TEST_CASE("design encoding lays out the agreed columns") {
  std::vector<Observation> observations;
  for (int i = 0; i < 5; ++i) {
    observations.push_back(make_obs("ana", "tweet",
                                    i < 3 ? Variant::Integrated : Variant::Light,
                                    i == 0, i == 1, 10 + i));
  }
  observations.push_back(make_obs("ana", "like", Variant::Light));
  observations.push_back(make_obs("bob", "like", Variant::Integrated));
  observations.push_back(make_obs("bob", "like", Variant::Light));
  observations.push_back(make_obs("cat", "like", Variant::Light));
  observations.push_back(make_obs("dan", "tweet", Variant::Integrated));

  std::unordered_map<std::string, AuthorProfile> profiles;
  profiles["ana"] =
      make_profile("ana", 1.0, LanguageBin::High, Region::LatinAmerica, 0.8);
  profiles["bob"] = make_profile("bob", 0.6, LanguageBin::Medium, Region::UNK, 0.5);
  profiles["cat"] = make_profile("cat", 0.0, LanguageBin::Low, Region::US, 0.5);
  profiles["cat"].spanish_rate.reset();
  profiles["cat"].language_bin.reset();
  profiles["dan"] = make_profile("dan", 0.4, LanguageBin::Low, Region::Europe,
                                 std::nullopt);

  RegressionSpec spec;
  DesignMatrix design = encode_design(observations, profiles, spec);

  // cat has no language estimate, dan no native rate; eight rows remain.
  CHECK(design.n_dropped_no_language == 1);
  CHECK(design.n_dropped_no_native_rate == 1);
  REQUIRE(design.X.rows() == 8);

  std::vector<std::string> expected = {
      "(intercept)", "mention", "hashtag", "post_length", "posts_per_day",
      "rt_share", "url_share", "native_integration_rate",
      "region:LatinAmerica", "region:Europe", "region:US", "region:Other",
      "language:medium", "language:high", "author:ana", "author:RARE",
      "word:tweet", "word:RARE"};
  CHECK(design.column_names == expected);
  REQUIRE(design.penalized.size() == expected.size());
  CHECK(design.penalized[0] == 0);
  for (std::size_t j = 1; j < design.penalized.size(); ++j) {
    CHECK(design.penalized[j] == 1);
  }

  Eigen::MatrixXd X(design.X);
  // Outcomes follow the variant of each kept observation.
  Eigen::VectorXd expected_y(8);
  expected_y << 1, 1, 1, 0, 0, 0, 1, 0;
  CHECK((design.y - expected_y).norm() == 0.0);
  // Every row carries the intercept and exactly one author and word column.
  for (int i = 0; i < 8; ++i) {
    CAPTURE(i);
    CHECK(X(i, 0) == 1.0);
    CHECK(X(i, 14) + X(i, 15) == 1.0);
    CHECK(X(i, 16) + X(i, 17) == 1.0);
  }
  // ana's six rows keep her own author column; bob falls into RARE.
  CHECK(X.col(14).sum() == 6.0);
  CHECK(X.col(15).sum() == 2.0);
  CHECK(X.col(16).sum() == 5.0);
  CHECK(X.col(17).sum() == 3.0);
  // Post flags sit where they were set.
  CHECK(X(0, 1) == 1.0);
  CHECK(X(1, 2) == 1.0);
  CHECK(X.col(1).sum() == 1.0);
  CHECK(X.col(2).sum() == 1.0);
  // Region and language dummies: ana rows, then bob rows at the reference.
  CHECK(X.col(8).sum() == 6.0);
  CHECK(X.col(9).sum() == 0.0);
  CHECK(X.col(13).sum() == 6.0);
  CHECK(X.col(12).sum() == 2.0);
  // Scalars are z-scaled, so each column sums to zero.
  for (int j = 3; j <= 7; ++j) {
    CAPTURE(j);
    CHECK(X.col(j).sum() == doctest::Approx(0.0).epsilon(1e-9));
  }

  SUBCASE("the native-rate column is loanword-specific") {
    RegressionSpec native_spec;
    native_spec.word_class = WordClass::Native;
    DesignMatrix native_design = encode_design(observations, profiles, native_spec);
    CHECK(native_design.X.rows() == 9);  // dan stays
    CHECK(native_design.n_dropped_no_native_rate == 0);
    for (const std::string& name : native_design.column_names) {
      CHECK(name != "native_integration_rate");
    }
  }

  SUBCASE("an unknown author is an error") {
    observations.push_back(make_obs("ghost", "tweet", Variant::Light));
    try {
      encode_design(observations, profiles, spec);
      FAIL("expected MissingProfile");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MissingProfile);
    }
  }
}

TEST_CASE("the analytic gradient agrees with finite differences") {
  std::mt19937_64 gen(4242);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd dense(40, 6);
  Eigen::VectorXd y(40), beta(6);
  for (Eigen::Index i = 0; i < 40; ++i) {
    dense(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < 6; ++j) dense(i, j) = normal(gen);
    y(i) = (i * 7 % 3 == 0) ? 1.0 : 0.0;
  }
  for (Eigen::Index j = 0; j < 6; ++j) beta(j) = normal(gen) * 0.5;
  Eigen::SparseMatrix<double> X = dense_to_sparse(dense);
  std::vector<char> penalized = {0, 1, 1, 0, 1, 1};
  double lambda = 0.3;

  Eigen::VectorXd g = penalized_gradient(X, y, beta, lambda, penalized);
  const double h = 1e-6;
  for (Eigen::Index j = 0; j < 6; ++j) {
    Eigen::VectorXd up = beta, down = beta;
    up(j) += h;
    down(j) -= h;
    double fd = (penalized_log_likelihood(X, y, up, lambda, penalized) -
                 penalized_log_likelihood(X, y, down, lambda, penalized)) /
                (2 * h);
    CAPTURE(j);
    CHECK(std::fabs(g(j) - fd) / std::max(1.0, std::fabs(fd)) < 1e-6);
  }
}

TEST_CASE("the penalty subtracts from the plain likelihood") {
  Eigen::MatrixXd dense(2, 1);
  dense << 1.0, 1.0;
  Eigen::SparseMatrix<double> X = dense_to_sparse(dense);
  Eigen::VectorXd y(2), beta(1);
  y << 1.0, 0.0;
  beta << 0.7;
  double sig = 1.0 / (1.0 + std::exp(-0.7));
  double ll = std::log(sig) + std::log(1.0 - sig);
  CHECK(bernoulli_log_likelihood(X, y, beta) == doctest::Approx(ll));
  CHECK(penalized_log_likelihood(X, y, beta, 2.0, {1}) ==
        doctest::Approx(ll - 2.0 * 0.49));
  CHECK(penalized_log_likelihood(X, y, beta, 2.0, {0}) == doctest::Approx(ll));
}

TEST_CASE("newton lands on a stationary point") {
  Simulated sim = simulate_logistic({0.3, -0.7, 1.2}, 500, 99);
  std::vector<char> penalized = {0, 1, 1};
  FitResult fit = fit_ridge_logistic(sim.X, sim.y, 0.5, penalized);
  CHECK(fit.iterations > 0);
  CHECK(penalized_gradient(sim.X, sim.y, fit.beta, 0.5, penalized).norm() < 1e-6);
  CHECK(fit.log_likelihood ==
        doctest::Approx(bernoulli_log_likelihood(sim.X, sim.y, fit.beta)));
  REQUIRE(fit.standard_errors.size() == 3);
  for (double se : fit.standard_errors) CHECK(se > 0.0);
}

TEST_CASE("a single-response column solves its fixed-point equation") {
  // With X all ones, y all ones, lambda 1: 10 (1 - sigmoid(b)) = 2 b.
  Eigen::MatrixXd dense = Eigen::MatrixXd::Ones(10, 1);
  Eigen::SparseMatrix<double> X = dense_to_sparse(dense);
  Eigen::VectorXd y = Eigen::VectorXd::Ones(10);
  FitResult fit = fit_ridge_logistic(X, y, 1.0, {1});

  double lo = 0.0, hi = 5.0;
  for (int i = 0; i < 200; ++i) {
    double mid = (lo + hi) / 2;
    double f = 10.0 * (1.0 - 1.0 / (1.0 + std::exp(-mid))) - 2.0 * mid;
    (f > 0.0 ? lo : hi) = mid;
  }
  CHECK(fit.beta(0) == doctest::Approx((lo + hi) / 2).epsilon(1e-8));
}

TEST_CASE("bad fitting arguments are configuration errors") {
  Eigen::SparseMatrix<double> X = dense_to_sparse(Eigen::MatrixXd::Ones(4, 1));
  Eigen::VectorXd y = Eigen::VectorXd::Ones(4);
  try {
    fit_ridge_logistic(X, y, -0.1, {1});
    FAIL("expected Config");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
  }
  CHECK_THROWS_AS(fit_ridge_logistic(X, y, 1.0, {1, 1}), Error);
  try {
    fit_ridge_logistic(X, y, 1.0, {1}, 1e-8, 0);
    FAIL("expected Nonconvergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Nonconvergence);
  }
}

TEST_CASE("known coefficients are recovered and cross-checked") {
  Eigen::Vector3d truth(0.5, -1.0, 2.0);
  Simulated sim = simulate_logistic(truth, 10000, 20260815);
  std::vector<char> penalized = {0, 1, 1};
  FitResult fit = fit_ridge_logistic(sim.X, sim.y, 1e-6, penalized);
  for (Eigen::Index j = 0; j < 3; ++j) {
    CAPTURE(j);
    CHECK(std::fabs(fit.beta(j) - truth(j)) < 0.1);
  }

  Eigen::VectorXd slow = testsupport::gradient_ascent_logistic(
      sim.X, sim.y, 1e-6, penalized);
  for (Eigen::Index j = 0; j < 3; ++j) {
    CAPTURE(j);
    CHECK(std::fabs(fit.beta(j) - slow(j)) < 5e-3);
  }
}

TEST_CASE("heavier penalties never grow the coefficients") {
  Simulated sim = simulate_logistic({0.8, -1.5, 2.5}, 200, 7);
  // Penalize every column so the norm itself is the penalty term.
  std::vector<char> penalized = {1, 1, 1};
  double previous = std::numeric_limits<double>::infinity();
  for (double lambda : default_l2_grid()) {
    CAPTURE(lambda);
    FitResult fit = fit_ridge_logistic(sim.X, sim.y, lambda, penalized);
    double norm = fit.beta.norm();
    CHECK(norm <= previous + 1e-9);
    previous = norm;
  }
}

TEST_CASE("wald p-values follow the normal tail") {
  CHECK(wald_p_value(1.96, 1.0) == doctest::Approx(0.05).epsilon(0.001));
  CHECK(wald_p_value(0.0, 1.0) == 1.0);
  CHECK(wald_p_value(-2.5, 1.0) == doctest::Approx(wald_p_value(2.5, 1.0)));
  CHECK(wald_p_value(3.0, 0.0) == 1.0);
  CHECK(wald_p_value(3.0, -1.0) == 1.0);
}

TEST_CASE("grid search is deterministic and labels coefficients") {
  testsupport::PlantedRegression planted =
      testsupport::build_planted_regression(555, 1000, 4, 5);
  RegressionSpec spec;
  spec.word_class = WordClass::Native;
  spec.seed = 31337;
  spec.l2_grid = {0.01, 1.0};
  DesignMatrix design =
      encode_design(planted.observations, planted.profiles, spec);

  RegressionResult first = grid_search_l2(design, spec);
  RegressionResult second = grid_search_l2(design, spec);
  CHECK(first.chosen_lambda == second.chosen_lambda);
  CHECK(first.holdout_log_likelihood == second.holdout_log_likelihood);
  CHECK(first.full_log_likelihood == second.full_log_likelihood);
  REQUIRE(first.coefficients.size() == second.coefficients.size());
  for (std::size_t j = 0; j < first.coefficients.size(); ++j) {
    CHECK(first.coefficients[j].beta == second.coefficients[j].beta);
    CHECK(first.coefficients[j].standard_error ==
          second.coefficients[j].standard_error);
  }

  CHECK(first.n_observations == 4000);
  CHECK(first.null_log_likelihood < 0.0);
  CHECK(first.lr_statistic >= 0.0);
  CHECK((first.chosen_lambda == 0.01 || first.chosen_lambda == 1.0));

  std::unordered_map<std::string, const Coefficient*> by_name;
  for (const Coefficient& c : first.coefficients) by_name[c.name] = &c;
  // Fixed effects are flagged and excluded from the adjustment count.
  CHECK(by_name.count("author:RARE") == 1);
  CHECK(by_name.at("author:RARE")->fixed_effect);
  CHECK(by_name.at("word:w0")->fixed_effect);
  CHECK_FALSE(by_name.at("mention")->fixed_effect);
  CHECK(first.bonferroni_m == 13);

  // Planted directions survive the fit on four thousand rows.
  CHECK(by_name.at("mention")->beta < 0.0);
  CHECK(by_name.at("hashtag")->beta > 0.0);
  CHECK(by_name.at("language:high")->beta > 0.0);
  CHECK(by_name.at("region:LatinAmerica")->beta > 0.0);
  CHECK(by_name.at("region:Europe")->beta < 0.0);

  SUBCASE("an explicit adjustment count wins") {
    spec.bonferroni_m = 40;
    RegressionResult adjusted = grid_search_l2(design, spec);
    CHECK(adjusted.bonferroni_m == 40);
    for (const Coefficient& c : adjusted.coefficients) {
      CHECK(c.p_adjusted == doctest::Approx(bonferroni(c.p_value, 40)));
    }
  }
}

TEST_CASE("tiny samples keep the smallest penalty") {
  // Six rows leave no holdout, so every lambda scores alike.
  Eigen::MatrixXd dense(6, 2);
  dense << 1, 0.5, 1, -1, 1, 2, 1, 0.2, 1, -0.7, 1, 1.5;
  DesignMatrix design;
  design.X = dense_to_sparse(dense);
  design.y.resize(6);
  design.y << 1, 0, 1, 0, 1, 0;
  design.column_names = {"(intercept)", "a"};
  design.penalized = {0, 1};

  RegressionSpec spec;
  spec.l2_grid = {2.0, 0.5};
  RegressionResult result = grid_search_l2(design, spec);
  CHECK(result.chosen_lambda == 0.5);
  CHECK(result.holdout_log_likelihood == 0.0);
  CHECK(result.null_log_likelihood == doctest::Approx(6 * std::log(0.5)));
  CHECK(result.bonferroni_m == 2);

  DesignMatrix empty;
  empty.X.resize(0, 1);
  empty.y.resize(0);
  empty.column_names = {"(intercept)"};
  empty.penalized = {0};
  try {
    grid_search_l2(empty, spec);
    FAIL("expected Config");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
  }
}

}  // TEST_SUITE
