#include "prestamo/regression.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "prestamo/error.h"
#include "prestamo/stats.h"

namespace prestamo {

namespace {

double sigmoid(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  double e = std::exp(eta);
  return e / (1.0 + e);
}

// y*eta - log(1 + exp(eta)), computed without overflow.
double bernoulli_term(double y, double eta) {
  if (eta > 0.0) return (y - 1.0) * eta - std::log1p(std::exp(-eta));
  return y * eta - std::log1p(std::exp(eta));
}

struct ScalarColumn {
  std::string name;
  std::vector<double> raw;
};

// Deterministic across platforms, unlike std::shuffle.
void seeded_shuffle(std::vector<std::size_t>& indices, std::mt19937_64& gen) {
  for (std::size_t i = indices.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(gen() % i);
    std::swap(indices[i - 1], indices[j]);
  }
}

Eigen::SparseMatrix<double> take_rows(const Eigen::SparseMatrix<double>& X,
                                      const std::vector<std::size_t>& rows) {
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<Eigen::Index> new_row(X.rows(), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    new_row[rows[i]] = static_cast<Eigen::Index>(i);
  }
  for (int col = 0; col < X.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(X, col); it; ++it) {
      if (new_row[it.row()] >= 0) {
        triplets.emplace_back(new_row[it.row()], col, it.value());
      }
    }
  }
  Eigen::SparseMatrix<double> out(static_cast<Eigen::Index>(rows.size()),
                                  X.cols());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

}  // namespace

std::vector<double> default_l2_grid() {
  std::vector<double> grid;
  for (int e = -3; e <= 3; ++e) grid.push_back(std::pow(10.0, e));
  return grid;
}

DesignMatrix encode_design(
    const std::vector<Observation>& observations,
    const std::unordered_map<std::string, AuthorProfile>& profiles,
    const RegressionSpec& spec) {
  DesignMatrix design;
  bool want_native_rate = spec.word_class == WordClass::Loanword;

  std::vector<const Observation*> kept;
  std::vector<const AuthorProfile*> kept_profiles;
  for (const Observation& obs : observations) {
    auto it = profiles.find(obs.record.author_id);
    if (it == profiles.end()) {
      throw Error(ErrorCode::MissingProfile,
                  "no profile for author " + obs.record.author_id);
    }
    const AuthorProfile& profile = it->second;
    if (!profile.spanish_rate) {
      ++design.n_dropped_no_language;
      continue;
    }
    if (want_native_rate && !profile.native_integration_rate) {
      ++design.n_dropped_no_native_rate;
      continue;
    }
    kept.push_back(&obs);
    kept_profiles.push_back(&profile);
  }

  std::size_t n = kept.size();

  // Fixed-effect levels with enough observations get their own column.
  std::map<std::string, std::size_t> author_counts, word_counts;
  for (const Observation* obs : kept) {
    ++author_counts[obs->record.author_id];
    ++word_counts[obs->record.base];
  }
  std::map<std::string, std::size_t> author_col, word_col;
  bool author_rare = false, word_rare = false;
  for (const auto& [author, count] : author_counts) {
    if (count >= spec.rare_threshold) {
      author_col.emplace(author, author_col.size());
    } else {
      author_rare = true;
    }
  }
  for (const auto& [word, count] : word_counts) {
    if (count >= spec.rare_threshold) {
      word_col.emplace(word, word_col.size());
    } else {
      word_rare = true;
    }
  }

  std::vector<ScalarColumn> scalars;
  scalars.push_back({"post_length", {}});
  scalars.push_back({"posts_per_day", {}});
  scalars.push_back({"rt_share", {}});
  scalars.push_back({"url_share", {}});
  if (want_native_rate) scalars.push_back({"native_integration_rate", {}});
  for (std::size_t i = 0; i < n; ++i) {
    const Observation& obs = *kept[i];
    const AuthorProfile& profile = *kept_profiles[i];
    scalars[0].raw.push_back(static_cast<double>(obs.features.post_length));
    scalars[1].raw.push_back(profile.activity);
    scalars[2].raw.push_back(profile.rt_share);
    scalars[3].raw.push_back(profile.url_share);
    if (want_native_rate) scalars[4].raw.push_back(*profile.native_integration_rate);
  }

  design.column_names = {"(intercept)", "mention", "hashtag"};
  for (const ScalarColumn& s : scalars) design.column_names.push_back(s.name);
  std::size_t region_base = design.column_names.size();
  design.column_names.insert(design.column_names.end(),
                             {"region:LatinAmerica", "region:Europe",
                              "region:US", "region:Other"});
  std::size_t language_base = design.column_names.size();
  design.column_names.insert(design.column_names.end(),
                             {"language:medium", "language:high"});
  std::size_t author_base = design.column_names.size();
  for (const auto& [author, _] : author_col) {
    design.column_names.push_back("author:" + author);
  }
  std::size_t author_rare_col = design.column_names.size();
  if (author_rare) design.column_names.push_back("author:RARE");
  std::size_t word_base = design.column_names.size();
  for (const auto& [word, _] : word_col) {
    design.column_names.push_back("word:" + word);
  }
  std::size_t word_rare_col = design.column_names.size();
  if (word_rare) design.column_names.push_back("word:RARE");

  std::size_t p = design.column_names.size();
  design.penalized.assign(p, 1);
  design.penalized[0] = 0;

  std::vector<std::vector<ScaledVariable>> scaled;
  for (const ScalarColumn& s : scalars) {
    scaled.push_back(log_z_scale(s.name, s.raw));
  }

  std::vector<Eigen::Triplet<double>> triplets;
  design.y.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const Observation& obs = *kept[i];
    const AuthorProfile& profile = *kept_profiles[i];
    Eigen::Index row = static_cast<Eigen::Index>(i);
    design.y(row) = obs.record.variant == Variant::Integrated ? 1.0 : 0.0;

    triplets.emplace_back(row, 0, 1.0);
    if (obs.features.has_mention) triplets.emplace_back(row, 1, 1.0);
    if (obs.features.has_hashtag) triplets.emplace_back(row, 2, 1.0);
    for (std::size_t s = 0; s < scaled.size(); ++s) {
      double z = scaled[s][i].z_value;
      if (z != 0.0) {
        triplets.emplace_back(row, static_cast<Eigen::Index>(3 + s), z);
      }
    }
    switch (profile.region) {
      case Region::LatinAmerica: triplets.emplace_back(row, region_base + 0, 1.0); break;
      case Region::Europe: triplets.emplace_back(row, region_base + 1, 1.0); break;
      case Region::US: triplets.emplace_back(row, region_base + 2, 1.0); break;
      case Region::Other: triplets.emplace_back(row, region_base + 3, 1.0); break;
      case Region::UNK: break;  // reference level
    }
    LanguageBin bin = profile.language_bin ? *profile.language_bin
                                           : bin_language(*profile.spanish_rate);
    switch (bin) {
      case LanguageBin::Medium: triplets.emplace_back(row, language_base + 0, 1.0); break;
      case LanguageBin::High: triplets.emplace_back(row, language_base + 1, 1.0); break;
      case LanguageBin::Low: break;  // reference level
    }
    auto author_it = author_col.find(obs.record.author_id);
    triplets.emplace_back(row,
                          author_it != author_col.end()
                              ? static_cast<Eigen::Index>(author_base + author_it->second)
                              : static_cast<Eigen::Index>(author_rare_col),
                          1.0);
    auto word_it = word_col.find(obs.record.base);
    triplets.emplace_back(row,
                          word_it != word_col.end()
                              ? static_cast<Eigen::Index>(word_base + word_it->second)
                              : static_cast<Eigen::Index>(word_rare_col),
                          1.0);
  }

  design.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  design.X.setFromTriplets(triplets.begin(), triplets.end());
  return design;
}

double bernoulli_log_likelihood(const Eigen::SparseMatrix<double>& X,
                                const Eigen::VectorXd& y,
                                const Eigen::VectorXd& beta) {
  Eigen::VectorXd eta = X * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    ll += bernoulli_term(y(i), eta(i));
  }
  return ll;
}

double penalized_log_likelihood(const Eigen::SparseMatrix<double>& X,
                                const Eigen::VectorXd& y,
                                const Eigen::VectorXd& beta, double lambda,
                                const std::vector<char>& penalized) {
  double penalty = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (penalized[j]) penalty += beta(j) * beta(j);
  }
  return bernoulli_log_likelihood(X, y, beta) - lambda * penalty;
}

Eigen::VectorXd penalized_gradient(const Eigen::SparseMatrix<double>& X,
                                   const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& beta, double lambda,
                                   const std::vector<char>& penalized) {
  Eigen::VectorXd eta = X * beta;
  Eigen::VectorXd mu(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) mu(i) = sigmoid(eta(i));
  Eigen::VectorXd g = X.transpose() * (y - mu);
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (penalized[j]) g(j) -= 2.0 * lambda * beta(j);
  }
  return g;
}

FitResult fit_ridge_logistic(const Eigen::SparseMatrix<double>& X,
                             const Eigen::VectorXd& y, double lambda,
                             const std::vector<char>& penalized,
                             double tolerance, int max_iterations) {
  Eigen::Index p = X.cols();
  if (static_cast<std::size_t>(p) != penalized.size()) {
    throw Error(ErrorCode::Config, "penalty mask does not match column count");
  }
  if (lambda < 0.0) {
    throw Error(ErrorCode::Config, "ridge weight must be nonnegative");
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  double objective = penalized_log_likelihood(X, y, beta, lambda, penalized);
  Eigen::MatrixXd hessian(p, p);
  int iter = 0;
  bool converged = false;

  for (; iter < max_iterations; ++iter) {
    Eigen::VectorXd eta = X * beta;
    Eigen::VectorXd mu(eta.size());
    Eigen::VectorXd w(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      mu(i) = sigmoid(eta(i));
      w(i) = std::max(mu(i) * (1.0 - mu(i)), 1e-10);
    }
    Eigen::VectorXd g = X.transpose() * (y - mu);
    for (Eigen::Index j = 0; j < p; ++j) {
      if (penalized[j]) g(j) -= 2.0 * lambda * beta(j);
    }
    if (g.norm() < tolerance) {
      converged = true;
      break;
    }

    Eigen::SparseMatrix<double> weighted =
        X.transpose() * w.asDiagonal() * X;
    hessian = Eigen::MatrixXd(weighted);
    for (Eigen::Index j = 0; j < p; ++j) {
      if (penalized[j]) hessian(j, j) += 2.0 * lambda;
    }
    Eigen::VectorXd step = hessian.ldlt().solve(g);

    // Slack scales with the objective so evaluation noise near the optimum
    // cannot veto a full Newton step.
    double slack = 1e-12 * (1.0 + std::fabs(objective));
    double scale = 1.0;
    bool improved = false;
    for (int half = 0; half < 40; ++half) {
      Eigen::VectorXd trial = beta + scale * step;
      double trial_obj = penalized_log_likelihood(X, y, trial, lambda, penalized);
      if (trial_obj >= objective - slack) {
        beta = std::move(trial);
        objective = trial_obj;
        improved = true;
        break;
      }
      scale /= 2.0;
    }
    if (!improved) {
      throw Error(ErrorCode::Nonconvergence,
                  "no ascent step found at iteration " + std::to_string(iter));
    }
  }
  if (!converged) {
    throw Error(ErrorCode::Nonconvergence,
                "gradient norm still above tolerance after " +
                    std::to_string(max_iterations) + " iterations");
  }

  // Observed penalized information at the optimum, for Wald errors.
  {
    Eigen::VectorXd eta = X * beta;
    Eigen::VectorXd w(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      double mu = sigmoid(eta(i));
      w(i) = std::max(mu * (1.0 - mu), 1e-10);
    }
    Eigen::SparseMatrix<double> weighted = X.transpose() * w.asDiagonal() * X;
    hessian = Eigen::MatrixXd(weighted);
    for (Eigen::Index j = 0; j < p; ++j) {
      if (penalized[j]) hessian(j, j) += 2.0 * lambda;
    }
  }
  Eigen::MatrixXd info_inverse =
      hessian.ldlt().solve(Eigen::MatrixXd::Identity(p, p));

  FitResult result;
  result.beta = beta;
  result.standard_errors.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    result.standard_errors[j] = std::sqrt(std::max(info_inverse(j, j), 0.0));
  }
  result.log_likelihood = bernoulli_log_likelihood(X, y, beta);
  result.iterations = iter;
  return result;
}

double wald_p_value(double beta, double standard_error) {
  if (standard_error <= 0.0) return 1.0;
  double z = beta / standard_error;
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

RegressionResult grid_search_l2(const DesignMatrix& design,
                                const RegressionSpec& spec) {
  std::vector<double> grid = spec.l2_grid.empty() ? default_l2_grid() : spec.l2_grid;
  std::sort(grid.begin(), grid.end());

  std::size_t n = static_cast<std::size_t>(design.X.rows());
  if (n == 0) {
    throw Error(ErrorCode::Config, "regression sample is empty");
  }

  // Stratified holdout: shuffle each outcome class separately, take the
  // first test_fraction share of each.
  std::vector<std::size_t> zeros, ones;
  for (std::size_t i = 0; i < n; ++i) {
    (design.y(static_cast<Eigen::Index>(i)) > 0.5 ? ones : zeros).push_back(i);
  }
  std::mt19937_64 gen(spec.seed);
  seeded_shuffle(zeros, gen);
  seeded_shuffle(ones, gen);

  std::vector<std::size_t> test_rows, train_rows;
  auto split_class = [&](const std::vector<std::size_t>& cls) {
    std::size_t k = static_cast<std::size_t>(
        spec.test_fraction * static_cast<double>(cls.size()));
    for (std::size_t i = 0; i < cls.size(); ++i) {
      (i < k ? test_rows : train_rows).push_back(cls[i]);
    }
  };
  split_class(zeros);
  split_class(ones);
  std::sort(test_rows.begin(), test_rows.end());
  std::sort(train_rows.begin(), train_rows.end());

  Eigen::SparseMatrix<double> X_train = take_rows(design.X, train_rows);
  Eigen::SparseMatrix<double> X_test = take_rows(design.X, test_rows);
  Eigen::VectorXd y_train(static_cast<Eigen::Index>(train_rows.size()));
  Eigen::VectorXd y_test(static_cast<Eigen::Index>(test_rows.size()));
  for (std::size_t i = 0; i < train_rows.size(); ++i) {
    y_train(static_cast<Eigen::Index>(i)) =
        design.y(static_cast<Eigen::Index>(train_rows[i]));
  }
  for (std::size_t i = 0; i < test_rows.size(); ++i) {
    y_test(static_cast<Eigen::Index>(i)) =
        design.y(static_cast<Eigen::Index>(test_rows[i]));
  }

  double best_lambda = grid.front();
  double best_holdout = -std::numeric_limits<double>::infinity();
  double best_train = 0.0;
  for (double lambda : grid) {
    FitResult fit = fit_ridge_logistic(X_train, y_train, lambda,
                                       design.penalized, spec.tolerance,
                                       spec.max_iterations);
    double holdout = test_rows.empty()
                         ? 0.0
                         : bernoulli_log_likelihood(X_test, y_test, fit.beta);
    if (holdout > best_holdout) {
      best_holdout = holdout;
      best_lambda = lambda;
      best_train = fit.log_likelihood;
    }
  }

  FitResult final_fit =
      fit_ridge_logistic(design.X, design.y, best_lambda, design.penalized,
                         spec.tolerance, spec.max_iterations);

  double n1 = design.y.sum();
  double n0 = static_cast<double>(n) - n1;
  double null_ll = 0.0;
  if (n1 > 0.0) null_ll += n1 * std::log(n1 / static_cast<double>(n));
  if (n0 > 0.0) null_ll += n0 * std::log(n0 / static_cast<double>(n));

  RegressionResult result;
  result.chosen_lambda = best_lambda;
  result.train_log_likelihood = best_train;
  result.holdout_log_likelihood = best_holdout;
  result.full_log_likelihood = final_fit.log_likelihood;
  result.null_log_likelihood = null_ll;
  result.lr_statistic = std::max(0.0, 2.0 * (final_fit.log_likelihood - null_ll));
  result.n_observations = n;

  std::size_t named = 0;
  for (const std::string& name : design.column_names) {
    if (name.rfind("author:", 0) != 0 && name.rfind("word:", 0) != 0) ++named;
  }
  result.bonferroni_m = spec.bonferroni_m > 0 ? spec.bonferroni_m : named;

  for (std::size_t j = 0; j < design.column_names.size(); ++j) {
    Coefficient c;
    c.name = design.column_names[j];
    c.beta = final_fit.beta(static_cast<Eigen::Index>(j));
    c.standard_error = final_fit.standard_errors[j];
    c.p_value = wald_p_value(c.beta, c.standard_error);
    c.p_adjusted = bonferroni(c.p_value, result.bonferroni_m);
    c.fixed_effect =
        c.name.rfind("author:", 0) == 0 || c.name.rfind("word:", 0) == 0;
    result.coefficients.push_back(std::move(c));
  }
  return result;
}

}  // namespace prestamo
