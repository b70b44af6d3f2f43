#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "asbim/data/preprocess.hpp"
#include "asbim/numcore/least_squares.hpp"
#include "asbim/rng.hpp"

namespace asbim::data {

struct ImputationOptions {
  int m = 10;
  std::size_t max_len = kDefaultMaxLen;
  /// Multiplies the residual sd of the noise draw; 0 gives pure regression predictions.
  double noise_scale = 1.0;
};

/// The fitted T2 model shared by all imputations.
struct OutcomeRegression {
  numcore::Vec coef;  // intercept, ext_t1, gender, mother_mean, child_mean
  double residual_sd = 0.0;
  std::size_t complete_cases = 0;
};

inline numcore::Vec outcome_regressors(const RawDyadObservation& d, std::size_t max_len) {
  const auto [mm, cm] = person_means(d, max_len);
  numcore::Vec x(5);
  x << 1.0, d.externalizing_t1, static_cast<double>(static_cast<int>(d.gender)), mm, cm;
  return x;
}

inline OutcomeRegression fit_outcome_regression(const RawDataset& dataset, std::size_t max_len = kDefaultMaxLen) {
  std::vector<const RawDyadObservation*> complete;
  for (const auto& d : dataset) {
    if (d.externalizing_t2) complete.push_back(&d);
  }
  constexpr std::size_t kRegressors = 5;
  if (complete.size() <= kRegressors) {
    throw ImputationError("impute_outcomes: need more than " + std::to_string(kRegressors) +
                          " complete cases, have " + std::to_string(complete.size()));
  }
  numcore::Mat X(static_cast<Eigen::Index>(complete.size()), kRegressors);
  numcore::Vec y(static_cast<Eigen::Index>(complete.size()));
  for (std::size_t i = 0; i < complete.size(); ++i) {
    X.row(static_cast<Eigen::Index>(i)) = outcome_regressors(*complete[i], max_len).transpose();
    y[static_cast<Eigen::Index>(i)] = *complete[i]->externalizing_t2;
  }
  const auto fit = numcore::least_squares(X, y);
  if (!fit.full_rank) throw ImputationError("impute_outcomes: complete-case design is singular");
  const double dof = static_cast<double>(complete.size() - kRegressors);
  return {fit.coef, std::sqrt(fit.residual_sum_squares / dof), complete.size()};
}

/// Stochastic regression imputation of missing T2 outcomes. Returns `m` completed
/// datasets; observed values are copied untouched and imputation i draws its noise
/// from its own substream of `seed`.
inline std::vector<RawDataset> impute_outcomes(const RawDataset& dataset, const ImputationOptions& opts,
                                               std::uint64_t seed) {
  if (opts.m < 1) throw ConfigError("impute_outcomes: m must be >= 1");
  const bool any_missing = std::any_of(dataset.begin(), dataset.end(), [](const auto& d) { return !d.externalizing_t2; });
  std::vector<RawDataset> out(static_cast<std::size_t>(opts.m), dataset);
  if (!any_missing) return out;

  const auto reg = fit_outcome_regression(dataset, opts.max_len);
  for (int i = 0; i < opts.m; ++i) {
    auto gen = rng::substream(seed, "impute", static_cast<std::uint64_t>(i));
    std::normal_distribution<double> noise(0.0, 1.0);
    for (auto& d : out[static_cast<std::size_t>(i)]) {
      if (d.externalizing_t2) continue;
      const double pred = outcome_regressors(d, opts.max_len).dot(reg.coef);
      const double draw = pred + opts.noise_scale * reg.residual_sd * noise(gen);
      d.externalizing_t2 = std::clamp(draw, kOutcomeMin, kOutcomeMax);
    }
  }
  return out;
}

}  // namespace asbim::data
