#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "asbim/data/types.hpp"
#include "asbim/eval/folds.hpp"
#include "asbim/numcore/least_squares.hpp"
#include "asbim/rng.hpp"

namespace asbim::eval {

using data::Dataset;
using data::ProcessedDyad;
using numcore::Mat;
using numcore::Vec;

/// Carries T1 forward as the T2 prediction.
inline std::vector<double> baseline_t1_carry(const Dataset& dataset) {
  std::vector<double> out;
  out.reserve(dataset.size());
  for (const auto& d : dataset) out.push_back(d.externalizing_t1);
  return out;
}

/// Per-dyad within-person lagged coefficients from person-mean-centered series:
///   c_t = b_mc m_{t-1} + phi_c c_{t-1}   (mother-to-child)
///   m_t = b_cm c_{t-1} + phi_m m_{t-1}   (child-to-mother)
struct DyadLags {
  double mother_to_child = 0.0;
  double child_to_mother = 0.0;
  bool mother_to_child_flagged = false;
  bool child_to_mother_flagged = false;
};

inline constexpr std::size_t kMinLagIntervals = 4;

inline DyadLags stage1_lags(const ProcessedDyad& d) {
  DyadLags out;
  const std::size_t n = d.n_observed;
  if (n < kMinLagIntervals) {
    out.mother_to_child_flagged = out.child_to_mother_flagged = true;
    return out;
  }
  const auto rows = static_cast<Eigen::Index>(n - 1);
  Vec m_lag(rows), c_lag(rows), m_now(rows), c_now(rows);
  for (Eigen::Index t = 0; t < rows; ++t) {
    const auto i = static_cast<std::size_t>(t);
    m_lag[t] = d.mother_seq[i] - d.mother_mean;
    c_lag[t] = d.child_seq[i] - d.child_mean;
    m_now[t] = d.mother_seq[i + 1] - d.mother_mean;
    c_now[t] = d.child_seq[i + 1] - d.child_mean;
  }
  Mat child_design(rows, 2);
  child_design << m_lag, c_lag;
  const auto child_fit = numcore::least_squares(child_design, c_now);
  out.mother_to_child = child_fit.coef[0];
  out.mother_to_child_flagged = !child_fit.full_rank;

  Mat mother_design(rows, 2);
  mother_design << c_lag, m_lag;
  const auto mother_fit = numcore::least_squares(mother_design, m_now);
  out.child_to_mother = mother_fit.coef[0];
  out.child_to_mother_flagged = !mother_fit.full_rank;
  return out;
}

/// Stage-2 regression of T2 on
/// {1, b_mc, b_cm, mother_mean, child_mean, ext_t1, gender}.
struct TwoStageModel {
  static constexpr std::array<const char*, 7> kCoefNames = {"intercept",   "mother_to_child_lag", "child_to_mother_lag",
                                                            "mother_mean", "child_mean",          "ext_t1",
                                                            "gender"};
  Vec coef = Vec::Zero(7);

  static Vec regressors(const ProcessedDyad& d) {
    const auto lags = stage1_lags(d);
    Vec x(7);
    x << 1.0, lags.mother_to_child, lags.child_to_mother, d.mother_mean, d.child_mean, d.externalizing_t1,
        static_cast<double>(static_cast<int>(d.gender));
    return x;
  }

  double predict(const ProcessedDyad& d) const { return regressors(d).dot(coef); }

  double coefficient(std::string_view name) const {
    for (std::size_t i = 0; i < kCoefNames.size(); ++i) {
      if (name == kCoefNames[i]) return coef[static_cast<Eigen::Index>(i)];
    }
    throw ConfigError("unknown two-stage coefficient '" + std::string(name) + "'");
  }
};

inline TwoStageModel fit_two_stage(const Dataset& train) {
  if (train.empty()) throw ConfigError("fit_two_stage: empty training set");
  Mat X(static_cast<Eigen::Index>(train.size()), 7);
  Vec y(static_cast<Eigen::Index>(train.size()));
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    X.row(r) = TwoStageModel::regressors(train[i]).transpose();
    if (!train[i].externalizing_t2) throw ConfigError("fit_two_stage: dyad '" + train[i].dyad_id + "' lacks T2");
    y[r] = *train[i].externalizing_t2;
  }
  TwoStageModel m;
  m.coef = numcore::minimum_norm_least_squares(X, y);
  return m;
}

struct TwoStageResult {
  std::vector<double> predictions;  // out-of-fold, in dataset order
  std::vector<int> fold;
  TwoStageModel full_sample;        // fitted on every dyad
};

/// Out-of-fold predictions of the two-stage model under a k-fold split drawn from `seed`.
inline TwoStageResult baseline_two_stage_lagged(const Dataset& dataset, int k, std::uint64_t seed) {
  std::vector<std::string> ids;
  for (const auto& d : dataset) ids.push_back(d.dyad_id);
  auto gen = rng::substream(seed, "two-stage-folds");
  const auto folds = kfold_split(ids, k, gen);
  TwoStageResult out;
  out.predictions.assign(dataset.size(), 0.0);
  out.fold.assign(dataset.size(), 0);
  for (int f = 0; f < k; ++f) {
    Dataset train;
    for (const auto& d : dataset) {
      if (folds.fold_of_dyad.at(d.dyad_id) != f) train.push_back(d);
    }
    const auto model = fit_two_stage(train);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      if (folds.fold_of_dyad.at(dataset[i].dyad_id) == f) {
        out.predictions[i] = model.predict(dataset[i]);
        out.fold[i] = f;
      }
    }
  }
  out.full_sample = fit_two_stage(dataset);
  return out;
}

}  // namespace asbim::eval
