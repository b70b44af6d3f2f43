#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "asbim/data/imputation.hpp"
#include "asbim/data/preprocess.hpp"
#include "asbim/eval/baselines.hpp"
#include "asbim/eval/folds.hpp"
#include "asbim/eval/metrics.hpp"
#include "asbim/model/asbim.hpp"
#include "asbim/train/trainer.hpp"

namespace asbim::eval {

/// A model fitted on one training fold.
struct FittedModel {
  std::function<double(const ProcessedDyad&)> predict;
  /// Present for attention models: per-position weights over max_len.
  std::function<Vec(const ProcessedDyad&)> attention;
  std::optional<double> gamma;
};

/// Something cross_validate can fit on a training fold. `fit` sees training dyads only.
struct Method {
  std::string name;
  std::function<FittedModel(const Dataset& train)> fit;
};

inline FittedModel fitted_asbim(model::ModelParameters params) {
  auto shared = std::make_shared<const model::ModelParameters>(std::move(params));
  FittedModel f;
  f.predict = [shared](const ProcessedDyad& d) { return model::predict(d, *shared); };
  f.attention = [shared](const ProcessedDyad& d) { return model::attention_weights(d, *shared); };
  f.gamma = shared->gamma();
  return f;
}

inline std::string method_name(model::Variant v) {
  return v == model::Variant::Base ? "asbim" : "asbim_plus_d";
}

/// Trains the model on the fold (scaling fitted on the fold, init from config.seed).
inline Method asbim_method(const train::TrainConfig& config) {
  return {method_name(config.variant),
          [config](const Dataset& train) { return fitted_asbim(train::train(train, config).params); }};
}

inline Method t1_carry_method() {
  return {"t1_carry", [](const Dataset&) {
            FittedModel f;
            f.predict = [](const ProcessedDyad& d) { return d.externalizing_t1; };
            return f;
          }};
}

inline Method two_stage_method() {
  return {"two_stage", [](const Dataset& train) {
            auto model = fit_two_stage(train);
            FittedModel f;
            f.predict = [model](const ProcessedDyad& d) { return model.predict(d); };
            return f;
          }};
}

struct CvOptions {
  int k = 5;
  int m_imputations = 10;
  std::uint64_t seed = 42;
  int jobs = 1;
  int max_len = 20;
  double imputation_noise_scale = 1.0;
};

template <class F>
void visit_fields(CvOptions& c, F&& f) {
  f("k", c.k);
  f("m_imputations", c.m_imputations);
  f("seed", c.seed);
  f("jobs", c.jobs);
  f("max_len", c.max_len);
  f("imputation_noise_scale", c.imputation_noise_scale);
}

struct FoldMetrics {
  std::string method;
  int imputation = 0;
  int fold = 0;
  std::size_t n_test = 0;
  double mse = 0.0;
  std::optional<double> r;
  std::optional<double> gamma;
};

struct PredictionRow {
  std::string method;
  std::string dyad_id;
  int imputation = 0;
  int fold = 0;
  double pred = 0.0;
  double obs = 0.0;
};

struct AttentionRow {
  std::string method;
  int imputation = 0;
  std::string dyad_id;
  std::vector<double> alpha;
  double gamma = 0.0;
};

struct ImputationSummary {
  std::string method;
  int imputation = 0;
  double mean_mse = 0.0;
  std::optional<double> mean_r;  // mean over folds with a defined r
  std::optional<double> mean_gamma;
};

struct MethodAggregate {
  std::string method;
  double mean_mse = 0.0, min_mse = 0.0, max_mse = 0.0;
  std::optional<double> mean_r, min_r, max_r;
  std::optional<double> mean_gamma;
  int gamma_above_half = 0;  // imputations whose mean γ exceeds 0.5
};

struct EvaluationReport {
  std::string config_echo;
  CvOptions options;
  std::vector<std::string> methods;
  std::vector<FoldMetrics> folds;
  std::vector<PredictionRow> predictions;
  std::vector<AttentionRow> attention;
  std::vector<ImputationSummary> imputations;
  std::vector<MethodAggregate> aggregates;

  const MethodAggregate& aggregate(const std::string& method) const {
    for (const auto& a : aggregates) {
      if (a.method == method) return a;
    }
    throw ConfigError("report has no method '" + method + "'");
  }
};

inline std::vector<std::string> dyad_ids(const Dataset& d) {
  std::vector<std::string> ids;
  ids.reserve(d.size());
  for (const auto& x : d) ids.push_back(x.dyad_id);
  return ids;
}

/// Runs `jobs(i)` for i in [0, count) on up to `workers` threads. Exceptions are
/// rethrown in job order after all workers finish.
inline void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& job) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto n = static_cast<std::size_t>(std::max(1, workers));
  if (n == 1 || count <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < std::min(n, count); ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace cv_detail {

template <class T>
std::optional<double> mean_of(const std::vector<T>& xs) {
  if (xs.empty()) return std::nullopt;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace cv_detail

/// k-fold cross-validation of every method on each of `m_imputations` imputed
/// datasets. Folds are redrawn per imputation from independent substreams; each
/// (imputation, fold) job is independent, so results do not depend on `jobs`.
inline EvaluationReport cross_validate(const data::RawDataset& raw, const std::vector<Method>& methods,
                                       const CvOptions& opts) {
  if (methods.empty()) throw ConfigError("cross_validate: no methods");
  if (opts.k < 2) throw ConfigError("cross_validate: k must be >= 2");
  if (opts.m_imputations < 1) throw ConfigError("cross_validate: m_imputations must be >= 1");
  if (opts.max_len < 1) throw ConfigError("cross_validate: max_len must be >= 1");

  const auto max_len = static_cast<std::size_t>(opts.max_len);
  const auto imputed = data::impute_outcomes(
      raw, {opts.m_imputations, max_len, opts.imputation_noise_scale}, rng::derive_seed(opts.seed, "imputation"));

  std::vector<Dataset> datasets;
  std::vector<FoldAssignment> assignments;
  for (int i = 0; i < opts.m_imputations; ++i) {
    datasets.push_back(data::preprocess(imputed[static_cast<std::size_t>(i)], max_len));
    auto gen = rng::substream(opts.seed, "folds", static_cast<std::uint64_t>(i));
    assignments.push_back(kfold_split(dyad_ids(datasets.back()), opts.k, gen));
  }

  struct JobResult {
    std::vector<FoldMetrics> metrics;
    std::vector<PredictionRow> predictions;
    std::vector<AttentionRow> attention;
  };
  const std::size_t n_jobs = static_cast<std::size_t>(opts.m_imputations) * static_cast<std::size_t>(opts.k) *
                             methods.size();
  std::vector<JobResult> results(n_jobs);

  parallel_for(n_jobs, opts.jobs, [&](std::size_t job) {
    const auto method_idx = job % methods.size();
    const auto fold = static_cast<int>((job / methods.size()) % static_cast<std::size_t>(opts.k));
    const auto imp = static_cast<int>(job / (methods.size() * static_cast<std::size_t>(opts.k)));
    const auto& dataset = datasets[static_cast<std::size_t>(imp)];
    const auto& folds = assignments[static_cast<std::size_t>(imp)];
    Dataset train, test;
    for (const auto& d : dataset) (folds.fold_of_dyad.at(d.dyad_id) == fold ? test : train).push_back(d);

    const auto& method = methods[method_idx];
    const auto fitted = method.fit(train);
    auto& out = results[job];
    std::vector<double> pred, obs;
    for (const auto& d : test) {
      pred.push_back(fitted.predict(d));
      obs.push_back(model::target_of(d));
      out.predictions.push_back({method.name, d.dyad_id, imp, fold, pred.back(), obs.back()});
      if (fitted.attention) {
        const Vec a = fitted.attention(d);
        out.attention.push_back({method.name, imp, d.dyad_id, std::vector<double>(a.data(), a.data() + a.size()),
                                 fitted.gamma.value_or(0.0)});
      }
    }
    out.metrics.push_back({method.name, imp, fold, test.size(), mse(pred, obs), pearson_r(pred, obs), fitted.gamma});
  });

  EvaluationReport report;
  report.options = opts;
  for (const auto& m : methods) report.methods.push_back(m.name);
  // Jobs are ordered (imputation, fold, method); regroup per method for readability.
  for (const auto& m : methods) {
    for (const auto& r : results) {
      for (const auto& x : r.metrics)
        if (x.method == m.name) report.folds.push_back(x);
      for (const auto& x : r.predictions)
        if (x.method == m.name) report.predictions.push_back(x);
      for (const auto& x : r.attention)
        if (x.method == m.name) report.attention.push_back(x);
    }
  }

  for (const auto& m : methods) {
    MethodAggregate agg;
    agg.method = m.name;
    std::vector<double> mses, rs, gammas;
    for (int imp = 0; imp < opts.m_imputations; ++imp) {
      std::vector<double> fold_mse, fold_r, fold_gamma;
      for (const auto& f : report.folds) {
        if (f.method != m.name || f.imputation != imp) continue;
        fold_mse.push_back(f.mse);
        if (f.r) fold_r.push_back(*f.r);
        if (f.gamma) fold_gamma.push_back(*f.gamma);
      }
      ImputationSummary s{m.name, imp, *cv_detail::mean_of(fold_mse), cv_detail::mean_of(fold_r),
                          cv_detail::mean_of(fold_gamma)};
      mses.push_back(s.mean_mse);
      if (s.mean_r) rs.push_back(*s.mean_r);
      if (s.mean_gamma) {
        gammas.push_back(*s.mean_gamma);
        if (*s.mean_gamma > 0.5) ++agg.gamma_above_half;
      }
      report.imputations.push_back(s);
    }
    agg.mean_mse = *cv_detail::mean_of(mses);
    agg.min_mse = *std::min_element(mses.begin(), mses.end());
    agg.max_mse = *std::max_element(mses.begin(), mses.end());
    agg.mean_r = cv_detail::mean_of(rs);
    if (!rs.empty()) {
      agg.min_r = *std::min_element(rs.begin(), rs.end());
      agg.max_r = *std::max_element(rs.begin(), rs.end());
    }
    agg.mean_gamma = cv_detail::mean_of(gammas);
    report.aggregates.push_back(agg);
  }
  return report;
}

}  // namespace asbim::eval
