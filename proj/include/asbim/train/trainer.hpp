#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "asbim/config.hpp"
#include "asbim/data/types.hpp"
#include "asbim/model/asbim.hpp"
#include "asbim/rng.hpp"
#include "asbim/text_io.hpp"
#include "asbim/train/adam.hpp"

namespace asbim::train {

using model::ModelParameters;
using model::Variant;

struct TrainConfig {
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int epochs = 50;
  double l2_coef = 1e-4;
  std::uint64_t seed = 42;
  Variant variant = Variant::Base;
  int q = 50;
  int h = 50;
  int max_len = 20;

  AdamConfig adam() const { return {learning_rate, adam_beta1, adam_beta2, adam_eps}; }
};

template <class F>
void visit_fields(TrainConfig& c, F&& f) {
  f("learning_rate", c.learning_rate);
  f("adam_beta1", c.adam_beta1);
  f("adam_beta2", c.adam_beta2);
  f("adam_eps", c.adam_eps);
  f("epochs", c.epochs);
  f("l2_coef", c.l2_coef);
  f("seed", c.seed);
  f("variant", c.variant);
  f("q", c.q);
  f("h", c.h);
  f("max_len", c.max_len);
}

inline void validate(const TrainConfig& c) {
  const auto fail = [](const std::string& msg) { throw ConfigError("train config: " + msg); };
  if (!(c.learning_rate > 0.0)) fail("learning_rate must be > 0");
  if (!(c.adam_beta1 >= 0.0 && c.adam_beta1 < 1.0) || !(c.adam_beta2 >= 0.0 && c.adam_beta2 < 1.0)) {
    fail("adam betas must lie in [0,1)");
  }
  if (!(c.adam_eps > 0.0)) fail("adam_eps must be > 0");
  if (c.epochs < 1) fail("epochs must be >= 1");
  if (!(c.l2_coef >= 0.0)) fail("l2_coef must be >= 0");
  if (c.q < 1 || c.h < 1) fail("q and h must be positive");
  if (c.max_len < 1) fail("max_len must be >= 1");
}

struct TrainHistory {
  std::vector<double> loss;   // training loss at the parameters each epoch's step starts from
  std::vector<double> gamma;  // γ after each epoch's step
};

struct TrainResult {
  ModelParameters params;
  TrainHistory history;
  double final_loss = 0.0;
};

/// Mean and population sd of each numerical feature over `dataset`; sd falls back to 1
/// for a constant feature.
inline model::FeatureScaling fit_scaling(const data::Dataset& dataset, Variant variant) {
  model::FeatureScaling s;
  if (dataset.empty()) return s;
  const std::size_t nf = model::feature_count(variant);
  std::vector<std::vector<double>> cols(nf);
  for (const auto& d : dataset) {
    const auto x = model::raw_features(d, variant);
    for (std::size_t i = 0; i < nf; ++i) cols[i].push_back(x[i]);
  }
  for (std::size_t i = 0; i < nf; ++i) {
    if (model::is_categorical(static_cast<model::Feature>(i))) continue;
    double mean = 0.0;
    for (double x : cols[i]) mean += x;
    mean /= static_cast<double>(cols[i].size());
    double ss = 0.0;
    for (double x : cols[i]) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(cols[i].size()));
    s.mean[i] = mean;
    s.sd[i] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

/// Initial parameters for `config`, drawn from the "init" substream of its seed.
inline ModelParameters init_params(const TrainConfig& config) {
  auto gen = rng::substream(config.seed, "init");
  return model::init_params(config.variant, config.q, config.h, gen);
}

/// Full-batch Adam from the given starting point. Scaling in `params` is used as is.
inline TrainResult train_from(ModelParameters params, const data::Dataset& dataset, const TrainConfig& config) {
  validate(config);
  if (dataset.empty()) throw ConfigError("train: empty dataset");
  if (params.variant != config.variant) throw ConfigError("train: parameter variant differs from config");
  TrainResult result;
  auto state = AdamState::for_params(params);
  const auto adam = config.adam();
  result.history.loss.reserve(static_cast<std::size_t>(config.epochs));
  result.history.gamma.reserve(static_cast<std::size_t>(config.epochs));
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    double epoch_loss = 0.0;
    try {
      const auto lg = model::loss_and_gradient(dataset, params, config.l2_coef);
      epoch_loss = lg.loss;
      if (!std::isfinite(lg.loss)) throw NumericalError("training loss became non-finite");
      adam_step(params, lg.gradient, state, adam);
    } catch (const TrainingError&) {
      throw;
    } catch (const NumericalError& e) {
      throw TrainingError(std::string(e.what()) + " at epoch " + std::to_string(epoch), epoch);
    }
    if (!model::all_finite(params)) throw TrainingError("parameters became non-finite", epoch);
    result.history.loss.push_back(epoch_loss);
    result.history.gamma.push_back(params.gamma());
  }
  try {
    result.final_loss = model::loss(dataset, params, config.l2_coef);
  } catch (const NumericalError& e) {
    throw TrainingError(std::string(e.what()) + " after the last epoch", config.epochs);
  }
  if (!std::isfinite(result.final_loss)) throw TrainingError("final loss is non-finite", config.epochs);
  result.params = std::move(params);
  return result;
}

/// Fits feature scaling on `dataset`, initializes from the seed and trains.
inline TrainResult train(const data::Dataset& dataset, const TrainConfig& config) {
  validate(config);
  auto params = init_params(config);
  params.scaling = fit_scaling(dataset, config.variant);
  return train_from(std::move(params), dataset, config);
}

inline std::string history_csv(const TrainHistory& h) {
  std::string out = "epoch,loss,gamma\n";
  for (std::size_t i = 0; i < h.loss.size(); ++i) {
    out += std::to_string(i + 1) + "," + io::format_double(h.loss[i]) + "," + io::format_double(h.gamma[i]) + "\n";
  }
  return out;
}

}  // namespace asbim::train
