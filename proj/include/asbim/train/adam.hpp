#pragma once

#include <cmath>
#include <span>
#include <string>

#include "asbim/model/params.hpp"

namespace asbim::train {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moment estimates, shaped like the parameters.
struct AdamState {
  model::ModelParameters m;
  model::ModelParameters v;
  long long step = 0;

  static AdamState for_params(const model::ModelParameters& p) {
    return {model::zeros_like(p), model::zeros_like(p), 0};
  }
};

/// One bias-corrected Adam update of every trainable tensor:
/// θ ← θ − lr·m̂/(√v̂ + eps).
inline void adam_step(model::ModelParameters& params, const model::GradientSet& grads, AdamState& state,
                      const AdamConfig& cfg) {
  model::zip_tensors(grads, params, [](const model::TensorInfo& info, std::span<const double> g, std::span<double>) {
    for (double x : g) {
      if (!std::isfinite(x)) throw NumericalError("non-finite gradient in parameter '" + info.name + "'");
    }
  });
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  auto ps = model::tensor_list(params);
  auto gs = model::tensor_list(grads);
  auto ms = model::tensor_list(state.m);
  auto vs = model::tensor_list(state.v);
  for (std::size_t t = 0; t < ps.size(); ++t) {
    auto p = ps[t].second;
    auto g = gs[t].second;
    auto m = ms[t].second;
    auto v = vs[t].second;
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      p[i] -= cfg.learning_rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg.eps);
    }
  }
}

}  // namespace asbim::train
