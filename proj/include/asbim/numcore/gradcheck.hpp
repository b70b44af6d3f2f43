#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "asbim/error.hpp"

namespace asbim::numcore {

struct GroupError {
  std::string name;
  double max_relative_error = 0.0;
  std::size_t size = 0;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::vector<GroupError> groups;

  bool passed(double threshold) const { return max_relative_error < threshold; }
};

/// A flat named parameter vector, for checking functions of plain reals.
struct ParameterVector {
  struct Info {
    std::string name;
  };
  std::vector<double> values;
};

template <class P>
  requires std::is_same_v<std::remove_const_t<P>, ParameterVector>
auto tensor_list(P& p) {
  using Elem = std::conditional_t<std::is_const_v<P>, const double, double>;
  std::vector<std::pair<ParameterVector::Info, std::span<Elem>>> out;
  out.emplace_back(ParameterVector::Info{"theta"}, std::span<Elem>(p.values.data(), p.values.size()));
  return out;
}

/// |analytic - fd| / max(1e-8, |fd|), where fd is the central difference.
inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-8, std::abs(numeric));
}

/// Compares `analytic` (same shape as `params`) with central differences of `fn`
/// at step `step`, element by element. `Params` is any type with a `tensor_list`
/// overload yielding (info-with-name, span) pairs.
template <class Params, class LossFn>
GradCheckReport finite_difference_check(LossFn&& fn, const Params& analytic, Params params, double step) {
  if (!(step > 0.0)) throw ConfigError("finite_difference_check: step must be > 0");
  const auto eval = [&](const Params& p) {
    const double v = fn(p);
    if (!std::isfinite(v)) throw NumericalError("finite_difference_check: non-finite loss");
    return v;
  };
  eval(params);

  GradCheckReport report;
  auto targets = tensor_list(params);
  const auto grads = tensor_list(analytic);
  if (targets.size() != grads.size()) throw ConfigError("finite_difference_check: gradient shape mismatch");
  for (std::size_t t = 0; t < targets.size(); ++t) {
    auto& [info, values] = targets[t];
    const auto& g = grads[t].second;
    if (g.size() != values.size()) throw ConfigError("finite_difference_check: shape mismatch in " + info.name);
    GroupError group{info.name, 0.0, values.size()};
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + step;
      const double up = eval(params);
      values[i] = saved - step;
      const double down = eval(params);
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      group.max_relative_error = std::max(group.max_relative_error, relative_error(g[i], numeric));
    }
    report.max_relative_error = std::max(report.max_relative_error, group.max_relative_error);
    report.groups.push_back(std::move(group));
  }
  return report;
}

}  // namespace asbim::numcore
