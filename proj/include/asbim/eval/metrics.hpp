#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>

#include "asbim/error.hpp"

namespace asbim::eval {

/// Mean squared difference.
inline double mse(std::span<const double> pred, std::span<const double> obs) {
  if (pred.size() != obs.size()) throw ConfigError("mse: length mismatch");
  if (pred.empty()) throw ConfigError("mse: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - obs[i]) * (pred[i] - obs[i]);
  return s / static_cast<double>(pred.size());
}

/// Pearson product-moment correlation; empty when either side has zero variance.
inline std::optional<double> pearson_r(std::span<const double> pred, std::span<const double> obs) {
  if (pred.size() != obs.size()) throw ConfigError("pearson_r: length mismatch");
  if (pred.size() < 2) return std::nullopt;
  const double n = static_cast<double>(pred.size());
  double mp = 0.0, mo = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    mp += pred[i];
    mo += obs[i];
  }
  mp /= n;
  mo /= n;
  double spo = 0.0, spp = 0.0, soo = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    spo += (pred[i] - mp) * (obs[i] - mo);
    spp += (pred[i] - mp) * (pred[i] - mp);
    soo += (obs[i] - mo) * (obs[i] - mo);
  }
  if (!(spp > 0.0) || !(soo > 0.0)) return std::nullopt;
  const double r = spo / std::sqrt(spp * soo);
  return std::clamp(r, -1.0, 1.0);
}

}  // namespace asbim::eval
