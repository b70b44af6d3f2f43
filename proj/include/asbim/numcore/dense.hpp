#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "asbim/error.hpp"

namespace asbim::numcore {

// All arithmetic is double precision.
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Mask = std::vector<bool>;

inline bool all_finite(const Eigen::Ref<const Mat>& m) { return m.allFinite(); }

inline void require_finite(const Eigen::Ref<const Mat>& m, const std::string& what) {
  if (!m.allFinite()) throw NumericalError("non-finite value in " + what);
}

/// W·x + b.
inline Vec dense_forward(const Vec& x, const Mat& W, const Vec& b) {
  if (W.cols() != x.size() || W.rows() != b.size()) {
    throw ConfigError("dense_forward: W is " + std::to_string(W.rows()) + "x" + std::to_string(W.cols()) +
                      ", x has " + std::to_string(x.size()) + ", b has " + std::to_string(b.size()));
  }
  Vec out = W * x + b;
  require_finite(out, "dense_forward output");
  return out;
}

inline Vec relu(const Vec& x) { return x.cwiseMax(0.0); }

inline double sigmoid(double x) {
  // Branches keep exp() from overflowing for large |x|.
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// Softmax over the positions where `mask` is true; masked positions get exactly 0.
/// Max-subtracted, so adding a constant to every unmasked score leaves the result unchanged.
inline Vec masked_softmax(const Vec& scores, const Mask& mask) {
  if (static_cast<Eigen::Index>(mask.size()) != scores.size()) {
    throw ConfigError("masked_softmax: mask length differs from scores length");
  }
  double max_score = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    if (!std::isfinite(scores[i])) throw NumericalError("masked_softmax: non-finite score");
    max_score = std::max(max_score, scores[i]);
    any = true;
  }
  if (!any) throw EmptySequenceError("masked_softmax: every position is masked");

  Vec out = Vec::Zero(scores.size());
  double total = 0.0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    out[i] = std::exp(scores[i] - max_score);
    total += out[i];
  }
  out /= total;
  return out;
}

/// Mask with `n` leading trues followed by `len - n` falses.
inline Mask leading_mask(std::size_t n, std::size_t len) {
  Mask m(len, false);
  std::fill_n(m.begin(), std::min(n, len), true);
  return m;
}

}  // namespace asbim::numcore
