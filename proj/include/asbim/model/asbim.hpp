#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "asbim/data/types.hpp"
#include "asbim/model/params.hpp"
#include "asbim/numcore/dense.hpp"

namespace asbim::model {

using data::ProcessedDyad;

// ---------------------------------------------------------------------------
// Building blocks, one per stage of the forward pass.

/// Categorical: the row selected by `value`. Numerical: value × the table vector.
inline Vec embed_feature(double value, const EmbeddingTable& table) {
  if (!std::isfinite(value)) throw ConfigError("embed_feature: non-finite feature value");
  if (table.kind == EmbeddingTable::Kind::Numerical) return value * table.storage.row(0).transpose();
  const double idx = std::floor(value);
  if (idx != value || idx < 0 || idx >= static_cast<double>(table.storage.rows())) {
    throw ConfigError("embed_feature: category index out of range");
  }
  return table.storage.row(static_cast<Eigen::Index>(idx)).transpose();
}

/// Elementwise mean of the embedded features.
inline Vec individual_representation(std::span<const Vec> embedded) {
  if (embedded.empty()) throw ConfigError("individual_representation: no feature vectors");
  Vec sum = Vec::Zero(embedded.front().size());
  for (const auto& e : embedded) {
    if (e.size() != sum.size()) throw ConfigError("individual_representation: unequal vector sizes");
    sum += e;
  }
  return sum / static_cast<double>(embedded.size());
}

enum class Side { Mother, Child };

/// (s_i - s̄) · relu(W p + b).
inline Vec behavior_representation(double s_i, double s_bar, const Vec& p, const Mat& W, const Vec& b) {
  return (s_i - s_bar) * numcore::relu(numcore::dense_forward(p, W, b));
}

/// Mother side uses (W1, b1), child side (W2, b2).
inline Vec behavior_representation(Side side, double s_i, double s_bar, const Vec& p, const ModelParameters& params) {
  return side == Side::Mother ? behavior_representation(s_i, s_bar, p, params.W1, params.b1)
                              : behavior_representation(s_i, s_bar, p, params.W2, params.b2);
}

/// γ·s_m + (1-γ)·s_c with γ = sigmoid(gamma_logit).
inline Vec interaction_representation(const Vec& s_m, const Vec& s_c, double gamma_logit) {
  if (s_m.size() != s_c.size()) throw ConfigError("interaction_representation: unequal sizes");
  const double g = numcore::sigmoid(gamma_logit);
  return g * s_m + (1.0 - g) * s_c;
}

struct AttentionOutput {
  Vec pooled;  // h
  Vec alpha;   // one weight per position, 0 where masked
};

/// Pools the interaction sequence: the score of position i is
/// <f2(s_i), f3(s_i)>/sqrt(h), weights are the masked softmax of the scores, and the
/// output is sum_i alpha_i f1(s_i) over unmasked positions.
inline AttentionOutput attention_pool(const std::vector<Vec>& seq_reps, const numcore::Mask& mask,
                                      const ModelParameters& params) {
  if (mask.size() != seq_reps.size()) throw ConfigError("attention_pool: mask length differs from sequence length");
  const double inv_sqrt_h = 1.0 / std::sqrt(static_cast<double>(params.h));
  Vec scores = Vec::Zero(static_cast<Eigen::Index>(seq_reps.size()));
  for (std::size_t i = 0; i < seq_reps.size(); ++i) {
    if (!mask[i]) continue;
    const Vec k2 = numcore::dense_forward(seq_reps[i], params.f2_w, params.f2_b);
    const Vec k3 = numcore::dense_forward(seq_reps[i], params.f3_w, params.f3_b);
    scores[static_cast<Eigen::Index>(i)] = k2.dot(k3) * inv_sqrt_h;
  }
  AttentionOutput out{Vec::Zero(params.h), numcore::masked_softmax(scores, mask)};
  for (std::size_t i = 0; i < seq_reps.size(); ++i) {
    if (!mask[i]) continue;
    out.pooled += out.alpha[static_cast<Eigen::Index>(i)] * numcore::dense_forward(seq_reps[i], params.f1_w, params.f1_b);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Whole-dyad forward/backward.

/// Raw feature values in Feature order (gender as 0/1). Throws ConfigError when the
/// variant needs inhibitory control and the dyad has none.
inline std::vector<double> raw_features(const ProcessedDyad& d, Variant variant) {
  std::vector<double> x{d.mother_mean, d.child_mean, d.externalizing_t1,
                        static_cast<double>(static_cast<int>(d.gender))};
  if (variant == Variant::PlusInhibitoryControl) {
    if (!d.inhibitory_control) {
      throw ConfigError("dyad '" + d.dyad_id + "' lacks inhibitory_control required by variant plus_d");
    }
    x.push_back(*d.inhibitory_control);
  }
  return x;
}

/// Feature values as fed to the embeddings: numerical ones z-scored with params.scaling.
inline std::vector<double> model_features(const ProcessedDyad& d, const ModelParameters& params) {
  auto x = raw_features(d, params.variant);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto f = static_cast<Feature>(i);
    if (!is_categorical(f)) x[i] = params.scaling.apply(f, x[i]);
  }
  return x;
}

inline Vec individual_representation(const std::vector<double>& features, const ModelParameters& params) {
  if (features.size() != params.tables.size()) throw ConfigError("feature count does not match embedding tables");
  std::vector<Vec> embedded;
  embedded.reserve(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) embedded.push_back(embed_feature(features[i], params.tables[i]));
  return individual_representation(std::span<const Vec>(embedded));
}

/// Intermediate values of one dyad's forward pass, kept for the backward pass.
///
/// Every s_i^mc is a combination of the same two vectors, s_i = a_i r_m + c_i r_c with
/// a_i = γ(s_i^m - s̄^m) and c_i = (1-γ)(s_i^c - s̄^c), so each dense layer is applied
/// to r_m and r_c once per dyad instead of once per position.
struct DyadForward {
  std::vector<double> features;
  Vec p;
  Vec z_m, z_c;  // pre-activations W p + b
  Vec r_m, r_c;  // relu(z)
  std::array<Vec, 3> u;  // W_fk r_m
  std::array<Vec, 3> v;  // W_fk r_c
  std::vector<double> dev_m, dev_c;  // centered deviations per observed position
  std::vector<double> a, c;
  std::array<Mat, 3> F;  // h × n projections f_k(s_i)
  Vec alpha;             // n
  Vec pooled;            // h
  double prediction = 0.0;
};

inline DyadForward forward(const ProcessedDyad& d, const ModelParameters& params) {
  const std::size_t n = d.n_observed;
  if (n == 0) throw EmptySequenceError("dyad '" + d.dyad_id + "' has no observed interval");
  DyadForward fw;
  fw.features = model_features(d, params);
  fw.p = individual_representation(fw.features, params);
  fw.z_m = params.W1 * fw.p + params.b1;
  fw.z_c = params.W2 * fw.p + params.b2;
  fw.r_m = fw.z_m.cwiseMax(0.0);
  fw.r_c = fw.z_c.cwiseMax(0.0);
  const std::array<const Mat*, 3> W = {&params.f1_w, &params.f2_w, &params.f3_w};
  const std::array<const Vec*, 3> B = {&params.f1_b, &params.f2_b, &params.f3_b};
  for (int k = 0; k < 3; ++k) {
    fw.u[k] = *W[k] * fw.r_m;
    fw.v[k] = *W[k] * fw.r_c;
  }
  const double g = params.gamma();
  fw.dev_m.resize(n);
  fw.dev_c.resize(n);
  fw.a.resize(n);
  fw.c.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    fw.dev_m[i] = d.mother_seq[i] - d.mother_mean;
    fw.dev_c[i] = d.child_seq[i] - d.child_mean;
    fw.a[i] = g * fw.dev_m[i];
    fw.c[i] = (1.0 - g) * fw.dev_c[i];
  }
  const auto ni = static_cast<Eigen::Index>(n);
  for (int k = 0; k < 3; ++k) {
    fw.F[k].resize(params.h, ni);
    for (Eigen::Index i = 0; i < ni; ++i) {
      fw.F[k].col(i) = fw.a[static_cast<std::size_t>(i)] * fw.u[k] + fw.c[static_cast<std::size_t>(i)] * fw.v[k] + *B[k];
    }
  }
  const double inv_sqrt_h = 1.0 / std::sqrt(static_cast<double>(params.h));
  Vec scores = (fw.F[1].cwiseProduct(fw.F[2])).colwise().sum().transpose() * inv_sqrt_h;
  fw.alpha = numcore::masked_softmax(scores, numcore::Mask(n, true));
  fw.pooled = fw.F[0] * fw.alpha;
  fw.prediction = params.w3.dot(fw.pooled) + params.b3 + d.externalizing_t1;
  if (!std::isfinite(fw.prediction)) throw NumericalError("non-finite prediction for dyad '" + d.dyad_id + "'");
  return fw;
}

/// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(prediction) = `dy`.
inline void backward(const DyadForward& fw, const ModelParameters& params, double dy, GradientSet& grad) {
  const auto n = static_cast<Eigen::Index>(fw.a.size());
  const double inv_sqrt_h = 1.0 / std::sqrt(static_cast<double>(params.h));

  grad.w3 += dy * fw.pooled;
  grad.b3 += dy;
  const Vec d_pooled = dy * params.w3;

  // pooled = F1 alpha
  const Vec d_alpha = fw.F[0].transpose() * d_pooled;
  std::array<Mat, 3> dF;
  dF[0] = d_pooled * fw.alpha.transpose();
  // softmax
  const double weighted = fw.alpha.dot(d_alpha);
  const Vec d_score = fw.alpha.cwiseProduct(d_alpha.array().matrix() - Vec::Constant(n, weighted)) * inv_sqrt_h;
  dF[1] = fw.F[2] * d_score.asDiagonal();
  dF[2] = fw.F[1] * d_score.asDiagonal();

  // F_k col i = a_i u_k + c_i v_k + b_k
  const Eigen::Map<const Vec> a(fw.a.data(), n);
  const Eigen::Map<const Vec> c(fw.c.data(), n);
  std::array<Mat*, 3> gW = {&grad.f1_w, &grad.f2_w, &grad.f3_w};
  std::array<Vec*, 3> gB = {&grad.f1_b, &grad.f2_b, &grad.f3_b};
  std::array<const Mat*, 3> W = {&params.f1_w, &params.f2_w, &params.f3_w};
  Vec d_a = Vec::Zero(n), d_c = Vec::Zero(n);
  Vec d_rm = Vec::Zero(params.q), d_rc = Vec::Zero(params.q);
  for (int k = 0; k < 3; ++k) {
    *gB[k] += dF[k].rowwise().sum();
    const Vec du = dF[k] * a;
    const Vec dv = dF[k] * c;
    d_a += dF[k].transpose() * fw.u[k];
    d_c += dF[k].transpose() * fw.v[k];
    gW[k]->noalias() += du * fw.r_m.transpose() + dv * fw.r_c.transpose();
    d_rm.noalias() += W[k]->transpose() * du;
    d_rc.noalias() += W[k]->transpose() * dv;
  }

  // a_i = γ dev_m_i, c_i = (1-γ) dev_c_i
  const Eigen::Map<const Vec> dev_m(fw.dev_m.data(), n);
  const Eigen::Map<const Vec> dev_c(fw.dev_c.data(), n);
  const double g = params.gamma();
  const double d_gamma = d_a.dot(dev_m) - d_c.dot(dev_c);
  grad.gamma_logit += d_gamma * g * (1.0 - g);

  const Vec d_zm = (fw.z_m.array() > 0.0).select(d_rm, 0.0);
  const Vec d_zc = (fw.z_c.array() > 0.0).select(d_rc, 0.0);
  grad.W1.noalias() += d_zm * fw.p.transpose();
  grad.b1 += d_zm;
  grad.W2.noalias() += d_zc * fw.p.transpose();
  grad.b2 += d_zc;
  const Vec d_p = params.W1.transpose() * d_zm + params.W2.transpose() * d_zc;

  // p = mean of embeddings
  const Vec d_e = d_p / static_cast<double>(fw.features.size());
  for (std::size_t i = 0; i < fw.features.size(); ++i) {
    auto& table = grad.tables[i];
    if (table.kind == EmbeddingTable::Kind::Numerical) {
      table.storage.row(0) += fw.features[i] * d_e.transpose();
    } else {
      table.storage.row(static_cast<Eigen::Index>(fw.features[i])) += d_e.transpose();
    }
  }
}

/// Predicted T2 outcome for one dyad: W3·S + b3 + ext_t1 (unclamped).
inline double predict(const ProcessedDyad& d, const ModelParameters& params) { return forward(d, params).prediction; }

inline double predict(const ProcessedDyad& d, const ModelParameters& params, Variant variant) {
  if (variant != params.variant) throw ConfigError("predict: variant does not match the parameters");
  return predict(d, params);
}

/// Attention weights over all max_len positions (0 where masked).
inline Vec attention_weights(const ProcessedDyad& d, const ModelParameters& params) {
  const auto fw = forward(d, params);
  Vec alpha = Vec::Zero(static_cast<Eigen::Index>(d.max_len()));
  alpha.head(fw.alpha.size()) = fw.alpha;
  return alpha;
}

// ---------------------------------------------------------------------------
// Loss

/// l2_coef × Σθ² over embeddings and weight matrices.
inline double l2_penalty(const ModelParameters& params, double l2_coef) {
  double s = 0.0;
  for_each_tensor(params, [&](const TensorInfo& info, std::span<const double> t) {
    if (!info.regularized) return;
    for (double x : t) s += x * x;
  });
  return l2_coef * s;
}

inline double target_of(const ProcessedDyad& d) {
  if (!d.externalizing_t2) throw ConfigError("loss: dyad '" + d.dyad_id + "' has no T2 outcome (impute first)");
  return *d.externalizing_t2;
}

/// Σ (ŷ - e_T2)² + l2_coef Σθ².
inline double loss(const data::Dataset& dataset, const ModelParameters& params, double l2_coef) {
  double total = 0.0;
  for (const auto& d : dataset) {
    const double r = predict(d, params) - target_of(d);
    total += r * r;
  }
  return total + l2_penalty(params, l2_coef);
}

inline double loss(const data::Dataset& dataset, const ModelParameters& params, Variant variant, double l2_coef) {
  if (variant != params.variant) throw ConfigError("loss: variant does not match the parameters");
  return loss(dataset, params, l2_coef);
}

struct LossAndGradient {
  double loss = 0.0;
  GradientSet gradient;
};

/// The loss and its exact gradient with respect to every trainable tensor.
inline LossAndGradient loss_and_gradient(const data::Dataset& dataset, const ModelParameters& params,
                                         double l2_coef) {
  LossAndGradient out{0.0, zeros_like(params)};
  for (const auto& d : dataset) {
    const auto fw = forward(d, params);
    const double r = fw.prediction - target_of(d);
    out.loss += r * r;
    backward(fw, params, 2.0 * r, out.gradient);
  }
  out.loss += l2_penalty(params, l2_coef);
  if (l2_coef != 0.0) {
    zip_tensors(out.gradient, params, [&](const TensorInfo& info, std::span<double> g, std::span<const double> p) {
      if (!info.regularized) return;
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += 2.0 * l2_coef * p[i];
    });
  }
  return out;
}

}  // namespace asbim::model
