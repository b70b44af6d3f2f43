#pragma once

#include <array>
#include <cmath>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "asbim/data/types.hpp"
#include "asbim/numcore/dense.hpp"

namespace asbim::model {

using numcore::Mat;
using numcore::Vec;

enum class Variant { Base, PlusInhibitoryControl };

inline std::string_view to_string(Variant v) { return v == Variant::Base ? "base" : "plus_d"; }

inline Variant parse_variant(std::string_view s) {
  if (s == "base" || s == "asbim") return Variant::Base;
  if (s == "plus_d" || s == "plusd" || s == "asbim+d" || s == "+d") return Variant::PlusInhibitoryControl;
  throw ConfigError("unknown variant '" + std::string(s) + "' (expected base or plus_d)");
}

inline Variant parse_enum(std::string_view s, Variant*) { return parse_variant(s); }

/// Individual features in embedding order. Gender is the only categorical one.
enum class Feature : std::size_t { MotherMean = 0, ChildMean = 1, ExternalizingT1 = 2, Gender = 3, InhibitoryControl = 4 };

inline constexpr std::array<const char*, 5> kFeatureNames = {"mother_mean", "child_mean", "ext_t1", "gender",
                                                             "inhibitory_control"};

inline std::size_t feature_count(Variant v) { return v == Variant::Base ? 4 : 5; }

inline bool is_categorical(Feature f) { return f == Feature::Gender; }

/// Lookup table for one individual feature: l×q rows for a categorical feature,
/// a single 1×q row for a numerical one.
struct EmbeddingTable {
  enum class Kind { Categorical, Numerical };
  Kind kind = Kind::Numerical;
  Mat storage;

  Eigen::Index dim() const { return storage.cols(); }
};

/// z-score statistics of the numerical features, fitted on training dyads only.
/// Indexed by Feature (the Gender slot is unused).
struct FeatureScaling {
  std::array<double, 5> mean{0, 0, 0, 0, 0};
  std::array<double, 5> sd{1, 1, 1, 1, 1};

  double apply(Feature f, double x) const {
    const auto i = static_cast<std::size_t>(f);
    return (x - mean[i]) / sd[i];
  }
};

/// Trainable tensors of the model, plus the (non-trainable) feature scaling.
/// A ModelParameters of identical shape doubles as a gradient or an Adam moment.
struct ModelParameters {
  Variant variant = Variant::Base;
  int q = 50;
  int h = 50;

  std::vector<EmbeddingTable> tables;  // one per Feature, in Feature order
  Mat W1, W2;                          // q×q
  Vec b1, b2;                          // q
  double gamma_logit = 0.0;
  Mat f1_w, f2_w, f3_w;                // h×q
  Vec f1_b, f2_b, f3_b;                // h
  Vec w3;                              // h (the 1×h output row)
  double b3 = 0.0;

  FeatureScaling scaling;

  double gamma() const { return numcore::sigmoid(gamma_logit); }
};

using GradientSet = ModelParameters;

struct TensorInfo {
  std::string name;
  bool regularized;
};

/// Visits every trainable tensor as a flat span, in a fixed order. Embeddings and
/// weight matrices are regularized; biases and gamma_logit are not.
template <class P, class F>
  requires std::is_same_v<std::remove_const_t<P>, ModelParameters>
void for_each_tensor(P& p, F&& f) {
  using Elem = std::conditional_t<std::is_const_v<P>, const double, double>;
  const auto span_of = [](auto& m) { return std::span<Elem>(m.data(), static_cast<std::size_t>(m.size())); };
  for (std::size_t i = 0; i < p.tables.size(); ++i) {
    f(TensorInfo{std::string("emb.") + kFeatureNames[i], true}, span_of(p.tables[i].storage));
  }
  f(TensorInfo{"W1", true}, span_of(p.W1));
  f(TensorInfo{"b1", false}, span_of(p.b1));
  f(TensorInfo{"W2", true}, span_of(p.W2));
  f(TensorInfo{"b2", false}, span_of(p.b2));
  f(TensorInfo{"gamma_logit", false}, std::span<Elem>(&p.gamma_logit, 1));
  f(TensorInfo{"f1.weight", true}, span_of(p.f1_w));
  f(TensorInfo{"f1.bias", false}, span_of(p.f1_b));
  f(TensorInfo{"f2.weight", true}, span_of(p.f2_w));
  f(TensorInfo{"f2.bias", false}, span_of(p.f2_b));
  f(TensorInfo{"f3.weight", true}, span_of(p.f3_w));
  f(TensorInfo{"f3.bias", false}, span_of(p.f3_b));
  f(TensorInfo{"W3", true}, span_of(p.w3));
  f(TensorInfo{"b3", false}, std::span<Elem>(&p.b3, 1));
}

template <class P>
auto tensor_list(P& p) {
  using Elem = std::conditional_t<std::is_const_v<P>, const double, double>;
  std::vector<std::pair<TensorInfo, std::span<Elem>>> out;
  for_each_tensor(p, [&](const TensorInfo& info, std::span<Elem> s) { out.emplace_back(info, s); });
  return out;
}

/// Calls f(info, a_span, b_span) for matching tensors of two same-shaped parameter sets.
template <class A, class B, class F>
void zip_tensors(A& a, B& b, F&& f) {
  auto la = tensor_list(a);
  auto lb = tensor_list(b);
  if (la.size() != lb.size()) throw ConfigError("parameter sets have different tensor counts");
  for (std::size_t i = 0; i < la.size(); ++i) {
    if (la[i].second.size() != lb[i].second.size()) {
      throw ConfigError("parameter shape mismatch in " + la[i].first.name);
    }
    f(la[i].first, la[i].second, lb[i].second);
  }
}

/// All-zero parameters with the given shape.
inline ModelParameters zeros(Variant variant, int q, int h) {
  if (q < 1 || h < 1) throw ConfigError("model dims q and h must be positive");
  ModelParameters p;
  p.variant = variant;
  p.q = q;
  p.h = h;
  for (std::size_t i = 0; i < feature_count(variant); ++i) {
    const bool cat = is_categorical(static_cast<Feature>(i));
    p.tables.push_back({cat ? EmbeddingTable::Kind::Categorical : EmbeddingTable::Kind::Numerical,
                        Mat::Zero(cat ? 2 : 1, q)});
  }
  p.W1 = Mat::Zero(q, q);
  p.W2 = Mat::Zero(q, q);
  p.b1 = Vec::Zero(q);
  p.b2 = Vec::Zero(q);
  p.f1_w = Mat::Zero(h, q);
  p.f2_w = Mat::Zero(h, q);
  p.f3_w = Mat::Zero(h, q);
  p.f1_b = Vec::Zero(h);
  p.f2_b = Vec::Zero(h);
  p.f3_b = Vec::Zero(h);
  p.w3 = Vec::Zero(h);
  return p;
}

inline ModelParameters zeros_like(const ModelParameters& p) {
  auto z = zeros(p.variant, p.q, p.h);
  z.scaling = p.scaling;
  return z;
}

/// Embedding tables use fan-in 1 (a scalar feature), so entries are U(-1, 1);
/// dense weights are U(-1/sqrt(fan_in), 1/sqrt(fan_in)); biases and gamma_logit start at 0.
template <class Rng>
ModelParameters init_params(Variant variant, int q, int h, Rng& gen) {
  auto p = zeros(variant, q, h);
  const auto fill = [&](Mat& m, double fan_in) {
    std::uniform_real_distribution<double> u(-1.0 / std::sqrt(fan_in), 1.0 / std::sqrt(fan_in));
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = u(gen);
  };
  const auto fill_vec = [&](Vec& v, double fan_in) {
    std::uniform_real_distribution<double> u(-1.0 / std::sqrt(fan_in), 1.0 / std::sqrt(fan_in));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = u(gen);
  };
  for (auto& t : p.tables) fill(t.storage, 1.0);
  fill(p.W1, q);
  fill(p.W2, q);
  fill(p.f1_w, q);
  fill(p.f2_w, q);
  fill(p.f3_w, q);
  fill_vec(p.w3, h);
  return p;
}

inline std::size_t parameter_count(const ModelParameters& p) {
  std::size_t n = 0;
  for_each_tensor(p, [&](const TensorInfo&, std::span<const double> s) { n += s.size(); });
  return n;
}

inline bool all_finite(const ModelParameters& p) {
  bool ok = true;
  for_each_tensor(p, [&](const TensorInfo&, std::span<const double> s) {
    for (double v : s) ok = ok && std::isfinite(v);
  });
  return ok;
}

}  // namespace asbim::model
