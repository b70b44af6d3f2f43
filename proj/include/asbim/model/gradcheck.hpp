#pragma once

#include <cstdint>
#include <random>

#include "asbim/data/preprocess.hpp"
#include "asbim/model/asbim.hpp"
#include "asbim/numcore/gradcheck.hpp"
#include "asbim/rng.hpp"

namespace asbim::model {

inline constexpr double kGradCheckStep = 1e-5;
inline constexpr double kGradCheckThreshold = 1e-4;

struct GradCheckInstance {
  data::Dataset dataset;
  ModelParameters params;
  double l2_coef = 1e-3;
};

/// A random two-dyad problem with every parameter group active: nonzero biases,
/// a random γ logit, non-identity feature scaling and a padded sequence.
inline GradCheckInstance random_gradcheck_instance(std::uint64_t seed, int q, int h, Variant variant) {
  auto gen = rng::substream(seed, "gradcheck");
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::uniform_real_distribution<double> rating(0.0, 3.0);
  std::bernoulli_distribution coin(0.5);

  GradCheckInstance inst;
  inst.params = init_params(variant, q, h, gen);
  for (auto* b : {&inst.params.b1, &inst.params.b2, &inst.params.f1_b, &inst.params.f2_b, &inst.params.f3_b}) {
    for (Eigen::Index i = 0; i < b->size(); ++i) (*b)[i] = u(gen);
  }
  inst.params.b3 = u(gen);
  inst.params.gamma_logit = 2.0 * u(gen);
  for (std::size_t f = 0; f < 5; ++f) {
    inst.params.scaling.mean[f] = u(gen);
    inst.params.scaling.sd[f] = 1.0 + u(gen);
  }

  constexpr std::size_t kMaxLen = 8;
  for (std::size_t j = 0; j < 2; ++j) {
    data::RawDyadObservation raw;
    raw.dyad_id = "G" + std::to_string(j);
    const std::size_t n = j == 0 ? 5 : kMaxLen;
    bool any_defeat = false;
    for (std::size_t t = 0; t < n; ++t) {
      raw.maternal_autonomy_support.push_back(rating(gen));
      const bool defeat = coin(gen) || (t + 1 == n && !any_defeat);
      any_defeat = any_defeat || defeat;
      raw.child_defeat_raw.push_back(defeat ? 1.0 : 0.0);
    }
    raw.gender = coin(gen) ? data::Gender::Girl : data::Gender::Boy;
    raw.externalizing_t1 = 1.0 + u(gen);
    raw.externalizing_t2 = 1.0 + u(gen);
    raw.inhibitory_control = 4.0 + 2.0 * u(gen);
    inst.dataset.push_back(data::preprocess(raw, kMaxLen));
  }
  return inst;
}

/// Compares loss_and_gradient with central differences on a random instance.
/// `corrupt` perturbs one analytic partial (negative control).
inline numcore::GradCheckReport check_gradients(std::uint64_t seed, int q, int h, Variant variant,
                                                bool corrupt = false) {
  const auto inst = random_gradcheck_instance(seed, q, h, variant);
  auto analytic = loss_and_gradient(inst.dataset, inst.params, inst.l2_coef).gradient;
  if (corrupt) analytic.W1(0, 0) += 1e-3 * (1.0 + std::abs(analytic.W1(0, 0)));
  const auto fn = [&](const ModelParameters& p) { return loss(inst.dataset, p, inst.l2_coef); };
  return numcore::finite_difference_check(fn, analytic, inst.params, kGradCheckStep);
}

}  // namespace asbim::model
