#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "asbim/data/types.hpp"
#include "asbim/numcore/dense.hpp"
#include "asbim/rng.hpp"

namespace asbim::data {

/// Coefficients of the lagged dyadic process and the outcome law. Defaults sit near
/// the observed study moments; none of them are estimates.
struct SyntheticConfig {
  int n_dyads = 101;
  int seq_len = 20;
  double mother_mean_mu = 0.58;
  double mother_mean_sd = 0.29;
  double mother_noise_sd = 0.30;
  double defeat_base_rate = 0.22;
  double lag_mother_to_child = 0.80;  // a_mc, logit scale
  double lag_child_to_mother = 0.11;  // a_cm, population mean
  double lag_cm_spread = 0.15;        // sd of the dyad-specific a_cm,j
  double ar_mother = 0.10;
  double ar_child = 0.21;
  double t1_mean = 0.69;
  double t1_sd = 0.28;
  double girl_rate = 0.545;
  double inhibitory_mean = 4.78;
  double inhibitory_sd = 0.60;
  double inhibitory_coef_t1 = -1.05;
  double outcome_intercept = 0.30;
  double outcome_coef_lag_cm = -0.44;
  double outcome_coef_t1 = 0.54;
  double outcome_noise_sd = 0.20;
  double missing_t2_rate = 0.0;
  double missing_interval_rate = 0.0;
  std::uint64_t rng_seed = 1;
};

template <class F>
void visit_fields(SyntheticConfig& c, F&& f) {
  f("n_dyads", c.n_dyads);
  f("seq_len", c.seq_len);
  f("mother_mean_mu", c.mother_mean_mu);
  f("mother_mean_sd", c.mother_mean_sd);
  f("mother_noise_sd", c.mother_noise_sd);
  f("defeat_base_rate", c.defeat_base_rate);
  f("lag_mother_to_child", c.lag_mother_to_child);
  f("lag_child_to_mother", c.lag_child_to_mother);
  f("lag_cm_spread", c.lag_cm_spread);
  f("ar_mother", c.ar_mother);
  f("ar_child", c.ar_child);
  f("t1_mean", c.t1_mean);
  f("t1_sd", c.t1_sd);
  f("girl_rate", c.girl_rate);
  f("inhibitory_mean", c.inhibitory_mean);
  f("inhibitory_sd", c.inhibitory_sd);
  f("inhibitory_coef_t1", c.inhibitory_coef_t1);
  f("outcome_intercept", c.outcome_intercept);
  f("outcome_coef_lag_cm", c.outcome_coef_lag_cm);
  f("outcome_coef_t1", c.outcome_coef_t1);
  f("outcome_noise_sd", c.outcome_noise_sd);
  f("missing_t2_rate", c.missing_t2_rate);
  f("missing_interval_rate", c.missing_interval_rate);
  f("rng_seed", c.rng_seed);
}

inline void validate(const SyntheticConfig& c) {
  const auto fail = [](const std::string& msg) { throw ConfigError("synthetic config: " + msg); };
  if (c.n_dyads < 0) fail("n_dyads must be >= 0");
  if (c.seq_len < 1) fail("seq_len must be >= 1");
  if (!(std::abs(c.ar_mother) < 1.0) || !(std::abs(c.ar_child) < 1.0)) fail("|ar_mother| and |ar_child| must be < 1");
  if (!(c.defeat_base_rate > 0.0 && c.defeat_base_rate < 1.0)) fail("defeat_base_rate must lie in (0,1)");
  if (!(c.girl_rate >= 0.0 && c.girl_rate <= 1.0)) fail("girl_rate must lie in [0,1]");
  if (!(c.missing_t2_rate >= 0.0 && c.missing_t2_rate < 1.0)) fail("missing_t2_rate must lie in [0,1)");
  if (!(c.missing_interval_rate >= 0.0 && c.missing_interval_rate < 1.0)) fail("missing_interval_rate must lie in [0,1)");
  for (double sd : {c.mother_mean_sd, c.mother_noise_sd, c.lag_cm_spread, c.t1_sd, c.inhibitory_sd, c.outcome_noise_sd}) {
    if (!(sd >= 0.0) || !std::isfinite(sd)) fail("standard deviations must be finite and >= 0");
  }
}

struct SyntheticDataset {
  RawDataset dyads;
  std::vector<double> child_to_mother_lag;  // realized a_cm,j per dyad
};

inline std::string synthetic_id(int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "S%05d", i + 1);
  return buf;
}

/// Simulates the lagged dyadic process. Dyad j uses its own substream of `rng_seed`,
/// so output is bit-reproducible and a prefix of a larger run.
inline SyntheticDataset generate_synthetic_with_truth(const SyntheticConfig& cfg) {
  validate(cfg);
  SyntheticDataset out;
  const double base_logit = numcore::logit(cfg.defeat_base_rate);
  for (int j = 0; j < cfg.n_dyads; ++j) {
    auto gen = rng::substream(cfg.rng_seed, "synthetic-dyad", static_cast<std::uint64_t>(j));
    std::normal_distribution<double> std_normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const auto normal = [&](double mu, double sd) { return mu + sd * std_normal(gen); };
    const auto bernoulli = [&](double p) { return unif(gen) < p; };

    RawDyadObservation d;
    d.dyad_id = synthetic_id(j);
    d.gender = bernoulli(cfg.girl_rate) ? Gender::Girl : Gender::Boy;
    const double mu_m = std::clamp(normal(cfg.mother_mean_mu, cfg.mother_mean_sd), kRatingMin, kRatingMax);
    const double a_cm = normal(cfg.lag_child_to_mother, cfg.lag_cm_spread);

    double x = normal(0.0, cfg.mother_noise_sd);
    double y = bernoulli(cfg.defeat_base_rate) ? 1.0 : 0.0;
    for (int t = 0; t < cfg.seq_len; ++t) {
      if (t > 0) {
        const double x_next = cfg.ar_mother * x + a_cm * y + normal(0.0, cfg.mother_noise_sd);
        const double p = numcore::sigmoid(base_logit + cfg.lag_mother_to_child * x + cfg.ar_child * (2.0 * y - 1.0));
        y = bernoulli(p) ? 1.0 : 0.0;
        x = x_next;
      }
      std::optional<double> m = std::clamp(mu_m + x, kRatingMin, kRatingMax);
      std::optional<double> c = y;
      // The first interval is always observed so every sequence keeps a person mean.
      if (t > 0 && cfg.missing_interval_rate > 0.0) {
        if (bernoulli(cfg.missing_interval_rate)) m.reset();
        if (bernoulli(cfg.missing_interval_rate)) c.reset();
      }
      d.maternal_autonomy_support.push_back(m);
      d.child_defeat_raw.push_back(c);
    }

    const double t1 = std::clamp(normal(cfg.t1_mean, cfg.t1_sd), kOutcomeMin, kOutcomeMax);
    d.externalizing_t1 = t1;
    const double ic_resid =
        std::sqrt(std::max(0.0, cfg.inhibitory_sd * cfg.inhibitory_sd -
                                    cfg.inhibitory_coef_t1 * cfg.inhibitory_coef_t1 * cfg.t1_sd * cfg.t1_sd));
    d.inhibitory_control = std::clamp(
        cfg.inhibitory_mean + cfg.inhibitory_coef_t1 * (t1 - cfg.t1_mean) + normal(0.0, ic_resid), kInhibitoryMin,
        kInhibitoryMax);
    const double t2 = cfg.outcome_intercept + cfg.outcome_coef_t1 * t1 + cfg.outcome_coef_lag_cm * a_cm +
                      normal(0.0, cfg.outcome_noise_sd);
    d.externalizing_t2 = std::clamp(t2, kOutcomeMin, kOutcomeMax);
    if (cfg.missing_t2_rate > 0.0 && bernoulli(cfg.missing_t2_rate)) d.externalizing_t2.reset();

    out.dyads.push_back(std::move(d));
    out.child_to_mother_lag.push_back(a_cm);
  }
  return out;
}

inline RawDataset generate_synthetic(const SyntheticConfig& cfg) { return generate_synthetic_with_truth(cfg).dyads; }

}  // namespace asbim::data
