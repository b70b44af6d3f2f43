#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "asbim/error.hpp"
#include "asbim/numcore/dense.hpp"

namespace asbim::data {

/// Encoded as boy=0, girl=1.
enum class Gender : int { Boy = 0, Girl = 1 };

inline constexpr std::size_t kDefaultMaxLen = 20;

inline constexpr double kRatingMin = 0.0;
inline constexpr double kRatingMax = 3.0;
inline constexpr double kOutcomeMin = 0.0;
inline constexpr double kOutcomeMax = 2.0;
inline constexpr double kInhibitoryMin = 1.0;
inline constexpr double kInhibitoryMax = 7.0;

using OptSeq = std::vector<std::optional<double>>;

/// One family's record as ingested: 15-second interval ratings plus per-dyad measures.
struct RawDyadObservation {
  std::string dyad_id;
  Gender gender = Gender::Boy;
  OptSeq maternal_autonomy_support;
  OptSeq child_defeat_raw;
  double externalizing_t1 = 0.0;
  std::optional<double> externalizing_t2;
  std::optional<double> inhibitory_control;

  std::size_t length() const { return maternal_autonomy_support.size(); }
};

using RawDataset = std::vector<RawDyadObservation>;

inline bool in_range(double v, double lo, double hi) { return std::isfinite(v) && v >= lo && v <= hi; }

/// Throws IngestionError describing the first violated invariant.
inline void validate(const RawDyadObservation& d) {
  const auto fail = [&](const std::string& msg) { throw IngestionError("dyad '" + d.dyad_id + "': " + msg); };
  if (d.maternal_autonomy_support.empty()) fail("empty behavior sequence");
  if (d.maternal_autonomy_support.size() != d.child_defeat_raw.size()) fail("sequences have unequal lengths");
  for (std::size_t t = 0; t < d.length(); ++t) {
    const auto& m = d.maternal_autonomy_support[t];
    const auto& c = d.child_defeat_raw[t];
    if (m && !in_range(*m, kRatingMin, kRatingMax)) fail("maternal rating out of [0,3] at t=" + std::to_string(t + 1));
    if (c && !in_range(*c, kRatingMin, kRatingMax)) fail("defeat rating out of [0,3] at t=" + std::to_string(t + 1));
  }
  if (!in_range(d.externalizing_t1, kOutcomeMin, kOutcomeMax)) fail("ext_t1 out of [0,2]");
  if (d.externalizing_t2 && !in_range(*d.externalizing_t2, kOutcomeMin, kOutcomeMax)) fail("ext_t2 out of [0,2]");
  if (d.inhibitory_control && !in_range(*d.inhibitory_control, kInhibitoryMin, kInhibitoryMax)) {
    fail("inhibitory_control out of [1,7]");
  }
}

/// Model-ready record: binarized, interval-imputed and padded sequences with mask.
struct ProcessedDyad {
  std::string dyad_id;
  std::vector<double> mother_seq;
  std::vector<double> child_seq;
  numcore::Mask mask;
  std::size_t n_observed = 0;
  double mother_mean = 0.0;
  double child_mean = 0.0;
  double externalizing_t1 = 0.0;
  std::optional<double> externalizing_t2;
  Gender gender = Gender::Boy;
  std::optional<double> inhibitory_control;

  std::size_t max_len() const { return mask.size(); }
};

using Dataset = std::vector<ProcessedDyad>;

/// Throws InternalError if the record breaks its invariants.
inline void check_invariants(const ProcessedDyad& d) {
  const auto fail = [&](const std::string& msg) { throw InternalError("processed dyad '" + d.dyad_id + "': " + msg); };
  const std::size_t len = d.mask.size();
  if (len == 0 || d.mother_seq.size() != len || d.child_seq.size() != len) fail("inconsistent lengths");
  if (d.n_observed == 0 || d.n_observed > len) fail("n_observed out of range");
  for (std::size_t i = 0; i < len; ++i) {
    const bool observed = i < d.n_observed;
    if (d.mask[i] != observed) fail("mask is not a leading run of trues");
    if (d.child_seq[i] != 0.0 && d.child_seq[i] != 1.0) fail("child value not binary");
    if (!observed && (d.mother_seq[i] != 0.0 || d.child_seq[i] != 0.0)) fail("padding not zero");
    if (!std::isfinite(d.mother_seq[i])) fail("non-finite mother value");
  }
  if (!std::isfinite(d.mother_mean) || !std::isfinite(d.child_mean)) fail("non-finite person mean");
}

}  // namespace asbim::data
