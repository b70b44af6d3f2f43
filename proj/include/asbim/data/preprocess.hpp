#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "asbim/data/types.hpp"

namespace asbim::data {

/// 0 stays 0, any positive rating becomes 1 (defeat present); missing stays missing.
inline std::optional<double> binarize_defeat(std::optional<double> rating) {
  if (!rating) return std::nullopt;
  if (!(*rating >= 0.0)) throw IngestionError("defeat rating must be nonnegative");
  return *rating > 0.0 ? 1.0 : 0.0;
}

inline OptSeq binarize_defeat(const OptSeq& seq) {
  OptSeq out;
  out.reserve(seq.size());
  for (const auto& r : seq) out.push_back(binarize_defeat(r));
  return out;
}

/// Mean over observed values only. Accumulated as deviations from the first
/// observed value, so a constant sequence returns that value exactly and its
/// centered deviations are exactly zero.
inline double person_mean(const OptSeq& seq) {
  std::optional<double> first;
  double dev = 0.0;
  std::size_t n = 0;
  for (const auto& v : seq) {
    if (!v) continue;
    if (!first) first = *v;
    dev += *v - *first;
    ++n;
  }
  if (n == 0) throw DegenerateInputError("person_mean: sequence has no observed value");
  return *first + dev / static_cast<double>(n);
}

inline double person_mean(const std::vector<double>& seq) {
  if (seq.empty()) throw DegenerateInputError("person_mean: empty sequence");
  double dev = 0.0;
  for (double v : seq) dev += v - seq.front();
  return seq.front() + dev / static_cast<double>(seq.size());
}

struct Padded {
  std::vector<double> values;
  numcore::Mask mask;
};

/// First min(n, max_len) values kept with mask true; the rest are 0 with mask false.
inline Padded pad_or_truncate(const std::vector<double>& seq, std::size_t max_len = kDefaultMaxLen) {
  if (max_len == 0) throw ConfigError("pad_or_truncate: max_len must be >= 1");
  Padded out{std::vector<double>(max_len, 0.0), numcore::leading_mask(seq.size(), max_len)};
  std::copy_n(seq.begin(), std::min(seq.size(), max_len), out.values.begin());
  return out;
}

/// Keeps the first `max_len` intervals.
inline RawDyadObservation truncate(RawDyadObservation d, std::size_t max_len) {
  if (d.length() > max_len) {
    d.maternal_autonomy_support.resize(max_len);
    d.child_defeat_raw.resize(max_len);
  }
  return d;
}

/// Fills missing intervals: mother ratings with the mother's person mean, child defeat
/// (binarized first) with 0. The returned child sequence is binary.
inline RawDyadObservation impute_intervals(RawDyadObservation d) {
  const double mother_fill = person_mean(d.maternal_autonomy_support);
  auto child = binarize_defeat(d.child_defeat_raw);
  if (std::none_of(child.begin(), child.end(), [](const auto& v) { return v.has_value(); })) {
    throw DegenerateInputError("dyad '" + d.dyad_id + "': defeat sequence fully missing");
  }
  for (auto& m : d.maternal_autonomy_support) {
    if (!m) m = mother_fill;
  }
  for (auto& c : child) {
    if (!c) c = 0.0;
  }
  d.child_defeat_raw = std::move(child);
  return d;
}

inline std::vector<double> unwrap(const OptSeq& seq) {
  std::vector<double> out;
  out.reserve(seq.size());
  for (const auto& v : seq) {
    if (!v) throw InternalError("unwrap: sequence still has a missing value");
    out.push_back(*v);
  }
  return out;
}

/// Person means of (mother, binarized child) over the observed part of the first `max_len` intervals.
inline std::pair<double, double> person_means(const RawDyadObservation& d, std::size_t max_len = kDefaultMaxLen) {
  const auto window = truncate(d, max_len);
  return {person_mean(window.maternal_autonomy_support), person_mean(binarize_defeat(window.child_defeat_raw))};
}

/// Truncate, impute intervals, binarize, then pad. Person means come from the observed
/// (non-imputed) intervals of the truncated window.
inline ProcessedDyad preprocess(const RawDyadObservation& raw, std::size_t max_len = kDefaultMaxLen) {
  validate(raw);
  const auto window = truncate(raw, max_len);
  const auto [mother_mean, child_mean] = person_means(window, max_len);
  const auto filled = impute_intervals(window);

  auto mother = pad_or_truncate(unwrap(filled.maternal_autonomy_support), max_len);
  auto child = pad_or_truncate(unwrap(filled.child_defeat_raw), max_len);

  ProcessedDyad out;
  out.dyad_id = raw.dyad_id;
  out.mother_seq = std::move(mother.values);
  out.child_seq = std::move(child.values);
  out.mask = std::move(mother.mask);
  out.n_observed = std::min(raw.length(), max_len);
  out.mother_mean = mother_mean;
  out.child_mean = child_mean;
  out.externalizing_t1 = raw.externalizing_t1;
  out.externalizing_t2 = raw.externalizing_t2;
  out.gender = raw.gender;
  out.inhibitory_control = raw.inhibitory_control;
  check_invariants(out);
  return out;
}

inline Dataset preprocess(const RawDataset& raw, std::size_t max_len = kDefaultMaxLen) {
  Dataset out;
  out.reserve(raw.size());
  for (const auto& d : raw) out.push_back(preprocess(d, max_len));
  return out;
}

}  // namespace asbim::data
