#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "asbim/data/preprocess.hpp"

namespace asbim::data {

struct VariableSummary {
  std::string name;
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;  // sample sd (n-1); 0 when n < 2
  double min = 0.0;
  double max = 0.0;
};

/// Between-person summary of the five study variables. Correlations use
/// pairwise-complete dyads and are empty when either side has zero variance.
struct Descriptives {
  static constexpr std::array<const char*, 5> kNames = {"maut", "cdef", "ext_t1", "ext_t2", "inhibitory_control"};
  std::vector<VariableSummary> variables;
  std::vector<std::vector<std::optional<double>>> correlation;
};

inline std::optional<double> pairwise_correlation(const std::vector<std::optional<double>>& a,
                                                  const std::vector<std::optional<double>>& b) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] && b[i]) {
      x.push_back(*a[i]);
      y.push_back(*b[i]);
    }
  }
  if (x.size() < 2) return std::nullopt;
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

inline Descriptives descriptives(const RawDataset& dataset) {
  if (dataset.empty()) throw DegenerateInputError("descriptives: empty dataset");
  std::vector<std::vector<std::optional<double>>> columns(Descriptives::kNames.size());
  for (const auto& d : dataset) {
    columns[0].push_back(person_mean(d.maternal_autonomy_support));
    columns[1].push_back(person_mean(binarize_defeat(d.child_defeat_raw)));
    columns[2].push_back(d.externalizing_t1);
    columns[3].push_back(d.externalizing_t2);
    columns[4].push_back(d.inhibitory_control);
  }

  Descriptives out;
  for (std::size_t v = 0; v < columns.size(); ++v) {
    VariableSummary s{Descriptives::kNames[v]};
    double sum = 0.0;
    bool first = true;
    for (const auto& x : columns[v]) {
      if (!x) continue;
      ++s.n;
      sum += *x;
      s.min = first ? *x : std::min(s.min, *x);
      s.max = first ? *x : std::max(s.max, *x);
      first = false;
    }
    if (s.n > 0) s.mean = sum / static_cast<double>(s.n);
    if (s.n > 1) {
      double ss = 0.0;
      for (const auto& x : columns[v]) {
        if (x) ss += (*x - s.mean) * (*x - s.mean);
      }
      s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
    }
    out.variables.push_back(s);
  }
  out.correlation.assign(columns.size(), std::vector<std::optional<double>>(columns.size()));
  for (std::size_t a = 0; a < columns.size(); ++a) {
    for (std::size_t b = 0; b < columns.size(); ++b) {
      out.correlation[a][b] = pairwise_correlation(columns[a], columns[b]);
    }
  }
  return out;
}

}  // namespace asbim::data
