#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "asbim/error.hpp"

namespace asbim::eval {

struct FoldAssignment {
  int k = 0;
  std::map<std::string, int> fold_of_dyad;

  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> s(static_cast<std::size_t>(k), 0);
    for (const auto& [id, f] : fold_of_dyad) ++s[static_cast<std::size_t>(f)];
    return s;
  }
};

/// Random partition into k folds whose sizes differ by at most one; the first
/// n mod k folds get the extra dyad.
template <class Rng>
FoldAssignment kfold_split(const std::vector<std::string>& dyad_ids, int k, Rng& gen) {
  if (k < 2) throw ConfigError("kfold_split: k must be >= 2");
  if (dyad_ids.size() < static_cast<std::size_t>(k)) {
    throw ConfigError("kfold_split: k=" + std::to_string(k) + " exceeds the " + std::to_string(dyad_ids.size()) +
                      " dyads");
  }
  std::vector<std::size_t> order(dyad_ids.size());
  std::iota(order.begin(), order.end(), 0);
  // Fisher-Yates with an explicit draw keeps the permutation independent of the
  // standard library's shuffle implementation.
  for (std::size_t i = order.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(gen)]);
  }
  FoldAssignment out{k, {}};
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const auto& id = dyad_ids[order[pos]];
    if (!out.fold_of_dyad.emplace(id, static_cast<int>(pos % static_cast<std::size_t>(k))).second) {
      throw ConfigError("kfold_split: duplicate dyad id '" + id + "'");
    }
  }
  return out;
}

}  // namespace asbim::eval
