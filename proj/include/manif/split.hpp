#ifndef MANIF_SPLIT_HPP
#define MANIF_SPLIT_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <vector>

#include "manif/dataset.hpp"
#include "manif/encoder.hpp"
#include "manif/errors.hpp"
#include "manif/param_vector.hpp"
#include "manif/rng.hpp"

namespace manif {

// An unlearning request frozen at creation time: the erased/retained
// partition, each erased sample's cached original representation, and its
// k nearest retained neighbors in the original representation space.
struct UnlearnSplit {
  std::vector<int> erased;    // ascending
  std::vector<int> retained;  // ascending
  std::map<int, Vec> original_reps;             // erased index -> z_i,o
  std::map<int, std::vector<int>> neighbor_sets;  // erased index -> k retained indices
  std::vector<int> neighbor_union;              // ascending, deduplicated
  int k = 0;
  std::uint64_t seed = 0;
  bool balanced = false;

  void validate(std::size_t dataset_size) const {
    if (erased.size() + retained.size() != dataset_size)
      throw DimensionError("split: erased/retained do not partition the dataset");
    std::vector<char> seen(dataset_size, 0);
    for (int i : erased) {
      if (i < 0 || static_cast<std::size_t>(i) >= dataset_size || seen[i])
        throw DimensionError("split: bad erased index");
      seen[i] = 1;
    }
    for (int i : retained) {
      if (i < 0 || static_cast<std::size_t>(i) >= dataset_size || seen[i])
        throw DimensionError("split: bad retained index");
      seen[i] = 2;
    }
    for (const auto& [e, nbrs] : neighbor_sets) {
      if (static_cast<int>(nbrs.size()) != k)
        throw DimensionError("split: neighbor set size != k");
      for (int j : nbrs)
        if (j < 0 || static_cast<std::size_t>(j) >= dataset_size || seen[j] != 2)
          throw DimensionError("split: neighbor index not retained");
    }
  }
};

namespace detail {

// Erased index selection. Uniform draws without replacement by default;
// balanced mode round-robins over classes (shuffled within each class).
inline std::vector<int> draw_erased(const Dataset& data, int uss, bool balanced,
                                    Rng& rng) {
  std::vector<int> erased;
  if (balanced) {
    std::vector<std::vector<int>> by_class(data.class_count);
    for (std::size_t i = 0; i < data.size(); ++i)
      by_class[data.labels[i]].push_back(static_cast<int>(i));
    for (auto& v : by_class) rng.shuffle(v);
    std::size_t round = 0;
    while (static_cast<int>(erased.size()) < uss) {
      bool any = false;
      for (int c = 0; c < data.class_count &&
                      static_cast<int>(erased.size()) < uss; ++c) {
        if (round < by_class[c].size()) {
          erased.push_back(by_class[c][round]);
          any = true;
        }
      }
      if (!any) break;
      ++round;
    }
  } else {
    std::vector<int> all(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) all[i] = static_cast<int>(i);
    rng.shuffle(all);
    erased.assign(all.begin(), all.begin() + uss);
  }
  std::sort(erased.begin(), erased.end());
  return erased;
}

}  // namespace detail

// Builds the unlearning split under the original parameters: neighbors are
// the k nearest retained samples by Euclidean distance between original
// representations, ties broken toward the lower index. The split is fixed
// here and never recomputed during unlearning.
inline UnlearnSplit make_split(const Dataset& data, int uss, int k,
                               const EncoderSpec& spec,
                               const ParamVector& params_o, std::uint64_t seed,
                               bool balanced = false) {
  data.validate();
  if (uss < 1 || static_cast<std::size_t>(uss) >= data.size())
    throw ConfigError("make_split: unlearning set size must be in [1, dataset size)");
  if (k < 1 || static_cast<std::size_t>(k) > data.size() - uss)
    throw ConfigError("make_split: k must be in [1, retained size]");

  UnlearnSplit s;
  s.k = k;
  s.seed = seed;
  s.balanced = balanced;
  Rng rng(seed);
  s.erased = detail::draw_erased(data, uss, balanced, rng);

  std::vector<char> is_erased(data.size(), 0);
  for (int i : s.erased) is_erased[i] = 1;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (!is_erased[i]) s.retained.push_back(static_cast<int>(i));

  std::vector<Vec> retained_reps(s.retained.size());
  for (std::size_t j = 0; j < s.retained.size(); ++j)
    retained_reps[j] = forward(spec, params_o, data.inputs[s.retained[j]]).representation;

  std::vector<char> in_union(data.size(), 0);
  for (int e : s.erased) {
    Vec z = forward(spec, params_o, data.inputs[e]).representation;
    // (distance, retained index) pairs; ties resolve to the lower index
    std::vector<std::pair<double, int>> cand(s.retained.size());
    for (std::size_t j = 0; j < s.retained.size(); ++j) {
      double d2 = 0.0;
      for (std::size_t t = 0; t < z.size(); ++t) {
        double diff = z[t] - retained_reps[j][t];
        d2 += diff * diff;
      }
      cand[j] = {d2, s.retained[j]};
    }
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
    std::vector<int> nbrs(k);
    for (int t = 0; t < k; ++t) {
      nbrs[t] = cand[t].second;
      in_union[nbrs[t]] = 1;
    }
    s.neighbor_sets.emplace(e, std::move(nbrs));
    s.original_reps.emplace(e, std::move(z));
  }
  for (std::size_t i = 0; i < data.size(); ++i)
    if (in_union[i]) s.neighbor_union.push_back(static_cast<int>(i));
  return s;
}

}  // namespace manif

#endif
