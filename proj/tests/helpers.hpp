// Copyright 2026 spmdperf Authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "spmdperf/model.hpp"
#include "spmdperf/roughset.hpp"

namespace testing_support {

// ---------------------------------------------------------------------------
// Independent reduct oracle.
//
// Works straight from the definition, without discernibility matrices or
// cover search: an attribute subset preserves the table iff every pair of
// objects that (a) carries different decisions and (b) is distinguishable by
// the full attribute set is still distinguishable inside the subset.  Pairs
// indistinguishable even with every attribute are contradictions no subset
// can repair, so they are exempt.  Reducts are the minimal preserving
// subsets; the core is their intersection.
// ---------------------------------------------------------------------------

inline bool subset_preserves(const spmdperf::DecisionTable& t, std::uint32_t mask) {
  const std::size_t n = t.objects.size();
  const std::size_t a = t.attributes.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (t.decisions[i] == t.decisions[j]) continue;
      bool full_discernible = false;
      bool subset_discernible = false;
      for (std::size_t k = 0; k < a; ++k) {
        if (t.values[i][k] != t.values[j][k]) {
          full_discernible = true;
          if (mask & (1u << k)) subset_discernible = true;
        }
      }
      if (full_discernible && !subset_discernible) return false;
    }
  }
  return true;
}

struct OracleReducts {
  std::vector<std::vector<int>> reducts;  // attribute indices, (size, lex) order
  std::vector<int> core;                  // ascending attribute indices
};

inline OracleReducts brute_force_reducts(const spmdperf::DecisionTable& t) {
  const int a = static_cast<int>(t.attributes.size());
  std::vector<std::uint32_t> preserving;
  for (std::uint32_t mask = 0; mask < (1u << a); ++mask) {
    if (subset_preserves(t, mask)) preserving.push_back(mask);
  }
  std::vector<std::uint32_t> minimal;
  for (std::uint32_t m : preserving) {
    bool is_minimal = true;
    for (std::uint32_t other : preserving) {
      if (other != m && (other & m) == other) {
        is_minimal = false;
        break;
      }
    }
    if (is_minimal) minimal.push_back(m);
  }
  OracleReducts out;
  for (std::uint32_t m : minimal) {
    std::vector<int> attrs;
    for (int k = 0; k < a; ++k) {
      if (m & (1u << k)) attrs.push_back(k);
    }
    out.reducts.push_back(attrs);
  }
  std::sort(out.reducts.begin(), out.reducts.end(),
            [](const std::vector<int>& x, const std::vector<int>& y) {
              if (x.size() != y.size()) return x.size() < y.size();
              return x < y;
            });
  if (!out.reducts.empty()) {
    std::uint32_t inter = minimal.front();
    for (std::uint32_t m : minimal) inter &= m;
    for (int k = 0; k < a; ++k) {
      if (inter & (1u << k)) out.core.push_back(k);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exact 1-D k-means oracle: dynamic program over contiguous runs of the
// sorted values (an optimal 1-D clustering is always contiguous).  Returns
// the minimal within-cluster sum of squares for at most k clusters.
// ---------------------------------------------------------------------------

inline double exact_kmeans_wcss(std::vector<double> values, int k) {
  std::sort(values.begin(), values.end());
  const int n = static_cast<int>(values.size());
  if (n == 0) return 0.0;
  // Prefix sums for O(1) segment cost.
  std::vector<double> sum(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> sumsq(static_cast<std::size_t>(n) + 1, 0.0);
  for (int i = 0; i < n; ++i) {
    sum[i + 1] = sum[i] + values[i];
    sumsq[i + 1] = sumsq[i] + values[i] * values[i];
  }
  auto cost = [&](int lo, int hi) {  // [lo, hi)
    const double s = sum[hi] - sum[lo];
    const double q = sumsq[hi] - sumsq[lo];
    const double m = static_cast<double>(hi - lo);
    return q - s * s / m;
  };
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> dp(
      static_cast<std::size_t>(k) + 1,
      std::vector<double>(static_cast<std::size_t>(n) + 1, inf));
  dp[0][0] = 0.0;
  for (int c = 1; c <= k; ++c) {
    for (int i = 1; i <= n; ++i) {
      for (int split = c - 1; split < i; ++split) {
        if (dp[c - 1][split] == inf) continue;
        dp[c][i] = std::min(dp[c][i], dp[c - 1][split] + cost(split, i));
      }
    }
  }
  double best = inf;
  for (int c = 1; c <= k; ++c) best = std::min(best, dp[c][n]);
  return best;
}

// Within-cluster sum of squares of an arbitrary labelling.
inline double labelling_wcss(const std::vector<double>& values,
                             const std::vector<int>& labels) {
  std::map<int, std::pair<double, int>> acc;  // label -> (sum, count)
  for (std::size_t i = 0; i < values.size(); ++i) {
    acc[labels[i]].first += values[i];
    acc[labels[i]].second += 1;
  }
  double wcss = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& [s, c] = acc[labels[i]];
    const double mean = s / static_cast<double>(c);
    wcss += (values[i] - mean) * (values[i] - mean);
  }
  return wcss;
}

// ---------------------------------------------------------------------------
// Dataset construction shortcuts
// ---------------------------------------------------------------------------

// Builds a dataset over (id, parent) region declarations; parent -1 marks the
// root.  All samples start zeroed and non-executed.
inline spmdperf::ProfileDataset build_dataset(
    const std::string& program, int ranks,
    const std::vector<std::pair<int, int>>& regions) {
  spmdperf::ProfileDataset ds;
  ds.program = program;
  for (const auto& [id, parent] : regions) {
    spmdperf::RegionNode n;
    n.id = id;
    n.label = parent < 0 ? "main" : "phase_" + std::to_string(id);
    if (parent >= 0) {
      n.parent = parent;
      for (auto& pn : ds.tree.nodes) {
        if (pn.id == parent) {
          n.depth = pn.depth + 1;
          pn.children.push_back(id);
          break;
        }
      }
    } else {
      ds.tree.root = id;
    }
    ds.tree.nodes.push_back(n);
  }
  ds.process_count = ranks;
  ds.roles.assign(static_cast<std::size_t>(ranks), spmdperf::Role::Worker);
  ds.region_order = ds.tree.region_ids();
  ds.samples.assign(static_cast<std::size_t>(ranks) * ds.region_order.size(),
                    spmdperf::MetricSample{});
  return ds;
}

// Executed sample with the busy-loop fields set; remaining fields zero.
inline spmdperf::MetricSample timed_sample(double wall, double cpu,
                                           double cycles, double instructions) {
  spmdperf::MetricSample s;
  s.wall_time = wall;
  s.cpu_time = cpu;
  s.cycles = cycles;
  s.instructions = instructions;
  s.executed = true;
  return s;
}

// Decision table from literal rows; the last entry of each row is the
// decision, the rest are attribute values.
inline spmdperf::DecisionTable make_table(
    const std::vector<std::string>& attributes,
    const std::vector<std::vector<std::string>>& rows) {
  spmdperf::DecisionTable t;
  t.attributes = attributes;
  int id = 1;
  for (const auto& row : rows) {
    t.objects.push_back(std::to_string(id++));
    t.values.push_back(
        std::vector<std::string>(row.begin(), row.end() - 1));
    t.decisions.push_back(row.back());
  }
  return t;
}

}  // namespace testing_support
