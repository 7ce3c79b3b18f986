// Copyright 2026 spmdperf Authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "spmdperf/errors.hpp"

namespace spmdperf {

inline double euclidean_distance(const std::vector<double>& u,
                                 const std::vector<double>& v) {
  if (u.size() != v.size()) {
    throw AnalysisError(ErrorCode::DimensionMismatch,
                        "vectors of length " + std::to_string(u.size()) +
                            " and " + std::to_string(v.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - v[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

// A partition of points 0..n-1 into clusters.
struct Partition {
  std::vector<int> assignment;             // point index -> cluster id
  std::vector<std::vector<int>> clusters;  // discovery order, members ascending
  std::vector<bool> isolated;              // per cluster: formed as a singleton

  std::size_t size() const { return assignment.size(); }
};

// Single-scan density grouping.  Points are visited in index order; an
// unassigned point p collects the unassigned points q != p closer than
// threshold_fraction * |p| (Euclidean norm of p, strict comparison).  If
// strictly more than count_threshold such neighbours exist, p and those
// neighbours become one cluster; otherwise p becomes an isolated singleton
// and its neighbours stay available for later seeds.  There is no
// transitive expansion, and assigned points never rejoin a neighbourhood.
inline Partition optics_cluster(const std::vector<std::vector<double>>& vectors,
                                double threshold_fraction = 0.10,
                                int count_threshold = 1) {
  if (vectors.empty()) {
    throw AnalysisError(ErrorCode::EmptyInput, "no vectors to cluster");
  }
  if (!(threshold_fraction > 0.0)) {
    throw AnalysisError(ErrorCode::InvalidSpec,
                        "threshold fraction must be positive");
  }
  const std::size_t n = vectors.size();
  for (std::size_t i = 1; i < n; ++i) {
    if (vectors[i].size() != vectors[0].size()) {
      throw AnalysisError(ErrorCode::DimensionMismatch,
                          "vector " + std::to_string(i) + " has length " +
                              std::to_string(vectors[i].size()) +
                              ", expected " +
                              std::to_string(vectors[0].size()));
    }
  }

  Partition part;
  part.assignment.assign(n, -1);
  const std::vector<double> origin(vectors.empty() ? 0 : vectors[0].size(), 0.0);
  for (std::size_t p = 0; p < n; ++p) {
    if (part.assignment[p] != -1) continue;
    const double norm = euclidean_distance(vectors[p], origin);
    const double threshold = threshold_fraction * norm;
    std::vector<int> neighbours;
    for (std::size_t q = 0; q < n; ++q) {
      if (q == p || part.assignment[q] != -1) continue;
      if (euclidean_distance(vectors[p], vectors[q]) < threshold) {
        neighbours.push_back(static_cast<int>(q));
      }
    }
    const int cluster_id = static_cast<int>(part.clusters.size());
    if (static_cast<int>(neighbours.size()) > count_threshold) {
      std::vector<int> members = neighbours;
      members.push_back(static_cast<int>(p));
      std::sort(members.begin(), members.end());
      for (int m : members) part.assignment[m] = cluster_id;
      part.clusters.push_back(std::move(members));
      part.isolated.push_back(false);
    } else {
      part.assignment[p] = cluster_id;
      part.clusters.push_back({static_cast<int>(p)});
      part.isolated.push_back(true);
    }
  }
  return part;
}

// Same grouping regardless of cluster discovery order.
inline bool partitions_equal(const Partition& a, const Partition& b) {
  if (a.size() != b.size()) {
    throw AnalysisError(ErrorCode::UniverseMismatch,
                        "partitions over " + std::to_string(a.size()) +
                            " and " + std::to_string(b.size()) + " points");
  }
  auto canonical = [](const Partition& p) {
    std::vector<std::vector<int>> cs = p.clusters;
    for (auto& c : cs) std::sort(c.begin(), c.end());
    std::sort(cs.begin(), cs.end());
    return cs;
  };
  return canonical(a) == canonical(b);
}

// Severity labelling by one-dimensional k-means.
struct SeverityMap {
  std::vector<int> severity;      // per input value; higher label = worse
  std::vector<double> centroids;  // non-empty cluster centres, ascending
};

// Groups scalar values into at most k severity bands.  Labels are assigned
// in ascending centroid order, so equal values share a label and larger
// values never get a smaller label.  With fewer than k distinct values, each
// distinct value becomes its own band (rank order).  Otherwise Lloyd
// iteration runs from percentile-seeded centres (10/30/50/70/90 for k = 5)
// with ties going to the lower-indexed centre; empty clusters retain their
// centre during iteration and are dropped at the end.
inline SeverityMap kmeans_severity(const std::vector<double>& values, int k = 5) {
  if (values.empty()) {
    throw AnalysisError(ErrorCode::EmptyInput, "no values to label");
  }
  if (k < 1) {
    throw AnalysisError(ErrorCode::InvalidSpec,
                        "band count must be at least 1");
  }
  const std::size_t n = values.size();
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> distinct = sorted;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  SeverityMap out;
  out.severity.assign(n, 0);

  if (static_cast<int>(distinct.size()) < k) {
    out.centroids = distinct;
    for (std::size_t i = 0; i < n; ++i) {
      auto it = std::lower_bound(distinct.begin(), distinct.end(), values[i]);
      out.severity[i] = static_cast<int>(it - distinct.begin());
    }
    return out;
  }

  // Percentile seeding with linear interpolation.
  std::vector<double> centroids(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    const double p = (10.0 + 20.0 * c) / 100.0;
    const double pos = p * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    const std::size_t hi = std::min(lo + 1, n - 1);
    centroids[static_cast<std::size_t>(c)] =
        sorted[lo] + frac * (sorted[hi] - sorted[lo]);
  }

  std::vector<int> assign(n, -1);
  for (int iter = 0; iter < 100; ++iter) {
    std::vector<int> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_dist = std::abs(values[i] - centroids[0]);
      for (int c = 1; c < k; ++c) {
        const double d = std::abs(values[i] - centroids[static_cast<std::size_t>(c)]);
        if (d < best_dist) {
          best = c;
          best_dist = d;
        }
      }
      next[i] = best;
    }
    std::vector<double> sums(static_cast<std::size_t>(k), 0.0);
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums[static_cast<std::size_t>(next[i])] += values[i];
      counts[static_cast<std::size_t>(next[i])]++;
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centroids[static_cast<std::size_t>(c)] =
            sums[static_cast<std::size_t>(c)] /
            static_cast<double>(counts[static_cast<std::size_t>(c)]);
      }
    }
    if (next == assign) break;
    assign = next;
  }

  // Drop empty clusters, relabel the rest by ascending centroid.
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (std::size_t i = 0; i < n; ++i) counts[static_cast<std::size_t>(assign[i])]++;
  std::vector<std::pair<double, int>> live;  // (centroid, original id)
  for (int c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] > 0) {
      live.emplace_back(centroids[static_cast<std::size_t>(c)], c);
    }
  }
  std::sort(live.begin(), live.end());
  std::vector<int> relabel(static_cast<std::size_t>(k), -1);
  for (std::size_t j = 0; j < live.size(); ++j) {
    relabel[static_cast<std::size_t>(live[j].second)] = static_cast<int>(j);
    out.centroids.push_back(live[j].first);
  }
  for (std::size_t i = 0; i < n; ++i) {
    out.severity[i] = relabel[static_cast<std::size_t>(assign[i])];
  }
  return out;
}

}  // namespace spmdperf
