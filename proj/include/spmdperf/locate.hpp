// Copyright 2026 spmdperf Authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "spmdperf/cluster.hpp"
#include "spmdperf/errors.hpp"
#include "spmdperf/model.hpp"

namespace spmdperf {

struct AnalysisConfig {
  MetricKind dissimilarity_metric = MetricKind::CpuTime;
  MetricKind disparity_metric = MetricKind::Crnm;
  std::set<int> excluded_ranks;
  double threshold_fraction = 0.10;
  int count_threshold = 1;
};

enum class BottleneckKind { Dissimilarity, Disparity };

// Outcome of a bottleneck search: the critical code regions (ccr) and the
// refined core set (cccr), plus the evidence that produced them.
struct BottleneckSet {
  BottleneckKind kind = BottleneckKind::Dissimilarity;
  std::vector<int> ccr;   // ascending region ids
  std::vector<int> cccr;  // ascending region ids, subset of ccr

  // Dissimilarity evidence.
  Partition baseline;                        // top-level reference partition
  std::map<int, Partition> region_partitions;  // per probed region
  std::optional<int> composite_width;        // set when a composite group fired
  std::vector<std::vector<int>> composite_groups;
  bool inconclusive = false;

  // Disparity evidence.
  std::map<int, int> severities;     // region -> severity label
  std::map<int, double> averages;    // region -> mean metric value
  std::vector<double> centroids;
};

// ---------------------------------------------------------------------------
// Process-behaviour dissimilarity
// ---------------------------------------------------------------------------

struct DissimilarityResult {
  bool found = false;
  std::vector<int> included;  // ranks analysed, ascending
  Partition full_partition;   // clustering of full per-rank metric vectors
  std::optional<BottleneckSet> bottleneck;
};

namespace detail {

// Matrix rows = included ranks, columns = non-root regions ascending.
struct MetricMatrix {
  std::vector<int> ranks;
  std::vector<int> regions;
  std::vector<std::vector<double>> rows;

  int column_of(int region) const {
    auto it = std::lower_bound(regions.begin(), regions.end(), region);
    return static_cast<int>(it - regions.begin());
  }
};

inline MetricMatrix build_metric_matrix(const ProfileDataset& ds,
                                        const AnalysisConfig& cfg,
                                        WarningLog* log) {
  MetricMatrix m;
  m.ranks = included_ranks(ds, cfg.excluded_ranks);
  m.regions = ds.tree.code_region_ids();
  for (int rank : m.ranks) {
    m.rows.push_back(
        metric_vector(ds, rank, cfg.dissimilarity_metric, m.regions, log));
  }
  return m;
}

inline Partition cluster_rows(const std::vector<std::vector<double>>& rows,
                              const AnalysisConfig& cfg) {
  return optics_cluster(rows, cfg.threshold_fraction, cfg.count_threshold);
}

}  // namespace detail

// Locates the code regions responsible for an already-detected behavioural
// split.  Starting from a top-level matrix with all deeper regions zeroed,
// each depth-1 region is zeroed in turn: a changed partition marks it
// critical.  Inside a critical region, each child column is restored alone;
// reproducing the reference partition marks the child critical and recurses.
// The refined set keeps critical regions with no critical child.  If no
// single region fires, adjacent top-level siblings are merged into composite
// columns of width s = 2, 3, ... and the test repeats on the merged matrix;
// analysis is inconclusive when that also never fires.
inline BottleneckSet search_dissimilarity(const ProfileDataset& ds,
                                          const AnalysisConfig& cfg,
                                          WarningLog* log = nullptr) {
  BottleneckSet out;
  out.kind = BottleneckKind::Dissimilarity;

  const detail::MetricMatrix full = detail::build_metric_matrix(ds, cfg, log);
  const std::vector<int> top = ds.tree.top_level_ids();

  // Reference matrix: depth-1 columns live, deeper columns zeroed.
  std::vector<std::vector<double>> base = full.rows;
  for (int region : full.regions) {
    if (ds.tree.at(region).depth > 1) {
      const int col = full.column_of(region);
      for (auto& row : base) row[static_cast<std::size_t>(col)] = 0.0;
    }
  }
  out.baseline = detail::cluster_rows(base, cfg);

  std::set<int> ccr;

  // Child exploration shares the parent's context matrix (parent and all of
  // its descendants zeroed): one child column is restored, tested, and the
  // matrix copy discarded, so restoration is implicit.
  auto explore_children = [&](auto&& self, int parent,
                              const std::vector<std::vector<double>>& context)
      -> void {
    std::vector<int> kids = ds.tree.at(parent).children;
    std::sort(kids.begin(), kids.end());
    for (int child : kids) {
      std::vector<std::vector<double>> probe = context;
      const int col = full.column_of(child);
      for (std::size_t r = 0; r < probe.size(); ++r) {
        probe[r][static_cast<std::size_t>(col)] =
            full.rows[r][static_cast<std::size_t>(col)];
      }
      Partition p = detail::cluster_rows(probe, cfg);
      out.region_partitions[child] = p;
      if (partitions_equal(p, out.baseline)) {
        ccr.insert(child);
        self(self, child, context);
      }
    }
  };

  for (int region : top) {
    std::vector<std::vector<double>> probe = base;
    const int col = full.column_of(region);
    for (auto& row : probe) row[static_cast<std::size_t>(col)] = 0.0;
    Partition p = detail::cluster_rows(probe, cfg);
    out.region_partitions[region] = p;
    if (!partitions_equal(p, out.baseline)) {
      ccr.insert(region);
      explore_children(explore_children, region, probe);
    }
  }

  if (ccr.empty()) {
    // Composite fallback: tile the top-level siblings (sibling order) into
    // consecutive groups of width s and sum their columns.
    const int r = static_cast<int>(top.size());
    for (int s = 2; s <= r - 1 && ccr.empty(); ++s) {
      std::vector<std::vector<int>> groups;
      for (int start = 0; start < r; start += s) {
        std::vector<int> g;
        for (int i = start; i < std::min(start + s, r); ++i) g.push_back(top[static_cast<std::size_t>(i)]);
        groups.push_back(g);
      }
      std::vector<std::vector<double>> merged(
          full.rows.size(), std::vector<double>(groups.size(), 0.0));
      for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        for (int region : groups[gi]) {
          const int col = full.column_of(region);
          for (std::size_t row = 0; row < merged.size(); ++row) {
            merged[row][gi] += base[row][static_cast<std::size_t>(col)];
          }
        }
      }
      Partition reference = detail::cluster_rows(merged, cfg);
      for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        std::vector<std::vector<double>> probe = merged;
        for (auto& row : probe) row[gi] = 0.0;
        if (!partitions_equal(detail::cluster_rows(probe, cfg), reference)) {
          for (int region : groups[gi]) ccr.insert(region);
          out.composite_groups.push_back(groups[gi]);
        }
      }
      if (!ccr.empty()) out.composite_width = s;
    }
    if (ccr.empty()) out.inconclusive = true;
    out.ccr.assign(ccr.begin(), ccr.end());
    out.cccr = out.ccr;  // composite members have no finer attribution
    return out;
  }

  out.ccr.assign(ccr.begin(), ccr.end());
  for (int region : out.ccr) {
    bool has_critical_child = false;
    for (int child : ds.tree.at(region).children) {
      if (ccr.count(child) != 0) {
        has_critical_child = true;
        break;
      }
    }
    if (!has_critical_child) out.cccr.push_back(region);
  }
  return out;
}

// Clusters the full per-rank metric vectors; more than one cluster means the
// processes diverged and the region search runs.
inline DissimilarityResult find_dissimilarity(const ProfileDataset& ds,
                                              const AnalysisConfig& cfg,
                                              WarningLog* log = nullptr) {
  DissimilarityResult out;
  const detail::MetricMatrix full = detail::build_metric_matrix(ds, cfg, log);
  out.included = full.ranks;
  out.full_partition = detail::cluster_rows(full.rows, cfg);
  if (out.full_partition.clusters.size() <= 1) {
    out.found = false;
    return out;
  }
  out.found = true;
  out.bottleneck = search_dissimilarity(ds, cfg, log);
  return out;
}

// ---------------------------------------------------------------------------
// Code-region disparity
// ---------------------------------------------------------------------------

// Critical regions that are not explained by an equally-severe child: a
// region stays in the refined set iff it is a leaf or strictly exceeds every
// child's severity.  Severities must cover all candidate regions and their
// children.
inline std::vector<int> refine_disparity(const std::vector<int>& ccr,
                                         const std::map<int, int>& severities,
                                         const RegionTree& tree) {
  std::vector<int> out;
  for (int region : ccr) {
    const RegionNode& node = tree.at(region);
    bool dominated = false;
    for (int child : node.children) {
      auto it = severities.find(child);
      const int child_sev = it == severities.end() ? 0 : it->second;
      if (severities.at(region) <= child_sev) {
        dominated = true;
        break;
      }
    }
    if (!dominated) out.push_back(region);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Ranks code regions by the process-average of the disparity metric and
// keeps the two most severe of five bands (severity >= 3).
inline BottleneckSet find_disparity(const ProfileDataset& ds,
                                    const AnalysisConfig& cfg,
                                    WarningLog* log = nullptr) {
  BottleneckSet out;
  out.kind = BottleneckKind::Disparity;

  const std::vector<double> all_avg =
      average_over_processes(ds, cfg.disparity_metric, cfg.excluded_ranks, log);
  const std::vector<int> regions = ds.tree.code_region_ids();
  std::vector<double> values;
  values.reserve(regions.size());
  for (int id : regions) {
    const double v = all_avg[static_cast<std::size_t>(ds.region_index(id))];
    values.push_back(v);
    out.averages[id] = v;
  }
  if (values.empty()) return out;

  const SeverityMap bands = kmeans_severity(values, 5);
  out.centroids = bands.centroids;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    out.severities[regions[i]] = bands.severity[i];
  }
  for (std::size_t i = 0; i < regions.size(); ++i) {
    if (bands.severity[i] >= 3) out.ccr.push_back(regions[i]);
  }
  std::sort(out.ccr.begin(), out.ccr.end());
  out.cccr = refine_disparity(out.ccr, out.severities, ds.tree);
  return out;
}

}  // namespace spmdperf
