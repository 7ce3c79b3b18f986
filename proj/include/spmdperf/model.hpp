// Copyright 2026 spmdperf Authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "spmdperf/errors.hpp"

namespace spmdperf {

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

// Raw per-(process, region) measurement.  Counts and times are inclusive:
// a region's sample subsumes the samples of its nested regions.
struct MetricSample {
  double wall_time = 0.0;
  double cpu_time = 0.0;
  double cycles = 0.0;
  double instructions = 0.0;
  double l1_miss = 0.0;
  double l1_access = 0.0;
  double l2_miss = 0.0;
  double l2_access = 0.0;
  double mpi_time = 0.0;
  double mpi_bytes = 0.0;
  double disk_bytes = 0.0;
  bool executed = false;

  friend bool operator==(const MetricSample& a, const MetricSample& b) {
    return a.wall_time == b.wall_time && a.cpu_time == b.cpu_time &&
           a.cycles == b.cycles && a.instructions == b.instructions &&
           a.l1_miss == b.l1_miss && a.l1_access == b.l1_access &&
           a.l2_miss == b.l2_miss && a.l2_access == b.l2_access &&
           a.mpi_time == b.mpi_time && a.mpi_bytes == b.mpi_bytes &&
           a.disk_bytes == b.disk_bytes && a.executed == b.executed;
  }
};

enum class MetricKind {
  WallTime,
  CpuTime,
  Cpi,
  L1MissRate,
  L2MissRate,
  DiskBytes,
  NetworkBytes,
  InstructionsRetired,
  MpiTime,
  Crnm,
};

inline const char* metric_kind_name(MetricKind kind) {
  switch (kind) {
    case MetricKind::WallTime: return "wall_time";
    case MetricKind::CpuTime: return "cpu_time";
    case MetricKind::Cpi: return "cpi";
    case MetricKind::L1MissRate: return "l1_miss_rate";
    case MetricKind::L2MissRate: return "l2_miss_rate";
    case MetricKind::DiskBytes: return "disk_bytes";
    case MetricKind::NetworkBytes: return "network_bytes";
    case MetricKind::InstructionsRetired: return "instructions_retired";
    case MetricKind::MpiTime: return "mpi_time";
    case MetricKind::Crnm: return "crnm";
  }
  return "unknown";
}

// Collected notes about degenerate inputs (e.g. zero-denominator ratios).
struct WarningLog {
  std::vector<std::string> messages;

  void add(const std::string& message) { messages.push_back(message); }
  bool empty() const { return messages.empty(); }
};

// Scalar metric of one sample.  Non-executed samples contribute zero for all
// kinds.  Ratio kinds with a zero denominator yield zero and record a warning
// when a log is supplied.  Crnm needs whole-dataset context, so it is not a
// per-sample metric and is rejected here.
inline double derived_metric(const MetricSample& s, MetricKind kind,
                             WarningLog* log = nullptr) {
  if (kind == MetricKind::Crnm) {
    throw AnalysisError(ErrorCode::UnsupportedKind,
                        "crnm is not derivable from a single sample");
  }
  if (!s.executed) return 0.0;
  auto ratio = [&](double num, double den, const char* what) {
    if (den == 0.0) {
      if (log != nullptr) {
        log->add(std::string("zero denominator for ") + what +
                 "; metric reported as 0");
      }
      return 0.0;
    }
    return num / den;
  };
  switch (kind) {
    case MetricKind::WallTime: return s.wall_time;
    case MetricKind::CpuTime: return s.cpu_time;
    case MetricKind::Cpi: return ratio(s.cycles, s.instructions, "cpi");
    case MetricKind::L1MissRate:
      return ratio(s.l1_miss, s.l1_access, "l1_miss_rate");
    case MetricKind::L2MissRate:
      return ratio(s.l2_miss, s.l2_access, "l2_miss_rate");
    case MetricKind::DiskBytes: return s.disk_bytes;
    case MetricKind::NetworkBytes: return s.mpi_bytes;
    case MetricKind::InstructionsRetired: return s.instructions;
    case MetricKind::MpiTime: return s.mpi_time;
    case MetricKind::Crnm: break;  // handled above
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Region tree
// ---------------------------------------------------------------------------

struct RegionNode {
  int id = -1;
  std::string label;
  std::optional<int> parent;    // unset for the root
  std::vector<int> children;    // source order
  int depth = 0;                // root is 0, code regions are >= 1
};

struct RegionTree {
  std::vector<RegionNode> nodes;  // arbitrary storage order
  int root = -1;

  const RegionNode* find(int id) const {
    for (const auto& n : nodes) {
      if (n.id == id) return &n;
    }
    return nullptr;
  }

  const RegionNode& at(int id) const {
    const RegionNode* n = find(id);
    if (n == nullptr) {
      throw AnalysisError(ErrorCode::UnknownRegion,
                          "region " + std::to_string(id) + " not in tree");
    }
    return *n;
  }

  bool has(int id) const { return find(id) != nullptr; }

  // All region ids in ascending order.
  std::vector<int> region_ids() const {
    std::vector<int> ids;
    ids.reserve(nodes.size());
    for (const auto& n : nodes) ids.push_back(n.id);
    std::sort(ids.begin(), ids.end());
    return ids;
  }

  // Non-root region ids in ascending order (the analysis universe).
  std::vector<int> code_region_ids() const {
    std::vector<int> ids;
    for (const auto& n : nodes) {
      if (n.id != root) ids.push_back(n.id);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
  }

  // Depth-1 region ids in their sibling (source) order.
  std::vector<int> top_level_ids() const { return at(root).children; }
};

struct TreeError {
  enum class Kind { DuplicateId, OrphanNode, DepthMismatch, MultipleRoots };
  Kind kind;
  int region = -1;

  friend bool operator==(const TreeError& a, const TreeError& b) {
    return a.kind == b.kind && a.region == b.region;
  }
  friend bool operator<(const TreeError& a, const TreeError& b) {
    if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
    return a.region < b.region;
  }
};

inline const char* tree_error_name(TreeError::Kind kind) {
  switch (kind) {
    case TreeError::Kind::DuplicateId: return "DuplicateId";
    case TreeError::Kind::OrphanNode: return "OrphanNode";
    case TreeError::Kind::DepthMismatch: return "DepthMismatch";
    case TreeError::Kind::MultipleRoots: return "MultipleRoots";
  }
  return "UnknownTreeError";
}

// Structural validation.  Pure function of the tree; findings are sorted and
// deduplicated, each naming the offending region id.
inline std::vector<TreeError> validate_tree(const RegionTree& tree) {
  std::vector<TreeError> errors;
  std::map<int, int> count;
  for (const auto& n : tree.nodes) count[n.id]++;
  for (const auto& [id, c] : count) {
    if (c > 1) errors.push_back({TreeError::Kind::DuplicateId, id});
  }

  std::vector<int> roots;
  for (const auto& n : tree.nodes) {
    if (!n.parent.has_value()) roots.push_back(n.id);
  }
  if (roots.size() > 1) {
    for (int id : roots) errors.push_back({TreeError::Kind::MultipleRoots, id});
  }

  for (const auto& n : tree.nodes) {
    if (n.parent.has_value()) {
      const RegionNode* p = tree.find(*n.parent);
      if (p == nullptr) {
        errors.push_back({TreeError::Kind::OrphanNode, n.id});
        continue;
      }
      bool linked = std::find(p->children.begin(), p->children.end(), n.id) !=
                    p->children.end();
      if (!linked) errors.push_back({TreeError::Kind::OrphanNode, n.id});
      if (n.depth != p->depth + 1) {
        errors.push_back({TreeError::Kind::DepthMismatch, n.id});
      }
    } else if (n.depth != 0) {
      errors.push_back({TreeError::Kind::DepthMismatch, n.id});
    }
    for (int c : n.children) {
      const RegionNode* child = tree.find(c);
      if (child == nullptr || !child->parent.has_value() ||
          *child->parent != n.id) {
        errors.push_back({TreeError::Kind::OrphanNode, c});
      }
    }
  }

  // Walk each node to the root; a failed walk means a parent cycle, which
  // shows up as an inconsistent depth.
  const std::size_t n_nodes = tree.nodes.size();
  for (const auto& n : tree.nodes) {
    const RegionNode* cur = &n;
    std::size_t steps = 0;
    while (cur->parent.has_value() && steps <= n_nodes) {
      const RegionNode* p = tree.find(*cur->parent);
      if (p == nullptr) break;
      cur = p;
      ++steps;
    }
    if (steps > n_nodes) {
      errors.push_back({TreeError::Kind::DepthMismatch, n.id});
    }
  }

  std::sort(errors.begin(), errors.end());
  errors.erase(std::unique(errors.begin(), errors.end()), errors.end());
  return errors;
}

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

enum class Role { Worker, Master };

// In-memory profile: a region tree plus one sample per (rank, region).
// Samples are stored densely, ordered by ascending region id per rank.
struct ProfileDataset {
  std::string program;
  RegionTree tree;
  int process_count = 0;
  std::vector<Role> roles;          // size == process_count
  std::vector<int> region_order;    // ascending region ids
  std::vector<MetricSample> samples;  // rank-major, region_order-minor
  WarningLog warnings;

  int region_index(int region) const {
    auto it = std::lower_bound(region_order.begin(), region_order.end(), region);
    if (it == region_order.end() || *it != region) {
      throw AnalysisError(ErrorCode::UnknownRegion,
                          "region " + std::to_string(region) + " not in dataset");
    }
    return static_cast<int>(it - region_order.begin());
  }

  void check_rank(int rank) const {
    if (rank < 0 || rank >= process_count) {
      throw AnalysisError(ErrorCode::UnknownRank,
                          "rank " + std::to_string(rank) + " out of range");
    }
  }

  const MetricSample& sample(int rank, int region) const {
    check_rank(rank);
    return samples[static_cast<std::size_t>(rank) * region_order.size() +
                   static_cast<std::size_t>(region_index(region))];
  }

  MetricSample& sample_mutable(int rank, int region) {
    check_rank(rank);
    return samples[static_cast<std::size_t>(rank) * region_order.size() +
                   static_cast<std::size_t>(region_index(region))];
  }
};

// Ranks not listed in `excluded`, ascending.  Throws if nothing remains.
inline std::vector<int> included_ranks(const ProfileDataset& ds,
                                       const std::set<int>& excluded) {
  for (int r : excluded) {
    if (r < 0 || r >= ds.process_count) {
      throw AnalysisError(ErrorCode::UnknownRank,
                          "excluded rank " + std::to_string(r) + " out of range");
    }
  }
  std::vector<int> ranks;
  for (int r = 0; r < ds.process_count; ++r) {
    if (excluded.count(r) == 0) ranks.push_back(r);
  }
  if (ranks.empty()) {
    throw AnalysisError(ErrorCode::AllRanksExcluded,
                        "every rank was excluded from the analysis");
  }
  return ranks;
}

// Relative share of program time, weighted by pipeline efficiency:
// (region wall time / whole-program wall time) * region CPI, one component
// per region (ascending id), root included.  The root component equals the
// root CPI.  Non-executed regions contribute zero.
inline std::vector<double> crnm_vector(const ProfileDataset& ds, int rank,
                                       WarningLog* log = nullptr) {
  ds.check_rank(rank);
  const MetricSample& root = ds.sample(rank, ds.tree.root);
  if (!root.executed || root.wall_time == 0.0) {
    throw AnalysisError(ErrorCode::ZeroProgramTime,
                        "whole-program wall time is zero for rank " +
                            std::to_string(rank));
  }
  std::vector<double> out;
  out.reserve(ds.region_order.size());
  for (int id : ds.region_order) {
    const MetricSample& s = ds.sample(rank, id);
    if (!s.executed) {
      out.push_back(0.0);
      continue;
    }
    double cpi = derived_metric(s, MetricKind::Cpi, log);
    out.push_back((s.wall_time / root.wall_time) * cpi);
  }
  return out;
}

// Metric values for one rank over `regions` (any subset of dataset regions),
// ordered by ascending region id.
inline std::vector<double> metric_vector(const ProfileDataset& ds, int rank,
                                         MetricKind kind,
                                         const std::vector<int>& regions,
                                         WarningLog* log = nullptr) {
  ds.check_rank(rank);
  std::vector<int> wanted = regions;
  std::sort(wanted.begin(), wanted.end());
  if (kind == MetricKind::Crnm) {
    std::vector<double> all = crnm_vector(ds, rank, log);
    std::vector<double> out;
    out.reserve(wanted.size());
    for (int id : wanted) out.push_back(all[static_cast<std::size_t>(ds.region_index(id))]);
    return out;
  }
  std::vector<double> out;
  out.reserve(wanted.size());
  for (int id : wanted) out.push_back(derived_metric(ds.sample(rank, id), kind, log));
  return out;
}

// Per-region mean of a metric over all non-excluded ranks; spans every
// region (ascending id, root included).  Zero-valued samples count toward
// the mean; excluded ranks are omitted entirely.
inline std::vector<double> average_over_processes(const ProfileDataset& ds,
                                                  MetricKind kind,
                                                  const std::set<int>& excluded,
                                                  WarningLog* log = nullptr) {
  std::vector<int> ranks = included_ranks(ds, excluded);
  std::vector<double> acc(ds.region_order.size(), 0.0);
  for (int rank : ranks) {
    std::vector<double> v =
        kind == MetricKind::Crnm
            ? crnm_vector(ds, rank, log)
            : metric_vector(ds, rank, kind, ds.region_order, log);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
  }
  const double count = static_cast<double>(ranks.size());
  for (double& x : acc) x /= count;
  return acc;
}

// Restrict the dataset to the subtree rooted at `region`: that region becomes
// the whole-program root (depth 0) and relative metrics renormalize to it.
inline ProfileDataset subtree_view(const ProfileDataset& ds, int region) {
  const RegionNode& new_root = ds.tree.at(region);
  ProfileDataset out;
  out.program = ds.program;
  out.process_count = ds.process_count;
  out.roles = ds.roles;

  // Collect the subtree in depth-first order, keeping sibling order.
  std::vector<int> stack{new_root.id};
  std::set<int> members;
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    members.insert(id);
    const RegionNode& n = ds.tree.at(id);
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) {
      stack.push_back(*it);
    }
  }

  const int base_depth = new_root.depth;
  for (const auto& n : ds.tree.nodes) {
    if (members.count(n.id) == 0) continue;
    RegionNode copy = n;
    copy.depth = n.depth - base_depth;
    if (n.id == new_root.id) {
      copy.parent.reset();
    }
    out.tree.nodes.push_back(copy);
  }
  out.tree.root = new_root.id;

  for (int id : members) out.region_order.push_back(id);
  std::sort(out.region_order.begin(), out.region_order.end());
  out.samples.resize(static_cast<std::size_t>(out.process_count) *
                     out.region_order.size());
  for (int rank = 0; rank < out.process_count; ++rank) {
    for (std::size_t i = 0; i < out.region_order.size(); ++i) {
      out.samples[static_cast<std::size_t>(rank) * out.region_order.size() + i] =
          ds.sample(rank, out.region_order[i]);
    }
  }
  return out;
}

}  // namespace spmdperf
