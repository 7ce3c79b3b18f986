// Copyright 2026 spmdperf Authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <array>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "spmdperf/cluster.hpp"
#include "spmdperf/errors.hpp"
#include "spmdperf/locate.hpp"
#include "spmdperf/model.hpp"
#include "spmdperf/roughset.hpp"

namespace spmdperf {

// Fixed explanatory attributes, in table order.
inline const std::array<std::pair<const char*, MetricKind>, 5>&
attribute_spec() {
  static const std::array<std::pair<const char*, MetricKind>, 5> spec = {{
      {"a1", MetricKind::L1MissRate},
      {"a2", MetricKind::L2MissRate},
      {"a3", MetricKind::DiskBytes},
      {"a4", MetricKind::NetworkBytes},
      {"a5", MetricKind::InstructionsRetired},
  }};
  return spec;
}

inline std::string attribute_gloss(const std::string& name) {
  if (name == "a1") return "L1 cache miss rate";
  if (name == "a2") return "L2 cache miss rate";
  if (name == "a3") return "disk bytes";
  if (name == "a4") return "network bytes";
  if (name == "a5") return "instructions retired";
  return name;
}

inline MetricKind attribute_metric(const std::string& name) {
  for (const auto& [attr, kind] : attribute_spec()) {
    if (name == attr) return kind;
  }
  throw AnalysisError(ErrorCode::UnsupportedKind,
                      "unknown attribute " + name);
}

// Additive resource counters support a share-of-program interpretation;
// rates do not.
inline bool attribute_is_additive(const std::string& name) {
  return name == "a3" || name == "a4" || name == "a5";
}

// ---------------------------------------------------------------------------
// Decision-table construction
// ---------------------------------------------------------------------------

// Objects = analysed ranks.  Each attribute value is the cluster id the rank
// lands in when ranks are clustered by that metric's per-region vectors; the
// decision is the rank's cluster in the behavioural partition under the
// primary metric.
inline DecisionTable build_dissimilarity_table(const ProfileDataset& ds,
                                               const AnalysisConfig& cfg,
                                               const Partition& decision,
                                               WarningLog* log = nullptr) {
  const std::vector<int> ranks = included_ranks(ds, cfg.excluded_ranks);
  if (decision.size() != ranks.size()) {
    throw AnalysisError(ErrorCode::UniverseMismatch,
                        "decision partition covers " +
                            std::to_string(decision.size()) + " ranks, dataset has " +
                            std::to_string(ranks.size()));
  }
  const std::vector<int> regions = ds.tree.code_region_ids();

  DecisionTable table;
  for (int rank : ranks) table.objects.push_back(std::to_string(rank));
  table.values.assign(ranks.size(), {});

  for (const auto& [attr, kind] : attribute_spec()) {
    table.attributes.push_back(attr);
    std::vector<std::vector<double>> rows;
    rows.reserve(ranks.size());
    for (int rank : ranks) {
      rows.push_back(metric_vector(ds, rank, kind, regions, log));
    }
    const Partition p =
        optics_cluster(rows, cfg.threshold_fraction, cfg.count_threshold);
    for (std::size_t i = 0; i < ranks.size(); ++i) {
      table.values[i].push_back(std::to_string(p.assignment[i]));
    }
  }
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    table.decisions.push_back(std::to_string(decision.assignment[i]));
  }
  return table;
}

// Objects = code regions.  Each attribute value flags whether the severity
// band of the region's process-average of that metric reaches the critical
// range (>= 3 of 5); the decision flags membership in the disparity ccr.
inline DecisionTable build_disparity_table(const ProfileDataset& ds,
                                           const AnalysisConfig& cfg,
                                           const std::vector<int>& ccr,
                                           WarningLog* log = nullptr) {
  const std::vector<int> regions = ds.tree.code_region_ids();
  const std::set<int> critical(ccr.begin(), ccr.end());

  DecisionTable table;
  for (int id : regions) table.objects.push_back(std::to_string(id));
  table.values.assign(regions.size(), {});

  for (const auto& [attr, kind] : attribute_spec()) {
    table.attributes.push_back(attr);
    const std::vector<double> all_avg =
        average_over_processes(ds, kind, cfg.excluded_ranks, log);
    std::vector<double> values;
    values.reserve(regions.size());
    for (int id : regions) {
      values.push_back(all_avg[static_cast<std::size_t>(ds.region_index(id))]);
    }
    const SeverityMap bands = kmeans_severity(values, 5);
    for (std::size_t i = 0; i < regions.size(); ++i) {
      table.values[i].push_back(bands.severity[i] >= 3 ? "1" : "0");
    }
  }
  for (std::size_t i = 0; i < regions.size(); ++i) {
    table.decisions.push_back(critical.count(regions[i]) != 0 ? "1" : "0");
  }
  return table;
}

// ---------------------------------------------------------------------------
// Root-cause selection and per-region attribution
// ---------------------------------------------------------------------------

// Root causes = core plus the smallest reduct (first in size-then-
// lexicographic order).  When the core is empty but a non-trivial reduct
// exists, the choice between equally valid reducts is arbitrary and the
// result is flagged ambiguous.
inline std::pair<std::vector<std::string>, bool> select_causes(
    const ReductSet& reducts) {
  std::set<std::string> causes(reducts.core.begin(), reducts.core.end());
  bool ambiguous = false;
  if (!reducts.reducts.empty()) {
    const std::vector<std::string>& smallest = reducts.reducts.front();
    causes.insert(smallest.begin(), smallest.end());
    if (reducts.core.empty() && !smallest.empty()) ambiguous = true;
  }
  return {{causes.begin(), causes.end()}, ambiguous};
}

// Per-cause numeric evidence for one bottleneck region.
struct CauseEvidence {
  std::string attribute;
  MetricKind metric = MetricKind::WallTime;
  std::vector<double> per_rank;        // dissimilarity: analysed-rank values
  double average = 0.0;                // disparity: process-average value
  std::optional<double> share_percent; // disparity, additive metrics only
};

struct Diagnosis {
  int region = -1;
  std::vector<std::string> causes;  // causes that apply to this region
  std::vector<CauseEvidence> evidence;
};

struct RootCauseAnalysis {
  DecisionTable table;
  InconsistencyReport inconsistencies;
  ReductSet reducts;
  std::vector<std::string> causes;  // attribute order
  bool ambiguous = false;
  std::vector<Diagnosis> diagnoses;  // one per refined bottleneck region
};

// Explains an already-located bottleneck set from its decision table.
inline RootCauseAnalysis diagnose(const DecisionTable& table,
                                  const BottleneckSet& bottleneck,
                                  const ProfileDataset& ds,
                                  const AnalysisConfig& cfg,
                                  WarningLog* log = nullptr) {
  RootCauseAnalysis out;
  out.table = table;
  MatrixBuildResult built = build_matrix(table);
  out.inconsistencies = built.inconsistencies;
  out.reducts = compute_reducts(built.matrix);
  auto [causes, ambiguous] = select_causes(out.reducts);
  out.causes = causes;
  out.ambiguous = ambiguous;

  if (bottleneck.kind == BottleneckKind::Disparity) {
    const std::vector<double> root_avgs = [&] {
      std::vector<double> v;
      for (const std::string& cause : out.causes) {
        const std::vector<double> all = average_over_processes(
            ds, attribute_metric(cause), cfg.excluded_ranks, log);
        v.push_back(all[static_cast<std::size_t>(ds.region_index(ds.tree.root))]);
      }
      return v;
    }();
    for (int region : bottleneck.cccr) {
      Diagnosis d;
      d.region = region;
      // Attribution: a cause applies to a region iff the region's table row
      // flags that attribute.
      const std::size_t row = [&] {
        const std::string key = std::to_string(region);
        for (std::size_t i = 0; i < table.object_count(); ++i) {
          if (table.objects[i] == key) return i;
        }
        throw AnalysisError(ErrorCode::UnknownRegion,
                            "region " + key + " missing from decision table");
      }();
      for (std::size_t ci = 0; ci < out.causes.size(); ++ci) {
        const std::string& cause = out.causes[ci];
        std::size_t col = 0;
        while (col < table.attributes.size() && table.attributes[col] != cause) ++col;
        if (col == table.attributes.size()) continue;
        if (table.values[row][col] != "1") continue;
        d.causes.push_back(cause);
        CauseEvidence ev;
        ev.attribute = cause;
        ev.metric = attribute_metric(cause);
        const std::vector<double> all =
            average_over_processes(ds, ev.metric, cfg.excluded_ranks, log);
        ev.average = all[static_cast<std::size_t>(ds.region_index(region))];
        if (attribute_is_additive(cause) && root_avgs[ci] > 0.0) {
          ev.share_percent = 100.0 * ev.average / root_avgs[ci];
        }
        d.evidence.push_back(ev);
      }
      out.diagnoses.push_back(d);
    }
  } else {
    const std::vector<int> ranks = included_ranks(ds, cfg.excluded_ranks);
    for (int region : bottleneck.cccr) {
      Diagnosis d;
      d.region = region;
      d.causes = out.causes;
      for (const std::string& cause : out.causes) {
        CauseEvidence ev;
        ev.attribute = cause;
        ev.metric = attribute_metric(cause);
        for (int rank : ranks) {
          ev.per_rank.push_back(
              derived_metric(ds.sample(rank, region), ev.metric, log));
        }
        d.evidence.push_back(ev);
      }
      out.diagnoses.push_back(d);
    }
  }
  return out;
}

}  // namespace spmdperf
