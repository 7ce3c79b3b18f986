// Copyright 2026 spmdperf Authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spmdperf/diagnose.hpp"
#include "spmdperf/locate.hpp"
#include "spmdperf/model.hpp"

namespace spmdperf {

// Everything one analysis run produced, ready for rendering.
struct Report {
  std::string program;
  int processes = 0;
  AnalysisConfig config;

  DissimilarityResult dissimilarity;
  std::optional<RootCauseAnalysis> dissimilarity_analysis;

  BottleneckSet disparity;
  bool disparity_found = false;
  std::optional<RootCauseAnalysis> disparity_analysis;

  WarningLog warnings;
};

inline bool bottlenecks_found(const Report& r) {
  return r.dissimilarity.found || r.disparity_found;
}

// Runs both detectors and, where they fire, the root-cause explanation.
inline Report run_analysis(const ProfileDataset& ds, const AnalysisConfig& cfg) {
  Report r;
  r.program = ds.program;
  r.processes = ds.process_count;
  r.config = cfg;
  WarningLog log;

  r.dissimilarity = find_dissimilarity(ds, cfg, &log);
  if (r.dissimilarity.found && r.dissimilarity.bottleneck.has_value()) {
    const DecisionTable table = build_dissimilarity_table(
        ds, cfg, r.dissimilarity.full_partition, &log);
    r.dissimilarity_analysis =
        diagnose(table, *r.dissimilarity.bottleneck, ds, cfg, &log);
  }

  r.disparity = find_disparity(ds, cfg, &log);
  r.disparity_found = !r.disparity.ccr.empty();
  if (r.disparity_found) {
    const DecisionTable table =
        build_disparity_table(ds, cfg, r.disparity.ccr, &log);
    r.disparity_analysis = diagnose(table, r.disparity, ds, cfg, &log);
  }

  r.warnings = log;
  return r;
}

namespace detail {

inline nlohmann::json partition_to_json(const Partition& p,
                                        const std::vector<int>& ranks) {
  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& members : p.clusters) {
    nlohmann::json c = nlohmann::json::array();
    for (int idx : members) c.push_back(ranks[static_cast<std::size_t>(idx)]);
    clusters.push_back(c);
  }
  return clusters;
}

inline nlohmann::json analysis_to_json(const std::optional<RootCauseAnalysis>& a,
                                       bool per_rank_evidence) {
  nlohmann::json j;
  j["causes"] = nlohmann::json::array();
  j["ambiguous"] = false;
  j["reducts"] = nlohmann::json::array();
  j["core"] = nlohmann::json::array();
  j["inconsistent_pairs"] = nlohmann::json::array();
  j["diagnoses"] = nlohmann::json::array();
  if (!a.has_value()) return j;

  j["causes"] = a->causes;
  j["ambiguous"] = a->ambiguous;
  for (const auto& reduct : a->reducts.reducts) j["reducts"].push_back(reduct);
  j["core"] = a->reducts.core;
  for (const auto& [i, k] : a->inconsistencies.pairs) {
    j["inconsistent_pairs"].push_back(
        {a->table.objects[static_cast<std::size_t>(i)],
         a->table.objects[static_cast<std::size_t>(k)]});
  }
  for (const Diagnosis& d : a->diagnoses) {
    nlohmann::json dj;
    dj["region"] = d.region;
    dj["causes"] = d.causes;
    dj["evidence"] = nlohmann::json::array();
    for (const CauseEvidence& e : d.evidence) {
      nlohmann::json ej;
      ej["attribute"] = e.attribute;
      ej["metric"] = metric_kind_name(e.metric);
      if (per_rank_evidence) {
        ej["per_rank"] = e.per_rank;
      } else {
        ej["average"] = e.average;
        if (e.share_percent.has_value()) {
          ej["share_percent"] = *e.share_percent;
        } else {
          ej["share_percent"] = nullptr;
        }
      }
      dj["evidence"].push_back(ej);
    }
    j["diagnoses"].push_back(dj);
  }
  return j;
}

}  // namespace detail

// Machine-readable form.  Key order is alphabetical (library default), the
// content is fully determined by the input profile and configuration, so the
// serialization is byte-stable across runs.
inline nlohmann::json to_json(const Report& r) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["program"] = r.program;
  j["processes"] = r.processes;
  j["excluded_ranks"] = std::vector<int>(r.config.excluded_ranks.begin(),
                                         r.config.excluded_ranks.end());
  j["config"] = {
      {"dissimilarity_metric", metric_kind_name(r.config.dissimilarity_metric)},
      {"disparity_metric", metric_kind_name(r.config.disparity_metric)},
      {"threshold_fraction", r.config.threshold_fraction},
      {"count_threshold", r.config.count_threshold},
  };

  nlohmann::json diss = detail::analysis_to_json(r.dissimilarity_analysis, true);
  diss["found"] = r.dissimilarity.found;
  diss["included_ranks"] = r.dissimilarity.included;
  diss["partition"] = detail::partition_to_json(r.dissimilarity.full_partition,
                                                r.dissimilarity.included);
  diss["ccr"] = nlohmann::json::array();
  diss["cccr"] = nlohmann::json::array();
  diss["composite_width"] = nullptr;
  diss["composite_groups"] = nlohmann::json::array();
  diss["inconclusive"] = false;
  if (r.dissimilarity.bottleneck.has_value()) {
    const BottleneckSet& b = *r.dissimilarity.bottleneck;
    diss["ccr"] = b.ccr;
    diss["cccr"] = b.cccr;
    if (b.composite_width.has_value()) diss["composite_width"] = *b.composite_width;
    diss["composite_groups"] = b.composite_groups;
    diss["inconclusive"] = b.inconclusive;
  }
  j["dissimilarity"] = diss;

  nlohmann::json disp = detail::analysis_to_json(r.disparity_analysis, false);
  disp["found"] = r.disparity_found;
  disp["metric"] = metric_kind_name(r.config.disparity_metric);
  disp["severities"] = nlohmann::json::array();
  for (const auto& [region, severity] : r.disparity.severities) {
    disp["severities"].push_back({{"region", region},
                                  {"severity", severity},
                                  {"average", r.disparity.averages.at(region)}});
  }
  disp["centroids"] = r.disparity.centroids;
  disp["ccr"] = r.disparity.ccr;
  disp["cccr"] = r.disparity.cccr;
  j["disparity"] = disp;

  j["warnings"] = r.warnings.messages;
  return j;
}

namespace detail {

inline std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(v[i]);
  }
  return out.empty() ? std::string("none") : out;
}

inline std::string cause_list(const std::vector<std::string>& causes) {
  std::string out;
  for (std::size_t i = 0; i < causes.size(); ++i) {
    if (i > 0) out += ", ";
    out += causes[i] + " (" + attribute_gloss(causes[i]) + ")";
  }
  return out.empty() ? std::string("none") : out;
}

}  // namespace detail

// Human-readable summary.
inline std::string to_text(const Report& r) {
  std::ostringstream out;
  out << "program: " << r.program << "\n";
  out << "processes: " << r.processes;
  if (!r.config.excluded_ranks.empty()) {
    out << " (excluded: "
        << detail::join_ints(std::vector<int>(r.config.excluded_ranks.begin(),
                                              r.config.excluded_ranks.end()))
        << ")";
  }
  out << "\n\n";

  out << "== process behaviour ("
      << metric_kind_name(r.config.dissimilarity_metric) << ") ==\n";
  if (!r.dissimilarity.found) {
    out << "processes behave alike; no dissimilarity bottleneck\n";
  } else {
    out << "behaviour groups:";
    for (const auto& members : r.dissimilarity.full_partition.clusters) {
      out << " {";
      for (std::size_t i = 0; i < members.size(); ++i) {
        if (i > 0) out << ",";
        out << r.dissimilarity.included[static_cast<std::size_t>(members[i])];
      }
      out << "}";
    }
    out << "\n";
    if (r.dissimilarity.bottleneck.has_value()) {
      const BottleneckSet& b = *r.dissimilarity.bottleneck;
      out << "critical regions: " << detail::join_ints(b.ccr) << "\n";
      out << "after refinement: " << detail::join_ints(b.cccr) << "\n";
      if (b.composite_width.has_value()) {
        out << "composite groups of width " << *b.composite_width << ":";
        for (const auto& g : b.composite_groups) {
          out << " [" << detail::join_ints(g) << "]";
        }
        out << "\n";
      }
      if (b.inconclusive) {
        out << "no region or region group explains the split (inconclusive)\n";
      }
    }
    if (r.dissimilarity_analysis.has_value()) {
      out << "root causes: "
          << detail::cause_list(r.dissimilarity_analysis->causes);
      if (r.dissimilarity_analysis->ambiguous) out << " [ambiguous]";
      out << "\n";
    }
  }
  out << "\n";

  out << "== region disparity (" << metric_kind_name(r.config.disparity_metric)
      << ") ==\n";
  if (!r.disparity_found) {
    out << "no region stands out; no disparity bottleneck\n";
  } else {
    out << "critical regions: " << detail::join_ints(r.disparity.ccr) << "\n";
    out << "after refinement: " << detail::join_ints(r.disparity.cccr) << "\n";
    for (int region : r.disparity.ccr) {
      out << "  region " << region << ": severity "
          << r.disparity.severities.at(region) << ", average "
          << r.disparity.averages.at(region) << "\n";
    }
    if (r.disparity_analysis.has_value()) {
      out << "root causes: " << detail::cause_list(r.disparity_analysis->causes);
      if (r.disparity_analysis->ambiguous) out << " [ambiguous]";
      out << "\n";
      for (const Diagnosis& d : r.disparity_analysis->diagnoses) {
        out << "  region " << d.region << " <- ";
        if (d.causes.empty()) {
          out << "(no cause attribute fires here)";
        }
        for (std::size_t i = 0; i < d.causes.size(); ++i) {
          if (i > 0) out << ", ";
          out << d.causes[i];
        }
        for (const CauseEvidence& e : d.evidence) {
          out << "\n    " << e.attribute << " ("
              << metric_kind_name(e.metric) << "): average " << e.average;
          if (e.share_percent.has_value()) {
            out << ", " << *e.share_percent << "% of program total";
          }
        }
        out << "\n";
      }
    }
  }

  if (!r.warnings.empty()) {
    out << "\nwarnings:\n";
    for (const auto& w : r.warnings.messages) out << "  " << w << "\n";
  }
  return out.str();
}

}  // namespace spmdperf
