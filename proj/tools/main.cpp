// Copyright 2026 spmdperf Authors
// Licensed under the Apache License, Version 2.0

#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spmdperf/report.hpp"
#include "spmdperf/trace.hpp"

namespace {

spmdperf::MetricKind parse_metric(const std::string& name) {
  if (name == "cpu" || name == "cpu_time") return spmdperf::MetricKind::CpuTime;
  if (name == "wall" || name == "wall_time") return spmdperf::MetricKind::WallTime;
  if (name == "crnm") return spmdperf::MetricKind::Crnm;
  if (name == "cpi") return spmdperf::MetricKind::Cpi;
  throw spmdperf::AnalysisError(spmdperf::ErrorCode::InvalidSpec,
                                "unknown metric '" + name + "'");
}

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) {
    throw spmdperf::AnalysisError(spmdperf::ErrorCode::ParseError,
                                  "cannot open " + out_path + " for writing");
  }
  out << text;
}

spmdperf::ProfileDataset load_input(const std::string& path) {
  if (path == "-") return spmdperf::load_profile(std::cin);
  return spmdperf::load_profile_file(path);
}

nlohmann::json truth_json(const spmdperf::GeneratedProfile& gp) {
  nlohmann::json j;
  j["scenario"] = gp.spec.name;
  j["shape"] = spmdperf::shape_kind_name(gp.spec.shape);
  j["kind"] = spmdperf::scenario_kind_name(gp.spec.kind);
  j["seed"] = gp.spec.seed;
  j["excluded_ranks"] = gp.truth.excluded_ranks;
  nlohmann::json diss;
  diss["expected"] = gp.truth.dissimilarity_expected;
  diss["ccr"] = gp.truth.dissimilarity_ccr;
  diss["cccr"] = gp.truth.dissimilarity_cccr;
  diss["causes"] = gp.truth.dissimilarity_causes;
  if (gp.truth.composite_width.has_value()) {
    diss["composite_width"] = *gp.truth.composite_width;
  } else {
    diss["composite_width"] = nullptr;
  }
  j["dissimilarity"] = diss;
  nlohmann::json disp;
  disp["expected"] = gp.truth.disparity_expected;
  disp["ccr"] = gp.truth.disparity_ccr;
  disp["cccr"] = gp.truth.disparity_cccr;
  disp["causes"] = gp.truth.disparity_causes;
  j["disparity"] = disp;
  return j;
}

int run_analyze(const std::string& input, const spmdperf::AnalysisConfig& cfg,
                const std::string& format, const std::string& out_path,
                int region_filter) {
  spmdperf::ProfileDataset ds = load_input(input);
  if (region_filter >= 0) ds = spmdperf::subtree_view(ds, region_filter);
  const spmdperf::Report report = spmdperf::run_analysis(ds, cfg);
  if (format == "machine") {
    write_output(spmdperf::to_json(report).dump(2) + "\n", out_path);
  } else {
    write_output(spmdperf::to_text(report), out_path);
  }
  return spmdperf::bottlenecks_found(report) ? 1 : 0;
}

int run_generate(const std::string& scenario, bool list, unsigned seed,
                 bool seed_set, int ranks, bool ranks_set, double intensity,
                 bool intensity_set, const std::string& out_path,
                 const std::string& truth_path) {
  if (list) {
    for (const spmdperf::PlantSpec& s : spmdperf::shipped_scenarios()) {
      std::cout << s.name << ": " << spmdperf::scenario_kind_name(s.kind)
                << " on " << spmdperf::shape_kind_name(s.shape) << " ("
                << s.ranks << " ranks, seed " << s.seed << ")\n";
    }
    return 0;
  }
  if (scenario.empty()) {
    throw spmdperf::AnalysisError(spmdperf::ErrorCode::InvalidSpec,
                                  "--scenario or --list is required");
  }
  spmdperf::PlantSpec spec = spmdperf::find_scenario(scenario);
  if (seed_set) spec.seed = seed;
  if (ranks_set) spec.ranks = ranks;
  if (intensity_set) spec.intensity = intensity;
  const spmdperf::GeneratedProfile gp = spmdperf::generate(spec);
  write_output(spmdperf::save_profile(gp.dataset), out_path);
  if (!truth_path.empty()) {
    write_output(truth_json(gp).dump(2) + "\n", truth_path);
  }
  return 0;
}

int run_compare(const std::string& input, const std::set<int>& excluded) {
  spmdperf::ProfileDataset ds = load_input(input);
  const spmdperf::MetricKind kinds[] = {spmdperf::MetricKind::Crnm,
                                        spmdperf::MetricKind::Cpi,
                                        spmdperf::MetricKind::WallTime};
  std::vector<spmdperf::BottleneckSet> results;
  spmdperf::WarningLog log;
  for (spmdperf::MetricKind kind : kinds) {
    spmdperf::AnalysisConfig cfg;
    cfg.disparity_metric = kind;
    cfg.excluded_ranks = excluded;
    results.push_back(spmdperf::find_disparity(ds, cfg, &log));
  }
  std::cout << "region";
  for (spmdperf::MetricKind kind : kinds) {
    std::cout << "\t" << spmdperf::metric_kind_name(kind);
  }
  std::cout << "\n";
  for (int region : ds.tree.code_region_ids()) {
    std::cout << region;
    for (const auto& r : results) std::cout << "\t" << r.severities.at(region);
    std::cout << "\n";
  }
  for (std::size_t i = 0; i < results.size(); ++i) {
    std::cout << spmdperf::metric_kind_name(kinds[i]) << " critical:";
    for (int region : results[i].ccr) std::cout << " " << region;
    std::cout << " | refined:";
    for (int region : results[i].cccr) std::cout << " " << region;
    std::cout << "\n";
  }
  for (const auto& w : log.messages) std::cerr << "warning: " << w << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"offline bottleneck analysis for SPMD performance profiles"};
  app.require_subcommand(1);

  // analyze
  auto* analyze = app.add_subcommand(
      "analyze", "locate and explain bottlenecks in a profile");
  std::string in_path;
  analyze->add_option("input", in_path, "profile file (text or XML), - for stdin")
      ->required();
  std::string diss_metric = "cpu";
  analyze->add_option("--metric-dissimilarity", diss_metric,
                      "metric for process-behaviour comparison")
      ->check(CLI::IsMember({"cpu", "cpu_time", "wall", "wall_time"}));
  std::string disp_metric = "crnm";
  analyze->add_option("--metric-disparity", disp_metric,
                      "metric for region severity ranking")
      ->check(CLI::IsMember({"crnm", "cpi", "wall", "wall_time"}));
  std::vector<int> excluded;
  analyze->add_option("--exclude-ranks", excluded,
                      "ranks to leave out of the analysis")
      ->delimiter(',');
  double threshold_fraction = 0.10;
  analyze->add_option("--threshold-fraction", threshold_fraction,
                      "neighbourhood radius as a fraction of the seed norm");
  int count_threshold = 1;
  analyze->add_option("--count-threshold", count_threshold,
                      "minimum neighbour count to grow a cluster");
  std::string format = "text";
  analyze->add_option("--format", format, "output format")
      ->check(CLI::IsMember({"text", "machine"}));
  std::string out_path;
  analyze->add_option("--out", out_path, "write the report here (default stdout)");
  int region_filter = -1;
  analyze->add_option("--region-filter", region_filter,
                      "restrict the analysis to one region's subtree");

  // generate
  auto* generate = app.add_subcommand(
      "generate", "emit a synthetic profile with a planted bottleneck");
  std::string scenario;
  generate->add_option("--scenario", scenario, "catalog scenario name");
  bool list = false;
  generate->add_flag("--list", list, "list the scenario catalog and exit");
  unsigned seed = 0;
  auto* seed_opt = generate->add_option("--seed", seed, "override the seed");
  int ranks = 8;
  auto* ranks_opt = generate->add_option("--ranks", ranks,
                                         "override the process count");
  double intensity = 0.0;
  auto* intensity_opt = generate->add_option(
      "--intensity", intensity, "override the plant intensity (re-validated)");
  std::string gen_out;
  generate->add_option("--out", gen_out, "profile destination (default stdout)");
  std::string truth_out;
  generate->add_option("--truth-out", truth_out,
                       "also write the expected analysis outcome as JSON");

  // compare-metrics
  auto* compare = app.add_subcommand(
      "compare-metrics",
      "rank region severity under crnm, cpi and wall time side by side");
  std::string cmp_path;
  compare->add_option("input", cmp_path, "profile file (text or XML), - for stdin")
      ->required();
  std::vector<int> cmp_excluded;
  compare->add_option("--exclude-ranks", cmp_excluded,
                      "ranks to leave out of the analysis")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (analyze->parsed()) {
      spmdperf::AnalysisConfig cfg;
      cfg.dissimilarity_metric = parse_metric(diss_metric);
      cfg.disparity_metric = parse_metric(disp_metric);
      cfg.excluded_ranks = std::set<int>(excluded.begin(), excluded.end());
      cfg.threshold_fraction = threshold_fraction;
      cfg.count_threshold = count_threshold;
      return run_analyze(in_path, cfg, format, out_path, region_filter);
    }
    if (generate->parsed()) {
      return run_generate(scenario, list, seed, seed_opt->count() > 0, ranks,
                          ranks_opt->count() > 0, intensity,
                          intensity_opt->count() > 0, gen_out, truth_out);
    }
    if (compare->parsed()) {
      return run_compare(cmp_path,
                         std::set<int>(cmp_excluded.begin(), cmp_excluded.end()));
    }
  } catch (const spmdperf::AnalysisError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
