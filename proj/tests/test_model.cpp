// Copyright 2026 spmdperf Authors
// Licensed under the Apache License, Version 2.0

#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "spmdperf/model.hpp"

using namespace spmdperf;
using testing_support::build_dataset;
using testing_support::timed_sample;

namespace {

MetricSample full_sample() {
  MetricSample s;
  s.wall_time = 10.0;
  s.cpu_time = 9.0;
  s.cycles = 20e9;
  s.instructions = 8e9;
  s.l1_miss = 1.0e6;
  s.l1_access = 4.0e6;
  s.l2_miss = 3.0e5;
  s.l2_access = 1.2e6;
  s.mpi_time = 0.5;
  s.mpi_bytes = 1024.0;
  s.disk_bytes = 2048.0;
  s.executed = true;
  return s;
}

bool throws_code(ErrorCode code, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const AnalysisError& e) {
    return e.code() == code;
  }
  return false;
}

// Root 0 with children 1, 2; region 2 has child 3.  Two ranks.
ProfileDataset small_dataset() {
  ProfileDataset ds =
      build_dataset("demo", 2, {{0, -1}, {1, 0}, {2, 0}, {3, 2}});
  // rank 0
  ds.sample_mutable(0, 0) = timed_sample(10, 10, 40e9, 20e9);
  ds.sample_mutable(0, 1) = timed_sample(4, 4, 8e9, 8e9);    // cpi 1
  ds.sample_mutable(0, 2) = timed_sample(5, 5, 30e9, 10e9);  // cpi 3
  ds.sample_mutable(0, 3) = timed_sample(2, 2, 8e9, 2e9);    // cpi 4
  // rank 1
  ds.sample_mutable(1, 0) = timed_sample(20, 20, 40e9, 20e9);
  ds.sample_mutable(1, 1) = timed_sample(8, 8, 8e9, 4e9);   // cpi 2
  ds.sample_mutable(1, 2) = timed_sample(10, 10, 30e9, 10e9);
  ds.sample_mutable(1, 3) = timed_sample(4, 4, 8e9, 2e9);
  return ds;
}

}  // namespace

TEST_CASE("metric names") {
  CHECK(std::string(metric_kind_name(MetricKind::WallTime)) == "wall_time");
  CHECK(std::string(metric_kind_name(MetricKind::CpuTime)) == "cpu_time");
  CHECK(std::string(metric_kind_name(MetricKind::Cpi)) == "cpi");
  CHECK(std::string(metric_kind_name(MetricKind::L1MissRate)) == "l1_miss_rate");
  CHECK(std::string(metric_kind_name(MetricKind::L2MissRate)) == "l2_miss_rate");
  CHECK(std::string(metric_kind_name(MetricKind::DiskBytes)) == "disk_bytes");
  CHECK(std::string(metric_kind_name(MetricKind::NetworkBytes)) ==
        "network_bytes");
  CHECK(std::string(metric_kind_name(MetricKind::InstructionsRetired)) ==
        "instructions_retired");
  CHECK(std::string(metric_kind_name(MetricKind::MpiTime)) == "mpi_time");
  CHECK(std::string(metric_kind_name(MetricKind::Crnm)) == "crnm");
}

TEST_CASE("per-sample metric derivation") {
  const MetricSample s = full_sample();
  CHECK(derived_metric(s, MetricKind::WallTime) == 10.0);
  CHECK(derived_metric(s, MetricKind::CpuTime) == 9.0);
  CHECK(derived_metric(s, MetricKind::Cpi) == 2.5);
  CHECK(derived_metric(s, MetricKind::L1MissRate) == 0.25);
  CHECK(derived_metric(s, MetricKind::L2MissRate) == 0.25);
  CHECK(derived_metric(s, MetricKind::DiskBytes) == 2048.0);
  CHECK(derived_metric(s, MetricKind::NetworkBytes) == 1024.0);
  CHECK(derived_metric(s, MetricKind::InstructionsRetired) == 8e9);
  CHECK(derived_metric(s, MetricKind::MpiTime) == 0.5);

  SECTION("the relative metric needs whole-program context") {
    // Rejected even before the executed check.
    MetricSample unexecuted = s;
    unexecuted.executed = false;
    CHECK(throws_code(ErrorCode::UnsupportedKind,
                      [&] { derived_metric(unexecuted, MetricKind::Crnm); }));
  }
  SECTION("non-executed samples contribute zero") {
    MetricSample unexecuted = s;
    unexecuted.executed = false;
    CHECK(derived_metric(unexecuted, MetricKind::WallTime) == 0.0);
    CHECK(derived_metric(unexecuted, MetricKind::Cpi) == 0.0);
    CHECK(derived_metric(unexecuted, MetricKind::DiskBytes) == 0.0);
  }
  SECTION("zero denominators degrade to zero with a warning") {
    MetricSample zeroed = s;
    zeroed.instructions = 0.0;
    WarningLog log;
    CHECK(derived_metric(zeroed, MetricKind::Cpi, &log) == 0.0);
    REQUIRE(log.messages.size() == 1);
    CHECK_THAT(log.messages[0],
               Catch::Matchers::ContainsSubstring("zero denominator"));
    // Without a log the value still degrades silently.
    CHECK(derived_metric(zeroed, MetricKind::Cpi) == 0.0);
  }
}

TEST_CASE("region tree lookup and orderings") {
  const ProfileDataset ds = small_dataset();
  CHECK(ds.tree.root == 0);
  CHECK(ds.tree.has(3));
  CHECK_FALSE(ds.tree.has(9));
  CHECK(ds.tree.at(3).depth == 2);
  CHECK(ds.tree.at(3).parent == std::optional<int>{2});
  CHECK(throws_code(ErrorCode::UnknownRegion, [&] { ds.tree.at(9); }));
  CHECK(ds.tree.region_ids() == std::vector<int>{0, 1, 2, 3});
  CHECK(ds.tree.code_region_ids() == std::vector<int>{1, 2, 3});
  CHECK(ds.tree.top_level_ids() == std::vector<int>{1, 2});
}

TEST_CASE("tree validation findings") {
  SECTION("well-formed tree") {
    CHECK(validate_tree(small_dataset().tree).empty());
  }
  SECTION("duplicate ids") {
    RegionTree t = small_dataset().tree;
    t.nodes.push_back(t.nodes.back());
    const auto errors = validate_tree(t);
    REQUIRE(!errors.empty());
    CHECK(errors.front().kind == TreeError::Kind::DuplicateId);
  }
  SECTION("orphan parent reference") {
    RegionTree t = small_dataset().tree;
    RegionNode n;
    n.id = 7;
    n.parent = 42;  // no such region
    n.depth = 1;
    t.nodes.push_back(n);
    const auto errors = validate_tree(t);
    REQUIRE(errors.size() == 1);
    CHECK(errors[0].kind == TreeError::Kind::OrphanNode);
    CHECK(errors[0].region == 7);
  }
  SECTION("depth inconsistent with parent") {
    RegionTree t = small_dataset().tree;
    for (auto& n : t.nodes) {
      if (n.id == 3) n.depth = 5;
    }
    const auto errors = validate_tree(t);
    REQUIRE(errors.size() == 1);
    CHECK(errors[0].kind == TreeError::Kind::DepthMismatch);
    CHECK(errors[0].region == 3);
  }
  SECTION("two roots") {
    RegionTree t = small_dataset().tree;
    RegionNode n;
    n.id = 8;
    n.depth = 0;
    t.nodes.push_back(n);
    const auto errors = validate_tree(t);
    bool found = false;
    for (const auto& e : errors) {
      if (e.kind == TreeError::Kind::MultipleRoots) found = true;
    }
    CHECK(found);
  }
}

TEST_CASE("dataset indexing and rank checks") {
  const ProfileDataset ds = small_dataset();
  CHECK(ds.region_index(0) == 0);
  CHECK(ds.region_index(3) == 3);
  CHECK(throws_code(ErrorCode::UnknownRegion, [&] { ds.region_index(5); }));
  CHECK(throws_code(ErrorCode::UnknownRank, [&] { ds.sample(2, 0); }));
  CHECK(throws_code(ErrorCode::UnknownRank, [&] { ds.sample(-1, 0); }));
  CHECK(ds.sample(1, 2).wall_time == 10.0);
}

TEST_CASE("rank inclusion") {
  const ProfileDataset ds = small_dataset();
  CHECK(included_ranks(ds, {}) == std::vector<int>{0, 1});
  CHECK(included_ranks(ds, {0}) == std::vector<int>{1});
  CHECK(throws_code(ErrorCode::UnknownRank, [&] { included_ranks(ds, {5}); }));
  CHECK(throws_code(ErrorCode::AllRanksExcluded,
                    [&] { included_ranks(ds, {0, 1}); }));
}

TEST_CASE("relative-cost vector spans all regions in id order") {
  const ProfileDataset ds = small_dataset();
  // rank 0: root cpi 2; weights wall/root-wall = 1, 0.4, 0.5, 0.2.
  const std::vector<double> v = crnm_vector(ds, 0);
  REQUIRE(v.size() == 4);
  CHECK_THAT(v[0], Catch::Matchers::WithinRel(2.0, 1e-12));
  CHECK_THAT(v[1], Catch::Matchers::WithinRel(0.4 * 1.0, 1e-12));
  CHECK_THAT(v[2], Catch::Matchers::WithinRel(0.5 * 3.0, 1e-12));
  CHECK_THAT(v[3], Catch::Matchers::WithinRel(0.2 * 4.0, 1e-12));

  SECTION("non-executed regions score zero") {
    ProfileDataset d2 = ds;
    d2.sample_mutable(0, 3).executed = false;
    CHECK(crnm_vector(d2, 0)[3] == 0.0);
  }
  SECTION("zero program time is fatal") {
    ProfileDataset d2 = ds;
    d2.sample_mutable(0, 0).wall_time = 0.0;
    CHECK(throws_code(ErrorCode::ZeroProgramTime, [&] { crnm_vector(d2, 0); }));
    ProfileDataset d3 = ds;
    d3.sample_mutable(0, 0).executed = false;
    CHECK(throws_code(ErrorCode::ZeroProgramTime, [&] { crnm_vector(d3, 0); }));
  }
}

TEST_CASE("metric vectors over region subsets") {
  const ProfileDataset ds = small_dataset();
  // Regions listed out of order come back in ascending id order.
  const std::vector<double> cpu =
      metric_vector(ds, 1, MetricKind::CpuTime, {3, 1, 2});
  CHECK(cpu == std::vector<double>{8.0, 10.0, 4.0});
  // The relative metric routes through the whole-program computation even
  // for a subset of regions.
  const std::vector<double> crnm =
      metric_vector(ds, 0, MetricKind::Crnm, {2, 3});
  REQUIRE(crnm.size() == 2);
  CHECK_THAT(crnm[0], Catch::Matchers::WithinRel(1.5, 1e-12));
  CHECK_THAT(crnm[1], Catch::Matchers::WithinRel(0.8, 1e-12));
}

TEST_CASE("per-region averages across processes") {
  const ProfileDataset ds = small_dataset();
  const std::vector<double> avg =
      average_over_processes(ds, MetricKind::WallTime, {});
  // All regions in ascending id order, root included.
  CHECK(avg == std::vector<double>{15.0, 6.0, 7.5, 3.0});
  const std::vector<double> only1 =
      average_over_processes(ds, MetricKind::WallTime, {0});
  CHECK(only1 == std::vector<double>{20.0, 8.0, 10.0, 4.0});
}

TEST_CASE("subtree restriction") {
  const ProfileDataset ds = small_dataset();
  const ProfileDataset sub = subtree_view(ds, 2);
  CHECK(sub.tree.root == 2);
  CHECK(sub.region_order == std::vector<int>{2, 3});
  CHECK(sub.tree.at(2).depth == 0);
  CHECK_FALSE(sub.tree.at(2).parent.has_value());
  CHECK(sub.tree.at(3).depth == 1);
  CHECK(sub.process_count == 2);
  CHECK(sub.sample(0, 3).wall_time == 2.0);
  CHECK(sub.sample(1, 2).wall_time == 10.0);
  CHECK(validate_tree(sub.tree).empty());
  CHECK(throws_code(ErrorCode::UnknownRegion, [&] { subtree_view(ds, 77); }));
}
