// Copyright 2026 spmdperf Authors
// Licensed under the Apache License, Version 2.0

#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "spmdperf/cluster.hpp"

using namespace spmdperf;
using testing_support::exact_kmeans_wcss;
using testing_support::labelling_wcss;

namespace {

bool throws_code(ErrorCode code, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const AnalysisError& e) {
    return e.code() == code;
  }
  return false;
}

}  // namespace

TEST_CASE("euclidean distance") {
  CHECK(euclidean_distance({0.0, 0.0}, {3.0, 4.0}) == 5.0);
  CHECK(euclidean_distance({1.0}, {1.0}) == 0.0);
  CHECK(throws_code(ErrorCode::DimensionMismatch,
                    [] { euclidean_distance({1.0}, {1.0, 2.0}); }));
}

TEST_CASE("density grouping: input validation") {
  CHECK(throws_code(ErrorCode::EmptyInput, [] { optics_cluster({}); }));
  CHECK(throws_code(ErrorCode::InvalidSpec,
                    [] { optics_cluster({{1.0}}, 0.0); }));
  CHECK(throws_code(ErrorCode::InvalidSpec,
                    [] { optics_cluster({{1.0}}, -0.5); }));
  CHECK(throws_code(ErrorCode::DimensionMismatch,
                    [] { optics_cluster({{1.0, 2.0}, {1.0}}); }));
}

TEST_CASE("density grouping: identical points form one cluster") {
  const std::vector<std::vector<double>> vs(8, {3.0, 4.0});
  const Partition p = optics_cluster(vs);
  REQUIRE(p.clusters.size() == 1);
  CHECK(p.clusters[0] == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
  CHECK_FALSE(p.isolated[0]);
}

TEST_CASE("density grouping: zero-norm seed has an empty neighbourhood") {
  // The radius scales with the seed's norm, so identical all-zero points
  // cannot absorb each other.
  const std::vector<std::vector<double>> vs(3, {0.0, 0.0});
  const Partition p = optics_cluster(vs);
  REQUIRE(p.clusters.size() == 3);
  for (std::size_t c = 0; c < 3; ++c) CHECK(p.isolated[c]);
}

TEST_CASE("density grouping: radius comparison is strict") {
  // |p| = 10, radius = 1; the second point sits exactly on the boundary.
  const Partition p = optics_cluster({{10.0}, {11.0}, {10.5}}, 0.10, 0);
  // Point 1 is at distance 1.0 (excluded), point 2 at 0.5 (included).
  REQUIRE(p.clusters.size() == 2);
  CHECK(p.clusters[0] == std::vector<int>{0, 2});
  CHECK(p.clusters[1] == std::vector<int>{1});
}

TEST_CASE("density grouping: pairs cannot cluster at the default count") {
  // A lone neighbour is not "more than one", so near-identical pairs stay
  // isolated singletons under the defaults.
  const Partition p = optics_cluster({{10.0}, {10.1}});
  REQUIRE(p.clusters.size() == 2);
  CHECK(p.isolated[0]);
  CHECK(p.isolated[1]);
  // Lowering the count threshold lets the pair merge.
  const Partition q = optics_cluster({{10.0}, {10.1}}, 0.10, 0);
  REQUIRE(q.clusters.size() == 1);
  CHECK(q.clusters[0] == std::vector<int>{0, 1});
}

TEST_CASE("density grouping: no transitive expansion") {
  // 1 is within 0's radius, 2 is within 1's radius but not 0's.  A chaining
  // scheme would merge all three; this one must not.
  const Partition p = optics_cluster({{10.0}, {10.9}, {11.7}}, 0.10, 0);
  REQUIRE(p.clusters.size() == 2);
  CHECK(p.clusters[0] == std::vector<int>{0, 1});
  CHECK_FALSE(p.isolated[0]);
  CHECK(p.clusters[1] == std::vector<int>{2});
  CHECK(p.isolated[1]);
}

TEST_CASE("density grouping: failed seed leaves its neighbours available") {
  // Point 0 has a single near neighbour (point 1): below the default count
  // threshold, so 0 isolates.  Point 1 then seeds its own neighbourhood
  // containing points 2 and 3.
  const Partition p = optics_cluster({{100.0}, {109.0}, {110.0}, {111.0}});
  REQUIRE(p.clusters.size() == 2);
  CHECK(p.clusters[0] == std::vector<int>{0});
  CHECK(p.isolated[0]);
  CHECK(p.clusters[1] == std::vector<int>{1, 2, 3});
  CHECK_FALSE(p.isolated[1]);
}

TEST_CASE("density grouping: two process groups and an outlier") {
  const std::vector<std::vector<double>> vs = {
      {100.0, 100.0}, {101.0, 100.0}, {100.0, 101.0},
      {200.0, 200.0}, {200.0, 201.0}, {201.0, 200.0},
      {400.0, 0.0},
  };
  const Partition p = optics_cluster(vs);
  REQUIRE(p.clusters.size() == 3);
  CHECK(p.clusters[0] == std::vector<int>{0, 1, 2});
  CHECK(p.clusters[1] == std::vector<int>{3, 4, 5});
  CHECK(p.clusters[2] == std::vector<int>{6});
  CHECK(p.assignment == std::vector<int>{0, 0, 0, 1, 1, 1, 2});
  CHECK(std::vector<bool>(p.isolated) ==
        std::vector<bool>{false, false, true});
}

TEST_CASE("density grouping: partition is scale invariant") {
  std::mt19937 rng(4001);
  for (int round = 0; round < 50; ++round) {
    std::vector<std::vector<double>> vs;
    const int n = 3 + static_cast<int>(rng() % 8);
    for (int i = 0; i < n; ++i) {
      const double base = 50.0 + static_cast<double>(rng() % 200);
      vs.push_back({base, base + static_cast<double>(rng() % 10)});
    }
    std::vector<std::vector<double>> scaled = vs;
    for (auto& v : scaled) {
      for (double& x : v) x *= 100.0;
    }
    const Partition a = optics_cluster(vs);
    const Partition b = optics_cluster(scaled);
    INFO("round " << round);
    CHECK(partitions_equal(a, b));
  }
}

TEST_CASE("partition equality ignores discovery order") {
  Partition a;
  a.assignment = {0, 0, 1};
  a.clusters = {{0, 1}, {2}};
  a.isolated = {false, true};
  Partition b;
  b.assignment = {1, 1, 0};
  b.clusters = {{2}, {0, 1}};
  b.isolated = {true, false};
  CHECK(partitions_equal(a, b));
  Partition c;
  c.assignment = {0, 1, 1};
  c.clusters = {{0}, {1, 2}};
  c.isolated = {true, false};
  CHECK_FALSE(partitions_equal(a, c));
  Partition d;
  d.assignment = {0, 0};
  d.clusters = {{0, 1}};
  d.isolated = {false};
  CHECK(throws_code(ErrorCode::UniverseMismatch,
                    [&] { partitions_equal(a, d); }));
}

TEST_CASE("severity bands: validation and degenerate inputs") {
  CHECK(throws_code(ErrorCode::EmptyInput, [] { kmeans_severity({}); }));
  CHECK(throws_code(ErrorCode::InvalidSpec, [] { kmeans_severity({1.0}, 0); }));

  SECTION("all-identical values sit in one band") {
    const SeverityMap m = kmeans_severity({7.0, 7.0, 7.0});
    CHECK(m.severity == std::vector<int>{0, 0, 0});
    CHECK(m.centroids == std::vector<double>{7.0});
  }
  SECTION("fewer distinct values than bands: rank order") {
    const SeverityMap m = kmeans_severity({5.0, 1.0, 5.0, 3.0});
    CHECK(m.severity == std::vector<int>{2, 0, 2, 1});
    CHECK(m.centroids == std::vector<double>{1.0, 3.0, 5.0});
  }
}

TEST_CASE("severity bands: five well-separated groups") {
  const std::vector<double> values = {0, 1,  2,  10, 11, 20,
                                      21, 30, 40, 41, 42};
  const SeverityMap m = kmeans_severity(values, 5);
  CHECK(m.severity == std::vector<int>{0, 0, 0, 1, 1, 2, 2, 3, 4, 4, 4});
  REQUIRE(m.centroids.size() == 5);
  CHECK(m.centroids[0] == 1.0);
  CHECK(m.centroids[1] == 10.5);
  CHECK(m.centroids[2] == 20.5);
  CHECK(m.centroids[3] == 30.0);
  CHECK(m.centroids[4] == 41.0);
  // Clean separation means the banding is also the optimal clustering.
  CHECK_THAT(labelling_wcss(values, m.severity),
             Catch::Matchers::WithinAbs(exact_kmeans_wcss(values, 5), 1e-9));
}

TEST_CASE("severity bands: starved seeds drop and labels stay dense") {
  // Six equal low values pull three of the five percentile seeds onto the
  // same spot; one centre starves and is dropped, leaving four bands.
  const std::vector<double> values = {0, 0, 0, 0, 0, 0, 1, 2, 3, 4, 100};
  const SeverityMap m = kmeans_severity(values, 5);
  REQUIRE(m.centroids.size() == 4);
  CHECK(m.centroids == std::vector<double>{0.0, 1.5, 3.5, 100.0});
  CHECK(m.severity == std::vector<int>{0, 0, 0, 0, 0, 0, 1, 1, 2, 2, 3});
}

TEST_CASE("severity bands: labels are monotone in the values") {
  std::mt19937 rng(4002);
  for (int round = 0; round < 100; ++round) {
    const int n = 1 + static_cast<int>(rng() % 30);
    std::vector<double> values;
    for (int i = 0; i < n; ++i) {
      values.push_back(static_cast<double>(rng() % 1000) / 8.0);
    }
    const SeverityMap m = kmeans_severity(values, 5);
    REQUIRE(m.severity.size() == values.size());
    REQUIRE(!m.centroids.empty());
    CHECK(std::is_sorted(m.centroids.begin(), m.centroids.end()));
    int max_label = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      max_label = std::max(max_label, m.severity[i]);
      for (std::size_t j = 0; j < values.size(); ++j) {
        if (values[i] < values[j]) {
          CHECK(m.severity[i] <= m.severity[j]);
        } else if (values[i] == values[j]) {
          CHECK(m.severity[i] == m.severity[j]);
        }
      }
    }
    // Labels are dense: every band up to the maximum is inhabited.
    CHECK(max_label == static_cast<int>(m.centroids.size()) - 1);
    std::vector<bool> seen(static_cast<std::size_t>(max_label) + 1, false);
    for (int s : m.severity) {
      REQUIRE(s >= 0);
      seen[static_cast<std::size_t>(s)] = true;
    }
    for (bool b : seen) CHECK(b);
    // A Lloyd labelling can be locally optimal, but never beats the exact
    // dynamic-programming optimum.
    const double gap =
        labelling_wcss(values, m.severity) - exact_kmeans_wcss(values, 5);
    CHECK(gap >= -1e-7);
  }
}

TEST_CASE("severity bands: scaling values scales centroids") {
  const std::vector<double> values = {1, 2, 30, 31, 55, 80, 81, 99};
  const SeverityMap a = kmeans_severity(values, 5);
  std::vector<double> scaled;
  for (double v : values) scaled.push_back(v * 64.0);
  const SeverityMap b = kmeans_severity(scaled, 5);
  CHECK(a.severity == b.severity);
  REQUIRE(a.centroids.size() == b.centroids.size());
  for (std::size_t i = 0; i < a.centroids.size(); ++i) {
    CHECK_THAT(b.centroids[i],
               Catch::Matchers::WithinRel(a.centroids[i] * 64.0, 1e-12));
  }
}
