#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "bat/graph.hpp"
#include "bat/rng.hpp"
#include "oracles.hpp"

using bat::CartPoint;
using bat::NeighborTrack;
using bat::Scene;
using bat::graph::DynamicGeometricGraph;
using bat::graph::Vec3;

namespace {

Scene two_agent_scene(const std::vector<double>& gaps) {
  Scene scene;
  scene.dt = 1.0;
  NeighborTrack nb;
  nb.id = 0;
  for (double g : gaps) {
    scene.ego_history.push_back({0.0, 0.0});
    nb.positions.push_back({g, 0.0});
    nb.present.push_back(true);
  }
  scene.neighbors.push_back(nb);
  return scene;
}

}  // namespace

TEST_CASE("build_graph thresholds edges and stores distances") {
  DynamicGeometricGraph far = bat::graph::build_graph({{0, 0}, {10, 0}}, {1, 2}, 7.62);
  for (double v : far.adjacency) CHECK(v == 0.0);

  DynamicGeometricGraph close = bat::graph::build_graph({{0, 0}, {5, 0}}, {1, 2}, 7.62);
  CHECK(close.at(0, 1) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(close.at(1, 0) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(close.at(0, 0) == 0.0);
  CHECK(close.at(1, 1) == 0.0);
}

TEST_CASE("r=0 disables every edge") {
  bat::Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<CartPoint> pos;
    std::vector<int> ids;
    const int n = rng.uniform_int(1, 8);
    for (int i = 0; i < n; ++i) {
      pos.push_back({rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)});
      ids.push_back(i);
    }
    DynamicGeometricGraph g = bat::graph::build_graph(pos, ids, 0.0);
    for (double v : g.adjacency) CHECK(v == 0.0);
  }
}

TEST_CASE("build_graph rejects duplicate ids") {
  CHECK_THROWS_AS(bat::graph::build_graph({{0, 0}, {1, 0}}, {3, 3}, 10.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(bat::graph::build_graph({{0, 0}}, {1, 2}, 10.0), std::invalid_argument);
}

TEST_CASE("adjacency is symmetric with a zero diagonal on random scenes") {
  bat::Rng rng(32);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<CartPoint> pos;
    std::vector<int> ids;
    const int n = rng.uniform_int(1, 9);
    for (int i = 0; i < n; ++i) {
      pos.push_back({rng.uniform(-20.0, 20.0), rng.uniform(-20.0, 20.0)});
      ids.push_back(100 + i);
    }
    DynamicGeometricGraph g = bat::graph::build_graph(pos, ids, rng.uniform(0.0, 25.0));
    for (int i = 0; i < n; ++i) {
      CHECK(g.at(i, i) == 0.0);
      for (int j = 0; j < n; ++j) {
        CHECK(g.at(i, j) == g.at(j, i));
        if (g.at(i, j) != 0.0) CHECK(g.at(i, j) <= g.threshold_r);
      }
    }
  }
}

TEST_CASE("degree centrality accumulates across frames") {
  std::vector<CartPoint> triangle = {{0, 0}, {1, 0}, {0.5, 0.8}};
  std::vector<int> ids = {0, 1, 2};
  DynamicGeometricGraph g = bat::graph::build_graph(triangle, ids, 2.0);

  auto one = bat::graph::degree_centrality_series({g}, 0);
  CHECK(one == std::vector<double>{2.0});

  auto two = bat::graph::degree_centrality_series({g, g}, 1);
  CHECK(two == std::vector<double>{2.0, 4.0});

  DynamicGeometricGraph isolated = bat::graph::build_graph({{0, 0}, {100, 0}}, {7, 8}, 1.0);
  auto none = bat::graph::degree_centrality_series({isolated, isolated, isolated}, 7);
  CHECK(none == std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("absent frames freeze the cumulative degree") {
  DynamicGeometricGraph with = bat::graph::build_graph({{0, 0}, {1, 0}}, {0, 1}, 2.0);
  DynamicGeometricGraph without = bat::graph::build_graph({{0, 0}}, {0}, 2.0);
  auto series = bat::graph::degree_centrality_series({with, without, with}, 1);
  CHECK(series == std::vector<double>{1.0, 1.0, 2.0});
}

TEST_CASE("closeness centrality follows the neighbor-count-minus-one form") {
  DynamicGeometricGraph g =
      bat::graph::build_graph({{0, 0}, {1, 0}, {-2, 0}}, {0, 1, 2}, 3.0);
  CHECK(bat::graph::closeness_centrality(g, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  DynamicGeometricGraph pair = bat::graph::build_graph({{0, 0}, {4, 0}}, {0, 1}, 5.0);
  CHECK(bat::graph::closeness_centrality(pair, 0) == 0.0);

  DynamicGeometricGraph lone = bat::graph::build_graph({{0, 0}}, {0}, 5.0);
  CHECK(bat::graph::closeness_centrality(lone, 0) == 0.0);
}

TEST_CASE("two-node eigenvector centrality is 1 for both nodes") {
  DynamicGeometricGraph g = bat::graph::build_graph({{0, 0}, {3, 0}}, {0, 1}, 5.0);
  auto eig = bat::graph::eigenvector_centrality(g);
  REQUIRE(eig.size() == 2);
  CHECK(eig[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(eig[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("edgeless graphs have zero eigenvector centrality") {
  DynamicGeometricGraph g = bat::graph::build_graph({{0, 0}, {50, 0}, {100, 0}}, {0, 1, 2}, 1.0);
  for (double v : bat::graph::eigenvector_centrality(g)) CHECK(v == 0.0);
  CHECK(bat::graph::dominant_eigenvalue(g.adjacency, 3) == 0.0);
}

TEST_CASE("dominant eigenvalue matches the Jacobi oracle on random graphs") {
  bat::Rng rng(33);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = rng.uniform_int(2, 7);
    std::vector<CartPoint> pos;
    std::vector<int> ids;
    for (int i = 0; i < n; ++i) {
      pos.push_back({rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)});
      ids.push_back(i);
    }
    DynamicGeometricGraph g = bat::graph::build_graph(pos, ids, rng.uniform(3.0, 20.0));
    bool any = false;
    for (double v : g.adjacency) any = any || v != 0.0;
    if (!any) continue;
    const double lambda = bat::graph::dominant_eigenvalue(g.adjacency, n);
    const double ref = oracles::jacobi_max_eigenvalue(g.adjacency, n);
    CHECK(lambda == doctest::Approx(ref).epsilon(1e-6));
  }
}

TEST_CASE("star graphs converge despite their symmetric spectrum") {
  // a hub with three satellites is bipartite: eigenvalues come in +/- pairs,
  // the classic failure mode for an unshifted power iteration. Satellites sit
  // 120 degrees apart so they are pairwise out of range of each other.
  std::vector<CartPoint> pos = {{0, 0},
                                {2, 0},
                                {2 * std::cos(2.0944), 2 * std::sin(2.0944)},
                                {2 * std::cos(4.1888), 2 * std::sin(4.1888)}};
  std::vector<int> ids = {0, 1, 2, 3};
  DynamicGeometricGraph g = bat::graph::build_graph(pos, ids, 3.0);
  const double lambda = bat::graph::dominant_eigenvalue(g.adjacency, 4);
  const double ref = oracles::jacobi_max_eigenvalue(g.adjacency, 4);
  CHECK(lambda == doctest::Approx(ref).epsilon(1e-9));
  CHECK(lambda == doctest::Approx(2.0 * std::sqrt(3.0)).epsilon(1e-9));
}

TEST_CASE("brute-force centralities match for small graphs") {
  bat::Rng rng(34);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = rng.uniform_int(1, 6);
    std::vector<CartPoint> pos;
    std::vector<int> ids;
    for (int i = 0; i < n; ++i) {
      pos.push_back({rng.uniform(-8.0, 8.0), rng.uniform(-8.0, 8.0)});
      ids.push_back(i);
    }
    const double r = rng.uniform(2.0, 12.0);
    DynamicGeometricGraph g = bat::graph::build_graph(pos, ids, r);
    for (int i = 0; i < n; ++i) {
      int ref_count = 0;
      double ref_sum = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const double d = bat::distance(pos[i], pos[j]);
        if (d > 0.0 && d <= r) {
          ++ref_count;
          ref_sum += d;
        }
      }
      CHECK(bat::graph::neighbor_count(g, i) == ref_count);
      const double ref_closeness =
          (ref_count == 0 || ref_sum == 0.0) ? 0.0 : (ref_count - 1) / ref_sum;
      CHECK(bat::graph::closeness_centrality(g, i) == doctest::Approx(ref_closeness).epsilon(1e-12));
    }
  }
}

TEST_CASE("ble of a constant series is zero and of a ramp is the slope") {
  std::vector<Vec3> constant(4, Vec3{5.0, 0.25, 1.0});
  for (const Vec3& v : bat::graph::ble(constant, 0.5))
    for (double c : v) CHECK(c == 0.0);

  std::vector<Vec3> ramp = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}};
  auto likelihood = bat::graph::ble(ramp, 1.0);
  CHECK(likelihood[0][0] == 0.0);
  CHECK(likelihood[1][0] == 1.0);
  CHECK(likelihood[2][0] == 1.0);
  CHECK(likelihood[3][0] == 1.0);

  std::vector<Vec3> flip = {{2, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  auto flipped = bat::graph::ble(flip, 1.0);
  CHECK(flipped[1][0] == 1.0);
  CHECK(flipped[2][0] == 1.0);
}

TEST_CASE("bie of a quadratic ramp is the constant second difference") {
  std::vector<Vec3> quad = {{0, 0, 0}, {1, 0, 0}, {4, 0, 0}, {9, 0, 0}};
  auto likelihood = bat::graph::ble(quad, 1.0);
  auto intensity = bat::graph::bie(likelihood, 1.0);
  CHECK(intensity[0][0] == 0.0);
  CHECK(intensity[1][0] == 0.0);
  CHECK(intensity[2][0] == 2.0);
  CHECK(intensity[3][0] == 2.0);

  std::vector<Vec3> linear = {{0, 0, 0}, {2, 0, 0}, {4, 0, 0}, {6, 0, 0}};
  auto li = bat::graph::bie(bat::graph::ble(linear, 1.0), 1.0);
  for (std::size_t t = 2; t < li.size(); ++t) CHECK(li[t][0] == 0.0);
}

TEST_CASE("ble and bie reject nonpositive dt") {
  std::vector<Vec3> series(3, Vec3{0, 0, 0});
  CHECK_THROWS_AS(bat::graph::ble(series, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(bat::graph::bie(series, -0.1), std::invalid_argument);
}

TEST_CASE("behavior_features of static isolated agents is all zero") {
  Scene scene;
  scene.dt = 0.2;
  for (int t = 0; t < 5; ++t) scene.ego_history.push_back({0.0, 0.0});
  NeighborTrack nb;
  nb.id = 0;
  for (int t = 0; t < 5; ++t) {
    nb.positions.push_back({100.0, 0.0});
    nb.present.push_back(true);
  }
  scene.neighbors.push_back(nb);
  auto series = bat::graph::behavior_features(scene, 7.62, scene.dt);
  REQUIRE(series.features.size() == 2);
  for (const auto& agent : series.features) {
    REQUIRE(agent.size() == 5);
    for (const auto& frame : agent)
      for (double v : frame) CHECK(v == 0.0);
  }
}

TEST_CASE("a linearly closing neighbor produces the closed-form closeness BLE") {
  // two nodes at gap g(t): closeness = 0 for both (single neighbor), but the
  // degree series jumps when the pair enters radius, and eigenvector is 1
  // once connected. Check the eigenvector-BLE transition frame.
  Scene scene = two_agent_scene({9.0, 8.0, 7.0, 6.0, 5.0});
  auto series = bat::graph::behavior_features(scene, 7.62, 1.0);
  // gap enters the radius at frame 2 (7.0 <= 7.62): eigenvector 0 -> 1
  CHECK(series.features[0][2][2] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(series.features[0][3][2] == doctest::Approx(0.0).epsilon(1e-9));
  // BIE picks up the change of the change at frames 2 and 3
  CHECK(series.features[0][3][5] == doctest::Approx(1.0).epsilon(1e-9));
  // degree-BLE is 1 from frame 2 on (one neighbor each frame)
  CHECK(series.features[0][2][0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(series.features[0][4][0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("behavior features are invariant under rigid motion of the scene") {
  bat::Rng rng(35);
  Scene scene;
  scene.dt = 0.2;
  for (int t = 0; t < 6; ++t)
    scene.ego_history.push_back({rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)});
  for (int k = 0; k < 3; ++k) {
    NeighborTrack nb;
    nb.id = k;
    for (int t = 0; t < 6; ++t) {
      nb.positions.push_back({rng.uniform(-8.0, 8.0), rng.uniform(-8.0, 8.0)});
      nb.present.push_back(true);
    }
    scene.neighbors.push_back(nb);
  }

  const double phi = 1.1;
  const CartPoint shift{40.0, -17.0};
  Scene moved = scene;
  auto move = [&](CartPoint p) {
    CartPoint q = bat::rotate(p, phi);
    return CartPoint{q.x + shift.x, q.y + shift.y};
  };
  for (auto& p : moved.ego_history) p = move(p);
  for (auto& nb : moved.neighbors)
    for (auto& p : nb.positions) p = move(p);

  auto a = bat::graph::behavior_features(scene, 7.62, scene.dt);
  auto b = bat::graph::behavior_features(moved, 7.62, scene.dt);
  for (std::size_t ag = 0; ag < a.features.size(); ++ag)
    for (std::size_t t = 0; t < a.features[ag].size(); ++t)
      for (int c = 0; c < 6; ++c)
        CHECK(a.features[ag][t][static_cast<std::size_t>(c)] ==
              doctest::Approx(b.features[ag][t][static_cast<std::size_t>(c)]).epsilon(1e-9));
}

TEST_CASE("r=0 yields an identically zero behavior series") {
  bat::Rng rng(36);
  Scene scene;
  scene.dt = 0.2;
  for (int t = 0; t < 5; ++t)
    scene.ego_history.push_back({rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)});
  NeighborTrack nb;
  nb.id = 0;
  for (int t = 0; t < 5; ++t) {
    nb.positions.push_back({rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)});
    nb.present.push_back(true);
  }
  scene.neighbors.push_back(nb);
  auto series = bat::graph::behavior_features(scene, 0.0, scene.dt);
  for (const auto& agent : series.features)
    for (const auto& frame : agent)
      for (double v : frame) CHECK(v == 0.0);
}

TEST_CASE("behavior_features requires three history frames and reports shape") {
  Scene scene = two_agent_scene({5.0, 5.0});
  CHECK_THROWS_AS(bat::graph::behavior_features(scene, 7.62, 1.0), std::invalid_argument);

  Scene ok = two_agent_scene({5.0, 5.0, 5.0, 5.0});
  auto series = bat::graph::behavior_features(ok, 7.62, 1.0);
  CHECK(series.agent_ids.size() == 2);
  CHECK(series.features.size() == 2);
  for (const auto& agent : series.features) CHECK(agent.size() == 4);
}

TEST_CASE("csv export carries one row per agent frame") {
  Scene scene = two_agent_scene({5.0, 6.0, 7.0});
  auto series = bat::graph::behavior_features(scene, 7.62, 1.0);
  std::ostringstream os;
  bat::graph::export_behavior_csv(series, os);
  std::istringstream is(os.str());
  std::string line;
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 1 + 2 * 3);
  CHECK(os.str().rfind("agent_id,frame,ble_degree", 0) == 0);
}
