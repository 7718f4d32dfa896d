#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "bat/geometry.hpp"
#include "bat/scene.hpp"

namespace bat::graph {

// Distance-thresholded proximity graph over one frame. adjacency(i,j) holds
// the Euclidean distance when 0 < d <= r, else 0; symmetric, zero diagonal.
struct DynamicGeometricGraph {
  std::vector<int> node_ids;
  double threshold_r = 0.0;
  std::vector<double> adjacency;  // n x n row-major, meters

  int size() const { return static_cast<int>(node_ids.size()); }
  double at(int i, int j) const { return adjacency[static_cast<std::size_t>(i) * node_ids.size() + j]; }
  int index_of(int id) const;  // -1 when the id is not a node
};

// Throws std::invalid_argument on duplicate ids or on a position/id count
// mismatch. r = 0 produces an edgeless graph.
DynamicGeometricGraph build_graph(const std::vector<CartPoint>& positions,
                                  const std::vector<int>& ids, double r);

// Largest eigenvalue of a symmetric nonnegative n x n matrix via shifted
// power iteration (tolerance 1e-10, max 10000 iterations, all-ones start).
// An all-zero matrix returns 0. Throws std::runtime_error with the residual
// when the iteration fails to converge.
double dominant_eigenvalue(const std::vector<double>& adjacency, int n);

int neighbor_count(const DynamicGeometricGraph& g, int node_index);

// (|N_i| - 1) / sum of neighbor distances; 0 when N_i is empty or the sum is 0.
double closeness_centrality(const DynamicGeometricGraph& g, int node_index);

// Per node: (sum of incident edge distances) / lambda, lambda the dominant
// eigenvalue of the adjacency. An edgeless graph yields all zeros.
std::vector<double> eigenvector_centrality(const DynamicGeometricGraph& g);

// Cumulative neighbor count as a running sum: value(t) = |N_i^t| +
// value(t-1), starting from 0 before the first frame. A frame
// where the node is absent contributes 0 and the running total persists.
std::vector<double> degree_centrality_series(
    const std::vector<DynamicGeometricGraph>& frames, int node_id);

using Vec3 = std::array<double, 3>;  // degree, closeness, eigenvector
using Vec6 = std::array<double, 6>;  // [BLE; BIE]

// Centrality triple per agent per frame; absent agents read as isolated.
std::vector<std::vector<Vec3>> centrality_series(
    const std::vector<DynamicGeometricGraph>& frames, const std::vector<int>& agent_ids);

// Behavior likelihood estimate: |backward difference| / dt per centrality.
// Frame 0 is defined as 0. Throws std::invalid_argument when dt <= 0.
std::vector<Vec3> ble(const std::vector<Vec3>& centrality, double dt);

// Behavior intensity estimate: |backward difference of BLE| / dt. The first
// two frames are 0. Throws std::invalid_argument when dt <= 0.
std::vector<Vec3> bie(const std::vector<Vec3>& ble_series, double dt);

struct BehaviorSeries {
  std::vector<int> agent_ids;                   // ego first, then neighbors
  std::vector<std::vector<Vec6>> features;      // [agent][frame][6]
};

// Per-frame graphs over ego + present neighbors, then the [BLE; BIE]
// six-vector per agent per history frame. Requires >= 3 history frames.
BehaviorSeries behavior_features(const Scene& scene, double r, double dt);

// agent_id,frame,ble_degree,ble_closeness,ble_eigenvector,bie_degree,
// bie_closeness,bie_eigenvector with a header row.
void export_behavior_csv(const BehaviorSeries& series, std::ostream& os);

}  // namespace bat::graph
