#include "bat/graph.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace bat::graph {

int DynamicGeometricGraph::index_of(int id) const {
  for (int i = 0; i < size(); ++i)
    if (node_ids[i] == id) return i;
  return -1;
}

DynamicGeometricGraph build_graph(const std::vector<CartPoint>& positions,
                                  const std::vector<int>& ids, double r) {
  if (positions.size() != ids.size())
    throw std::invalid_argument("build_graph: positions and ids differ in length");
  std::set<int> unique(ids.begin(), ids.end());
  if (unique.size() != ids.size())
    throw std::invalid_argument("build_graph: duplicate node ids");

  DynamicGeometricGraph g;
  g.node_ids = ids;
  g.threshold_r = r;
  const int n = g.size();
  g.adjacency.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double d = distance(positions[i], positions[j]);
      if (d > 0.0 && d <= r) {
        g.adjacency[static_cast<std::size_t>(i) * n + j] = d;
        g.adjacency[static_cast<std::size_t>(j) * n + i] = d;
      }
    }
  return g;
}

double dominant_eigenvalue(const std::vector<double>& adjacency, int n) {
  if (n <= 0) return 0.0;
  bool any_edge = false;
  double shift = 1.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      const double v = adjacency[static_cast<std::size_t>(i) * n + j];
      row += std::abs(v);
      if (v != 0.0) any_edge = true;
    }
    shift = std::max(shift, row);
  }
  if (!any_edge) return 0.0;

  // Power iteration on A + shift*I. The shift makes the spectrum nonnegative
  // so the iteration cannot oscillate between signs (bipartite graphs have a
  // symmetric spectrum and defeat the unshifted iteration).
  const double tol = 1e-10;
  const int max_iters = 10000;
  std::vector<double> x(static_cast<std::size_t>(n), 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> y(static_cast<std::size_t>(n));
  double residual = 0.0;
  for (int iter = 0; iter < max_iters; ++iter) {
    for (int i = 0; i < n; ++i) {
      double acc = shift * x[static_cast<std::size_t>(i)];
      const double* row = adjacency.data() + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) acc += row[j] * x[static_cast<std::size_t>(j)];
      y[static_cast<std::size_t>(i)] = acc;
    }
    double norm = 0.0;
    for (double v : y) norm += v * v;
    norm = std::sqrt(norm);
    residual = 0.0;
    for (int i = 0; i < n; ++i) {
      y[static_cast<std::size_t>(i)] /= norm;
      residual = std::max(residual, std::abs(y[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(i)]));
    }
    x.swap(y);
    if (residual < tol) {
      double quad = 0.0;
      for (int i = 0; i < n; ++i) {
        const double* row = adjacency.data() + static_cast<std::size_t>(i) * n;
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += row[j] * x[static_cast<std::size_t>(j)];
        quad += x[static_cast<std::size_t>(i)] * acc;
      }
      return quad;
    }
  }
  std::ostringstream os;
  os << "dominant_eigenvalue: power iteration did not converge after " << max_iters
     << " iterations (residual " << residual << ")";
  throw std::runtime_error(os.str());
}

int neighbor_count(const DynamicGeometricGraph& g, int node_index) {
  int count = 0;
  for (int j = 0; j < g.size(); ++j)
    if (g.at(node_index, j) > 0.0) ++count;
  return count;
}

double closeness_centrality(const DynamicGeometricGraph& g, int node_index) {
  int count = 0;
  double sum = 0.0;
  for (int j = 0; j < g.size(); ++j) {
    const double d = g.at(node_index, j);
    if (d > 0.0) {
      ++count;
      sum += d;
    }
  }
  if (count == 0 || sum == 0.0) return 0.0;
  return (count - 1) / sum;
}

std::vector<double> eigenvector_centrality(const DynamicGeometricGraph& g) {
  const int n = g.size();
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  const double lambda = dominant_eigenvalue(g.adjacency, n);
  if (lambda == 0.0) return out;
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int j = 0; j < n; ++j) sum += g.at(i, j);
    out[static_cast<std::size_t>(i)] = sum / lambda;
  }
  return out;
}

std::vector<double> degree_centrality_series(
    const std::vector<DynamicGeometricGraph>& frames, int node_id) {
  std::vector<double> out;
  out.reserve(frames.size());
  double running = 0.0;
  for (const DynamicGeometricGraph& g : frames) {
    const int idx = g.index_of(node_id);
    if (idx >= 0) running += neighbor_count(g, idx);
    out.push_back(running);
  }
  return out;
}

std::vector<std::vector<Vec3>> centrality_series(
    const std::vector<DynamicGeometricGraph>& frames, const std::vector<int>& agent_ids) {
  const std::size_t n_agents = agent_ids.size();
  const std::size_t n_frames = frames.size();
  std::vector<std::vector<Vec3>> out(n_agents, std::vector<Vec3>(n_frames, Vec3{0.0, 0.0, 0.0}));
  std::vector<double> running(n_agents, 0.0);
  for (std::size_t t = 0; t < n_frames; ++t) {
    const DynamicGeometricGraph& g = frames[t];
    const std::vector<double> eig = eigenvector_centrality(g);
    for (std::size_t a = 0; a < n_agents; ++a) {
      const int idx = g.index_of(agent_ids[a]);
      if (idx >= 0) {
        running[a] += neighbor_count(g, idx);
        out[a][t] = {running[a], closeness_centrality(g, idx), eig[static_cast<std::size_t>(idx)]};
      } else {
        out[a][t] = {running[a], 0.0, 0.0};
      }
    }
  }
  return out;
}

std::vector<Vec3> ble(const std::vector<Vec3>& centrality, double dt) {
  if (dt <= 0.0) throw std::invalid_argument("ble: dt must be positive");
  std::vector<Vec3> out(centrality.size(), Vec3{0.0, 0.0, 0.0});
  for (std::size_t t = 1; t < centrality.size(); ++t)
    for (int c = 0; c < 3; ++c)
      out[t][static_cast<std::size_t>(c)] =
          std::abs(centrality[t][static_cast<std::size_t>(c)] -
                   centrality[t - 1][static_cast<std::size_t>(c)]) / dt;
  return out;
}

std::vector<Vec3> bie(const std::vector<Vec3>& ble_series, double dt) {
  if (dt <= 0.0) throw std::invalid_argument("bie: dt must be positive");
  std::vector<Vec3> out(ble_series.size(), Vec3{0.0, 0.0, 0.0});
  for (std::size_t t = 2; t < ble_series.size(); ++t)
    for (int c = 0; c < 3; ++c)
      out[t][static_cast<std::size_t>(c)] =
          std::abs(ble_series[t][static_cast<std::size_t>(c)] -
                   ble_series[t - 1][static_cast<std::size_t>(c)]) / dt;
  return out;
}

BehaviorSeries behavior_features(const Scene& scene, double r, double dt) {
  const std::size_t n_frames = scene.ego_history.size();
  if (n_frames < 3)
    throw std::invalid_argument("behavior_features: scene needs at least 3 history frames");

  constexpr int kEgoId = -1;  // scene neighbor ids are nonnegative
  std::vector<int> agent_ids;
  agent_ids.push_back(kEgoId);
  for (const NeighborTrack& nb : scene.neighbors) agent_ids.push_back(nb.id);

  std::vector<DynamicGeometricGraph> frames;
  frames.reserve(n_frames);
  for (std::size_t t = 0; t < n_frames; ++t) {
    std::vector<CartPoint> positions;
    std::vector<int> ids;
    positions.push_back(scene.ego_history[t]);
    ids.push_back(kEgoId);
    for (const NeighborTrack& nb : scene.neighbors) {
      if (t < nb.present.size() && nb.present[t]) {
        positions.push_back(nb.positions[t]);
        ids.push_back(nb.id);
      }
    }
    frames.push_back(build_graph(positions, ids, r));
  }

  const auto centralities = centrality_series(frames, agent_ids);

  BehaviorSeries series;
  series.agent_ids = agent_ids;
  series.features.resize(agent_ids.size());
  for (std::size_t a = 0; a < agent_ids.size(); ++a) {
    const std::vector<Vec3> likelihood = ble(centralities[a], dt);
    const std::vector<Vec3> intensity = bie(likelihood, dt);
    series.features[a].resize(n_frames);
    for (std::size_t t = 0; t < n_frames; ++t)
      series.features[a][t] = {likelihood[t][0], likelihood[t][1], likelihood[t][2],
                               intensity[t][0], intensity[t][1], intensity[t][2]};
  }
  return series;
}

void export_behavior_csv(const BehaviorSeries& series, std::ostream& os) {
  os << "agent_id,frame,ble_degree,ble_closeness,ble_eigenvector,"
        "bie_degree,bie_closeness,bie_eigenvector\n";
  os.precision(17);
  for (std::size_t a = 0; a < series.agent_ids.size(); ++a)
    for (std::size_t t = 0; t < series.features[a].size(); ++t) {
      os << series.agent_ids[a] << ',' << t;
      for (double v : series.features[a][t]) os << ',' << v;
      os << '\n';
    }
}

}  // namespace bat::graph
