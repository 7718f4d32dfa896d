#include "bat/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace bat::harness {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Step index of the k-second mark (1-based seconds), or -1 when beyond t_f.
int horizon_step(int k, double dt, int future_steps) {
  const int step = static_cast<int>(std::lround(static_cast<double>(k) / dt)) - 1;
  return step < future_steps ? step : -1;
}

CartPoint mode_point(const model::MultimodalPrediction& pred, int maneuver, int step) {
  const model::GaussianParams& g =
      pred.trajectories[static_cast<std::size_t>(maneuver)][static_cast<std::size_t>(step)];
  return polar_to_cart({g.mu_rho, g.mu_theta}, {});
}

CartPoint predicted_point(const model::MultimodalPrediction& pred, int step,
                          bool weighted) {
  if (!weighted) {
    int best = 0;
    for (int m = 1; m < kManeuverCount; ++m)
      if (pred.maneuver_probs[static_cast<std::size_t>(m)] >
          pred.maneuver_probs[static_cast<std::size_t>(best)])
        best = m;
    return mode_point(pred, best, step);
  }
  CartPoint mean;
  for (int m = 0; m < kManeuverCount; ++m) {
    const CartPoint p = mode_point(pred, m, step);
    mean.x += pred.maneuver_probs[static_cast<std::size_t>(m)] * p.x;
    mean.y += pred.maneuver_probs[static_cast<std::size_t>(m)] * p.y;
  }
  return mean;
}

}  // namespace

std::vector<CartPoint> constant_velocity_prediction(const Scene& scene, int steps) {
  if (scene.ego_history.size() < 2)
    throw std::invalid_argument("constant_velocity_prediction: history too short");
  const CartPoint& ref = scene.ego_history.back();
  const CartPoint& prev = scene.ego_history[scene.ego_history.size() - 2];
  const CartPoint v{ref.x - prev.x, ref.y - prev.y};  // per frame
  std::vector<CartPoint> pred;
  pred.reserve(static_cast<std::size_t>(steps));
  for (int k = 1; k <= steps; ++k)
    pred.push_back({ref.x + v.x * static_cast<double>(k),
                    ref.y + v.y * static_cast<double>(k)});
  return pred;
}

EvalResult evaluate(const model::BatModel& model, const std::vector<Scene>& scenes,
                    const std::string& mode) {
  if (mode != "best" && mode != "weighted")
    throw std::invalid_argument("evaluate: rmse_mode must be best or weighted");
  const bool weighted = mode == "weighted";
  const double dt = model.config().dt;
  const int future_steps = model.config().future_steps();

  EvalResult result;
  result.n_scenes = scenes.size();
  std::array<double, 5> model_sq{};
  std::array<double, 5> baseline_sq{};
  for (const Scene& scene : scenes) {
    const model::PolarScene polar = model::preprocess(scene, model.config());
    const model::MultimodalPrediction pred = model.predict(polar);
    const std::vector<CartPoint> cv =
        constant_velocity_prediction(scene, future_steps);
    for (int k = 1; k <= 5; ++k) {
      const int step = horizon_step(k, dt, future_steps);
      if (step < 0) continue;
      const CartPoint got = predicted_point(pred, step, weighted);
      const CartPoint& want = polar.ego_future_cart[static_cast<std::size_t>(step)];
      const double dx = got.x - want.x;
      const double dy = got.y - want.y;
      model_sq[static_cast<std::size_t>(k - 1)] += dx * dx + dy * dy;
      const CartPoint& cv_got = cv[static_cast<std::size_t>(step)];
      const CartPoint& cv_want = scene.ego_future[static_cast<std::size_t>(step)];
      const double bx = cv_got.x - cv_want.x;
      const double by = cv_got.y - cv_want.y;
      baseline_sq[static_cast<std::size_t>(k - 1)] += bx * bx + by * by;
    }
  }
  for (std::size_t h = 0; h < 5; ++h) {
    const int step = horizon_step(static_cast<int>(h) + 1, dt, future_steps);
    if (step < 0 || scenes.empty()) {
      result.model_rmse[h] = kNaN;
      result.baseline_rmse[h] = kNaN;
    } else {
      result.model_rmse[h] =
          std::sqrt(model_sq[h] / static_cast<double>(scenes.size()));
      result.baseline_rmse[h] =
          std::sqrt(baseline_sq[h] / static_cast<double>(scenes.size()));
    }
  }
  return result;
}

void write_rmse_csv(const std::string& path,
                    const std::vector<std::pair<std::string, EvalResult>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out.precision(10);
  out << "split,n,model_1s,model_2s,model_3s,model_4s,model_5s,"
         "cv_1s,cv_2s,cv_3s,cv_4s,cv_5s\n";
  for (const auto& [name, r] : rows) {
    out << name << ',' << r.n_scenes;
    for (double v : r.model_rmse) out << ',' << v;
    for (double v : r.baseline_rmse) out << ',' << v;
    out << '\n';
  }
}

GridSpec auto_grid(const model::MultimodalPrediction& pred, int step,
                   double sigmas, int resolution) {
  double half = 1.0;
  for (int m = 0; m < kManeuverCount; ++m) {
    const auto& traj = pred.trajectories[static_cast<std::size_t>(m)];
    if (step < 0 || static_cast<std::size_t>(step) >= traj.size())
      throw std::out_of_range("auto_grid: step outside the prediction");
    const model::GaussianParams& g = traj[static_cast<std::size_t>(step)];
    const double radial = sigmas * g.sigma_rho;
    const double angular = sigmas * g.sigma_theta;
    double extent;
    if (angular >= M_PI / 2.0 || g.mu_rho - radial <= 0.0) {
      // wide angular spread covers a ring around the origin
      extent = std::abs(g.mu_rho) + radial + 0.5;
    } else {
      const CartPoint c = polar_to_cart({g.mu_rho, g.mu_theta}, {});
      extent = std::max(std::abs(c.x), std::abs(c.y)) + radial +
               (g.mu_rho + radial) * angular + 0.5;
    }
    half = std::max(half, extent);
  }
  GridSpec grid;
  grid.x_min = -half;
  grid.x_max = half;
  grid.y_min = -half;
  grid.y_max = half;
  grid.nx = resolution;
  grid.ny = resolution;
  return grid;
}

std::vector<double> density_grid(const model::MultimodalPrediction& pred,
                                 int step, const GridSpec& grid) {
  if (grid.nx < 1 || grid.ny < 1 || !(grid.x_max > grid.x_min) ||
      !(grid.y_max > grid.y_min))
    throw std::invalid_argument("density_grid: degenerate grid");
  const double dx = (grid.x_max - grid.x_min) / grid.nx;
  const double dy = (grid.y_max - grid.y_min) / grid.ny;
  std::vector<double> density(static_cast<std::size_t>(grid.nx) *
                              static_cast<std::size_t>(grid.ny));
  for (int j = 0; j < grid.ny; ++j) {
    const double y = grid.y_min + (static_cast<double>(j) + 0.5) * dy;
    for (int i = 0; i < grid.nx; ++i) {
      const double x = grid.x_min + (static_cast<double>(i) + 0.5) * dx;
      const PolarPoint p = cart_to_polar({x, y}, {});
      double value = 0.0;
      if (p.rho > 1e-9)
        value = model::mixture_density(pred, p, step) / p.rho;
      density[static_cast<std::size_t>(j) * static_cast<std::size_t>(grid.nx) +
              static_cast<std::size_t>(i)] = value;
    }
  }
  return density;
}

double grid_mass(const std::vector<double>& density, const GridSpec& grid) {
  double sum = 0.0;
  for (double d : density) sum += d;
  return sum * grid.cell_area();
}

void write_pgm(const std::vector<double>& density, const GridSpec& grid,
               const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  double peak = 0.0;
  for (double d : density) peak = std::max(peak, d);
  out << "P2\n" << grid.nx << ' ' << grid.ny << "\n65535\n";
  // image rows run from y_max downward
  for (int j = grid.ny - 1; j >= 0; --j) {
    for (int i = 0; i < grid.nx; ++i) {
      const double d = density[static_cast<std::size_t>(j) *
                                   static_cast<std::size_t>(grid.nx) +
                               static_cast<std::size_t>(i)];
      const int v = peak > 0.0 ? static_cast<int>(std::lround(d / peak * 65535.0)) : 0;
      out << v << (i + 1 == grid.nx ? '\n' : ' ');
    }
  }
}

void write_density_csv(const std::vector<double>& density, const GridSpec& grid,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out.precision(10);
  out << "x,y,density\n";
  const double dx = (grid.x_max - grid.x_min) / grid.nx;
  const double dy = (grid.y_max - grid.y_min) / grid.ny;
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i)
      out << grid.x_min + (static_cast<double>(i) + 0.5) * dx << ','
          << grid.y_min + (static_cast<double>(j) + 0.5) * dy << ','
          << density[static_cast<std::size_t>(j) * static_cast<std::size_t>(grid.nx) +
                     static_cast<std::size_t>(i)]
          << '\n';
}

}  // namespace bat::harness
