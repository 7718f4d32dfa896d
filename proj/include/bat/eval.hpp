#pragma once
// Horizon RMSE tables with the constant-velocity baseline, and mixture
// density heatmap export.

#include <array>
#include <string>
#include <vector>

#include "bat/model.hpp"
#include "bat/scene.hpp"

namespace bat::harness {

// Last-observed-velocity extrapolation in the world frame.
std::vector<CartPoint> constant_velocity_prediction(const Scene& scene, int steps);

struct EvalResult {
  std::array<double, 5> model_rmse{};     // horizons 1..5 s; NaN beyond t_f
  std::array<double, 5> baseline_rmse{};  // constant-velocity column
  std::size_t n_scenes = 0;
};

// mode: "best" uses the highest-probability maneuver's means, "weighted" the
// probability-weighted mean point across all nine maneuvers.
EvalResult evaluate(const model::BatModel& model, const std::vector<Scene>& scenes,
                    const std::string& mode);

// Fixed schema: split,n,model_1s..model_5s,cv_1s..cv_5s (NaN printed as nan).
void write_rmse_csv(const std::string& path,
                    const std::vector<std::pair<std::string, EvalResult>>& rows);

struct GridSpec {
  double x_min = -1.0;
  double x_max = 1.0;
  double y_min = -1.0;
  double y_max = 1.0;
  int nx = 150;
  int ny = 150;

  double cell_area() const {
    return (x_max - x_min) / nx * ((y_max - y_min) / ny);
  }
};

// Square grid covering every mode of `step` out to `sigmas` standard
// deviations (canonical Cartesian frame).
GridSpec auto_grid(const model::MultimodalPrediction& pred, int step,
                   double sigmas, int resolution);

// Mixture density at each cell center: polar density times the 1/rho
// Jacobian of the Cartesian map. Row-major, ny rows from y_min upward.
std::vector<double> density_grid(const model::MultimodalPrediction& pred,
                                 int step, const GridSpec& grid);

double grid_mass(const std::vector<double>& density, const GridSpec& grid);

void write_pgm(const std::vector<double>& density, const GridSpec& grid,
               const std::string& path);
void write_density_csv(const std::vector<double>& density, const GridSpec& grid,
                       const std::string& path);

}  // namespace bat::harness
