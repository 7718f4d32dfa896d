#pragma once

#include <cstddef>
#include <vector>

namespace bat {

// Lateral (x) / longitudinal (y) position in meters. Feet never appear past
// the ingestion boundary.
struct CartPoint {
  double x = 0.0;
  double y = 0.0;
};

// rho >= 0 meters, theta in (-pi, pi] radians measured from the x axis,
// counterclockwise positive.
struct PolarPoint {
  double rho = 0.0;
  double theta = 0.0;
};

// Reference frame anchored at the ego position at the reference time.
struct Frame {
  CartPoint origin;
};

// Full-quadrant polar transform. The origin itself maps to (0, 0).
PolarPoint cart_to_polar(const CartPoint& p, const Frame& frame);

// Exact inverse of cart_to_polar up to floating tolerance.
CartPoint polar_to_cart(const PolarPoint& p, const Frame& frame);

// Rotation about (0, 0) by angle radians, counterclockwise.
CartPoint rotate(const CartPoint& p, double angle);

double distance(const CartPoint& a, const CartPoint& b);

// Re-expresses every agent's every frame relative to the ego position at
// ref_index. Histories may be ragged; the ego history must cover ref_index.
// Throws std::invalid_argument when it does not.
std::vector<std::vector<PolarPoint>> to_ego_frame(
    const std::vector<std::vector<CartPoint>>& histories, std::size_t ego_index,
    std::size_t ref_index);

}  // namespace bat
