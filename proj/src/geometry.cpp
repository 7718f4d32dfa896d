#include "bat/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace bat {

PolarPoint cart_to_polar(const CartPoint& p, const Frame& frame) {
  const double dx = p.x - frame.origin.x;
  const double dy = p.y - frame.origin.y;
  const double rho = std::hypot(dx, dy);
  if (rho == 0.0) return {0.0, 0.0};
  double theta = std::atan2(dy, dx);
  if (theta <= -M_PI) theta = M_PI;  // atan2 yields [-pi, pi]; we use (-pi, pi]
  return {rho, theta};
}

CartPoint polar_to_cart(const PolarPoint& p, const Frame& frame) {
  return {frame.origin.x + p.rho * std::cos(p.theta),
          frame.origin.y + p.rho * std::sin(p.theta)};
}

CartPoint rotate(const CartPoint& p, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

double distance(const CartPoint& a, const CartPoint& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

std::vector<std::vector<PolarPoint>> to_ego_frame(
    const std::vector<std::vector<CartPoint>>& histories, std::size_t ego_index,
    std::size_t ref_index) {
  if (ego_index >= histories.size() ||
      ref_index >= histories[ego_index].size()) {
    throw std::invalid_argument(
        "to_ego_frame: ego history has no point at the reference index");
  }
  const Frame frame{histories[ego_index][ref_index]};
  std::vector<std::vector<PolarPoint>> out(histories.size());
  for (std::size_t a = 0; a < histories.size(); ++a) {
    out[a].reserve(histories[a].size());
    for (const CartPoint& p : histories[a]) out[a].push_back(cart_to_polar(p, frame));
  }
  return out;
}

}  // namespace bat
