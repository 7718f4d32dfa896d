#pragma once

#include <string>
#include <vector>

#include "bat/geometry.hpp"

namespace bat {

enum class Lateral { left, keep, right };
enum class Longitudinal { accelerate, maintain, brake };

// One of nine joint maneuver classes: 3 lateral x 3 longitudinal.
struct ManeuverClass {
  Lateral lateral = Lateral::keep;
  Longitudinal longitudinal = Longitudinal::maintain;
};

constexpr int kManeuverCount = 9;

inline int joint_index(const ManeuverClass& m) {
  return 3 * static_cast<int>(m.lateral) + static_cast<int>(m.longitudinal);
}

inline ManeuverClass maneuver_from_index(int joint) {
  return {static_cast<Lateral>(joint / 3), static_cast<Longitudinal>(joint % 3)};
}

std::string to_string(Lateral lat);
std::string to_string(Longitudinal lon);
std::string to_string(const ManeuverClass& m);

enum class SplitTag { keep, merge, left, right };

std::string to_string(SplitTag tag);

// Neighbor positions aligned frame-for-frame with the ego history. Agents may
// enter the window late; present[k] marks frames with a real observation.
struct NeighborTrack {
  int id = 0;
  std::vector<CartPoint> positions;
  std::vector<bool> present;
};

// One training/evaluation sample. The reference time is the last history
// frame; ego_future holds the frames after it.
struct Scene {
  std::vector<CartPoint> ego_history;
  std::vector<CartPoint> ego_future;
  std::vector<NeighborTrack> neighbors;
  ManeuverClass maneuver_label;
  SplitTag split_tag = SplitTag::keep;
  int ego_lane_at_ref = 0;
  double dt = 0.2;
};

}  // namespace bat
