#include "bat/scene.hpp"

namespace bat {

std::string to_string(Lateral lat) {
  switch (lat) {
    case Lateral::left: return "left";
    case Lateral::keep: return "keep";
    case Lateral::right: return "right";
  }
  return "keep";
}

std::string to_string(Longitudinal lon) {
  switch (lon) {
    case Longitudinal::accelerate: return "accelerate";
    case Longitudinal::maintain: return "maintain";
    case Longitudinal::brake: return "brake";
  }
  return "maintain";
}

std::string to_string(const ManeuverClass& m) {
  return to_string(m.lateral) + "/" + to_string(m.longitudinal);
}

std::string to_string(SplitTag tag) {
  switch (tag) {
    case SplitTag::keep: return "keep";
    case SplitTag::merge: return "merge";
    case SplitTag::left: return "left";
    case SplitTag::right: return "right";
  }
  return "keep";
}

}  // namespace bat
