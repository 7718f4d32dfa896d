#pragma once
// Dataset ingestion, scene windowing, maneuver labeling, synthetic
// generation, splits, and the binary scene cache.

#include <array>
#include <string>
#include <vector>

#include "bat/scene.hpp"

namespace bat::data {

// One contiguous run of frames for a vehicle (gap-split at ingestion).
struct TrackSegment {
  int vehicle_id = 0;
  long first_frame = 0;
  std::vector<CartPoint> points;
  std::vector<int> lanes;  // -1 when the source has no lane column
};

struct TrackTable {
  double dt = 0.2;  // source frame spacing in seconds
  std::vector<TrackSegment> segments;
};

// Header names for the required and optional CSV columns.
struct ColumnMap {
  std::string vehicle_id = "vehicle_id";
  std::string frame = "frame";
  std::string x = "x";
  std::string y = "y";
  std::string lane_id = "lane_id";  // empty string disables lane reading
};

enum class Unit { meters, feet };

// Reads a header-bearing CSV into a unit-normalized, gap-split table.
// Throws std::runtime_error naming the file, line, and problem.
TrackTable ingest_csv(const std::string& path, const ColumnMap& columns,
                      Unit unit, double dt);

// Re-exports a table with enough precision to round-trip ingestion.
void export_tracks_csv(const TrackTable& table, const std::string& path);

struct WindowSpec {
  double t_h = 3.0;
  double t_f = 5.0;
  double dt = 0.2;               // internal sampling; source striding must be integral
  double capture_radius = 15.24; // neighbor capture at the reference frame (2r)
  std::vector<int> merge_lanes;  // lane ids tagged as on-ramp merges
};

// Sliding windows per vehicle-as-ego; incomplete windows are skipped.
std::vector<Scene> window_scenes(const TrackTable& table, const WindowSpec& spec);

// Joint maneuver label. Lane ids < 0 fall back to lateral displacement in
// the ego heading frame (beyond +-1.75 m); smaller lane id means left.
ManeuverClass label_maneuver(const Scene& scene, int lane_at_ref = -1,
                             int lane_at_end = -1);

enum class SynthKind { constant_velocity, lane_change, roundabout_arc };

struct SynthSpec {
  SynthKind kind = SynthKind::lane_change;
  int n_scenes = 100;
  double noise_sigma = 0.0;  // additive position noise in meters
  double t_h = 3.0;
  double t_f = 5.0;
  double dt = 0.2;
  unsigned long long seed = 1;
};

// Deterministic synthetic scenes; labels come from the generator template
// and match label_maneuver on the noise-free trajectories.
std::vector<Scene> synth_generate(const SynthSpec& spec);

// Mixed lane-change + roundabout corpus used by the evaluation harness.
std::vector<Scene> synth_corpus(int n_scenes, double noise_sigma,
                                unsigned long long seed, double t_h,
                                double t_f, double dt);

struct DatasetSplit {
  std::vector<Scene> train;
  std::vector<Scene> val;
  std::vector<Scene> test;
  // test partitioned by split tag (filled in maneuver_based mode)
  std::array<std::vector<Scene>, 4> test_by_tag;
};

enum class SplitMode { overall, maneuver_based };

DatasetSplit split_dataset(std::vector<Scene> scenes,
                           const std::array<double, 3>& fractions,
                           SplitMode mode, unsigned long long seed);

// Seeded subsample without replacement (reduced-data protocol).
std::vector<Scene> subsample(const std::vector<Scene>& scenes, double fraction,
                             unsigned long long seed);

// Versioned little-endian binary cache ("BATS" magic).
void save_scene_cache(const std::vector<Scene>& scenes, const std::string& path);
std::vector<Scene> load_scene_cache(const std::string& path);

}  // namespace bat::data
