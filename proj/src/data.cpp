#include "bat/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "bat/rng.hpp"

namespace bat::data {
namespace {

constexpr double kFeetToMeters = 0.3048;
constexpr double kLaneWidth = 3.5;
constexpr double kLateralThreshold = 1.75;

[[noreturn]] void fail(const std::string& message) {
  throw std::runtime_error(message);
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

struct RawRow {
  int vehicle_id;
  long frame;
  double x;
  double y;
  int lane;
  long line_no;
};

double path_speed(const std::vector<CartPoint>& points, double dt,
                  const CartPoint* prepend) {
  double length = 0.0;
  int hops = 0;
  const CartPoint* prev = prepend;
  for (const CartPoint& p : points) {
    if (prev != nullptr) {
      length += distance(*prev, p);
      ++hops;
    }
    prev = &p;
  }
  if (hops == 0) return 0.0;
  return length / (static_cast<double>(hops) * dt);
}

// Heading angle from the most recent nonzero displacement in the history;
// NaN when the whole history is stationary.
double history_heading(const std::vector<CartPoint>& history) {
  for (std::size_t i = history.size(); i >= 2; --i) {
    const CartPoint& b = history[i - 1];
    const CartPoint& a = history[i - 2];
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    if (std::sqrt(dx * dx + dy * dy) >= 1e-12) return std::atan2(dy, dx);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

TrackTable ingest_csv(const std::string& path, const ColumnMap& columns,
                      Unit unit, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("ingest_csv: dt must be positive");
  std::ifstream in(path);
  if (!in) fail(path + ": cannot open file");

  std::string line;
  if (!std::getline(in, line)) fail(path + ": empty file");
  const std::vector<std::string> header = split_csv_line(line);
  auto column_index = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) fail(path + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t idx_vehicle = column_index(columns.vehicle_id);
  const std::size_t idx_frame = column_index(columns.frame);
  const std::size_t idx_x = column_index(columns.x);
  const std::size_t idx_y = column_index(columns.y);
  bool has_lane = false;
  std::size_t idx_lane = 0;
  if (!columns.lane_id.empty()) {
    const auto it = std::find(header.begin(), header.end(), columns.lane_id);
    if (it != header.end()) {
      has_lane = true;
      idx_lane = static_cast<std::size_t>(it - header.begin());
    }
  }

  const double scale = unit == Unit::feet ? kFeetToMeters : 1.0;
  std::vector<RawRow> rows;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    const std::size_t needed =
        std::max({idx_vehicle, idx_frame, idx_x, idx_y, has_lane ? idx_lane : 0});
    if (fields.size() <= needed)
      fail(path + ":" + std::to_string(line_no) + ": unparseable row (too few fields)");
    RawRow row{};
    row.line_no = line_no;
    try {
      row.vehicle_id = std::stoi(fields[idx_vehicle]);
      row.frame = std::stol(fields[idx_frame]);
      row.x = std::stod(fields[idx_x]) * scale;
      row.y = std::stod(fields[idx_y]) * scale;
      row.lane = has_lane && !fields[idx_lane].empty() ? std::stoi(fields[idx_lane]) : -1;
    } catch (const std::exception&) {
      fail(path + ":" + std::to_string(line_no) + ": unparseable row");
    }
    rows.push_back(row);
  }
  if (rows.empty()) fail(path + ": no data rows");

  std::stable_sort(rows.begin(), rows.end(), [](const RawRow& a, const RawRow& b) {
    if (a.vehicle_id != b.vehicle_id) return a.vehicle_id < b.vehicle_id;
    return a.frame < b.frame;
  });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].vehicle_id == rows[i - 1].vehicle_id && rows[i].frame == rows[i - 1].frame)
      fail(path + ":" + std::to_string(rows[i].line_no) + ": duplicate (vehicle " +
           std::to_string(rows[i].vehicle_id) + ", frame " +
           std::to_string(rows[i].frame) + ")");
  }

  TrackTable table;
  table.dt = dt;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const bool fresh = i == 0 || rows[i].vehicle_id != rows[i - 1].vehicle_id ||
                       rows[i].frame != rows[i - 1].frame + 1;
    if (fresh) {
      TrackSegment seg;
      seg.vehicle_id = rows[i].vehicle_id;
      seg.first_frame = rows[i].frame;
      table.segments.push_back(seg);
    }
    table.segments.back().points.push_back({rows[i].x, rows[i].y});
    table.segments.back().lanes.push_back(rows[i].lane);
  }
  return table;
}

void export_tracks_csv(const TrackTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(path + ": cannot open file for writing");
  out.precision(17);
  out << "vehicle_id,frame,x,y,lane_id\n";
  for (const TrackSegment& seg : table.segments)
    for (std::size_t k = 0; k < seg.points.size(); ++k)
      out << seg.vehicle_id << ',' << seg.first_frame + static_cast<long>(k) << ','
          << seg.points[k].x << ',' << seg.points[k].y << ',' << seg.lanes[k] << '\n';
}

std::vector<Scene> window_scenes(const TrackTable& table, const WindowSpec& spec) {
  const double ratio = spec.dt / table.dt;
  const long stride = std::lround(ratio);
  if (stride < 1 || std::abs(static_cast<double>(stride) * table.dt - spec.dt) > 1e-9)
    throw std::invalid_argument(
        "window_scenes: spec.dt must be an integer multiple of table.dt");
  const int n_hist = static_cast<int>(std::lround(spec.t_h / spec.dt));
  const int n_fut = static_cast<int>(std::lround(spec.t_f / spec.dt));
  if (n_hist < 2 || n_fut < 1)
    throw std::invalid_argument("window_scenes: window too short");

  auto is_merge_lane = [&](int lane) {
    return lane >= 0 && std::find(spec.merge_lanes.begin(), spec.merge_lanes.end(),
                                  lane) != spec.merge_lanes.end();
  };

  std::vector<Scene> scenes;
  for (std::size_t ego_idx = 0; ego_idx < table.segments.size(); ++ego_idx) {
    const TrackSegment& ego = table.segments[ego_idx];
    const long ds_len = (static_cast<long>(ego.points.size()) - 1) / stride + 1;
    for (long anchor = n_hist - 1; anchor + n_fut < ds_len; ++anchor) {
      Scene scene;
      scene.dt = spec.dt;
      for (long k = anchor - (n_hist - 1); k <= anchor; ++k)
        scene.ego_history.push_back(ego.points[static_cast<std::size_t>(k * stride)]);
      for (long k = anchor + 1; k <= anchor + n_fut; ++k)
        scene.ego_future.push_back(ego.points[static_cast<std::size_t>(k * stride)]);

      const long ref_frame = ego.first_frame + anchor * stride;
      const CartPoint ref = scene.ego_history.back();

      // collect neighbors by vehicle id so gap-split segments merge cleanly
      std::map<int, NeighborTrack> by_id;
      for (const TrackSegment& nb : table.segments) {
        if (nb.vehicle_id == ego.vehicle_id) continue;
        const long at_ref = ref_frame - nb.first_frame;
        if (at_ref < 0 || at_ref >= static_cast<long>(nb.points.size())) continue;
        if (distance(nb.points[static_cast<std::size_t>(at_ref)], ref) >
            spec.capture_radius)
          continue;
        NeighborTrack& track = by_id[nb.vehicle_id];
        if (track.positions.empty()) {
          track.id = nb.vehicle_id;
          track.positions.assign(static_cast<std::size_t>(n_hist), CartPoint{});
          track.present.assign(static_cast<std::size_t>(n_hist), false);
        }
        for (int k = 0; k < n_hist; ++k) {
          const long frame = ref_frame - static_cast<long>(n_hist - 1 - k) * stride;
          const long off = frame - nb.first_frame;
          if (off < 0 || off >= static_cast<long>(nb.points.size())) continue;
          track.positions[static_cast<std::size_t>(k)] =
              nb.points[static_cast<std::size_t>(off)];
          track.present[static_cast<std::size_t>(k)] = true;
        }
      }
      for (auto& [id, track] : by_id) scene.neighbors.push_back(std::move(track));

      const long end_idx = (anchor + n_fut) * stride;
      const int lane_ref =
          ego.lanes.empty() ? -1 : ego.lanes[static_cast<std::size_t>(anchor * stride)];
      const int lane_end =
          ego.lanes.empty() ? -1 : ego.lanes[static_cast<std::size_t>(end_idx)];
      scene.ego_lane_at_ref = lane_ref;
      scene.maneuver_label = label_maneuver(scene, lane_ref, lane_end);
      if (is_merge_lane(lane_ref) || is_merge_lane(lane_end))
        scene.split_tag = SplitTag::merge;
      else if (scene.maneuver_label.lateral == Lateral::left)
        scene.split_tag = SplitTag::left;
      else if (scene.maneuver_label.lateral == Lateral::right)
        scene.split_tag = SplitTag::right;
      else
        scene.split_tag = SplitTag::keep;
      scenes.push_back(std::move(scene));
    }
  }
  return scenes;
}

ManeuverClass label_maneuver(const Scene& scene, int lane_at_ref, int lane_at_end) {
  if (scene.ego_future.empty() || scene.ego_history.empty())
    throw std::invalid_argument("label_maneuver: empty trajectory");
  ManeuverClass label;

  if (lane_at_ref >= 0 && lane_at_end >= 0 && lane_at_ref != lane_at_end) {
    label.lateral = lane_at_end < lane_at_ref ? Lateral::left : Lateral::right;
  } else {
    label.lateral = Lateral::keep;
    const double heading = history_heading(scene.ego_history);
    if (std::isfinite(heading)) {
      const CartPoint ref = scene.ego_history.back();
      const CartPoint disp{scene.ego_future.back().x - ref.x,
                           scene.ego_future.back().y - ref.y};
      const CartPoint canonical = rotate(disp, M_PI / 2.0 - heading);
      if (canonical.x <= -kLateralThreshold) label.lateral = Lateral::left;
      else if (canonical.x >= kLateralThreshold) label.lateral = Lateral::right;
    }
  }

  const double hist_speed = path_speed(scene.ego_history, scene.dt, nullptr);
  const double fut_speed =
      path_speed(scene.ego_future, scene.dt, &scene.ego_history.back());
  if (hist_speed < 1e-9) {
    label.longitudinal =
        fut_speed > 1e-9 ? Longitudinal::accelerate : Longitudinal::maintain;
  } else {
    const double ratio = fut_speed / hist_speed;
    if (ratio < 0.9) label.longitudinal = Longitudinal::brake;
    else if (ratio > 1.1) label.longitudinal = Longitudinal::accelerate;
    else label.longitudinal = Longitudinal::maintain;
  }
  return label;
}

namespace {

// Local template frame: the ego travels along +y, the anchor sits at y=0.
// Scenes are rotated into a random world pose afterwards.
struct TemplateScene {
  Scene scene;
  double world_angle = 0.0;
  CartPoint world_origin;

  CartPoint place(double x, double y) const {
    CartPoint w = rotate({x, y}, world_angle);
    return {w.x + world_origin.x, w.y + world_origin.y};
  }
};

void add_full_neighbor(Scene& scene, int id, std::vector<CartPoint> positions) {
  NeighborTrack track;
  track.id = id;
  track.present.assign(positions.size(), true);
  track.positions = std::move(positions);
  scene.neighbors.push_back(std::move(track));
}

Scene synth_one(SynthKind kind, double noise_sigma, double t_h, double t_f,
                double dt, uint64_t seed) {
  Rng rng(seed);
  const int n_hist = static_cast<int>(std::lround(t_h / dt));
  const int n_fut = static_cast<int>(std::lround(t_f / dt));

  TemplateScene tpl;
  tpl.scene.dt = dt;
  tpl.world_angle = rng.uniform(-M_PI, M_PI);
  tpl.world_origin = {rng.uniform(-100.0, 100.0), rng.uniform(-100.0, 100.0)};

  auto frame_time = [&](int k) { return static_cast<double>(k - (n_hist - 1)) * dt; };
  auto future_time = [&](int k) { return static_cast<double>(k + 1) * dt; };

  Scene& scene = tpl.scene;
  if (kind == SynthKind::roundabout_arc) {
    const double radius = rng.uniform(15.0, 25.0);
    const double speed = rng.uniform(4.0, 9.0);
    const double omega = speed / radius;
    const double dir = rng.uniform() < 0.5 ? 1.0 : -1.0;
    const double phi0 = rng.uniform(-M_PI, M_PI);
    // circle center placed so the template origin lies on the circle
    const CartPoint center{-radius * std::cos(phi0), -radius * std::sin(phi0)};
    auto on_circle = [&](double extra_r, double phase, double t) {
      const double phi = phi0 + dir * omega * t + phase;
      return tpl.place(center.x + (radius + extra_r) * std::cos(phi),
                       center.y + (radius + extra_r) * std::sin(phi));
    };
    for (int k = 0; k < n_hist; ++k)
      scene.ego_history.push_back(on_circle(0.0, 0.0, frame_time(k)));
    for (int k = 0; k < n_fut; ++k)
      scene.ego_future.push_back(on_circle(0.0, 0.0, future_time(k)));
    const double ahead_arc = rng.uniform(5.0, 10.0);
    std::vector<CartPoint> ahead, outer;
    for (int k = 0; k < n_hist; ++k) {
      ahead.push_back(on_circle(0.0, dir * ahead_arc / radius, frame_time(k)));
      outer.push_back(on_circle(kLaneWidth, 0.0, frame_time(k)));
    }
    add_full_neighbor(scene, 1, std::move(ahead));
    add_full_neighbor(scene, 2, std::move(outer));
  } else {
    const double speed = rng.uniform(4.0, 12.0);
    auto straight = [&](double x, double y0, double t) {
      return tpl.place(x, y0 + speed * t);
    };
    for (int k = 0; k < n_hist; ++k)
      scene.ego_history.push_back(straight(0.0, 0.0, frame_time(k)));

    if (kind == SynthKind::constant_velocity) {
      for (int k = 0; k < n_fut; ++k)
        scene.ego_future.push_back(straight(0.0, 0.0, future_time(k)));
      const double lead_gap = rng.uniform(5.0, 12.0);
      const double rear_gap = rng.uniform(6.0, 12.0);
      const double side = rng.uniform() < 0.5 ? -kLaneWidth : kLaneWidth;
      const double side_y = rng.uniform(-5.0, 5.0);
      std::vector<CartPoint> lead, rear, adjacent;
      for (int k = 0; k < n_hist; ++k) {
        lead.push_back(straight(0.0, lead_gap, frame_time(k)));
        rear.push_back(straight(0.0, -rear_gap, frame_time(k)));
        adjacent.push_back(straight(side, side_y, frame_time(k)));
      }
      add_full_neighbor(scene, 1, std::move(lead));
      add_full_neighbor(scene, 2, std::move(rear));
      add_full_neighbor(scene, 3, std::move(adjacent));
    } else {
      // lane_change kind: the neighbor configuration decides the future
      const double branch = rng.uniform();
      if (branch < 0.4) {
        // slow leader closing in; the ego changes lanes at full speed
        const double side = rng.uniform() < 0.5 ? -1.0 : 1.0;
        const double gap0 = rng.uniform(4.5, 7.0);
        const double slower = rng.uniform(0.5, 1.5);
        for (int k = 0; k < n_fut; ++k) {
          const double t = future_time(k);
          const double ramp = std::min(t, 4.0);
          const double lateral =
              side * kLaneWidth * 0.5 * (1.0 - std::cos(M_PI * ramp / 4.0));
          scene.ego_future.push_back(straight(lateral, 0.0, t));
        }
        std::vector<CartPoint> lead;
        for (int k = 0; k < n_hist; ++k) {
          const double t = frame_time(k);
          lead.push_back(straight(0.0, gap0 - slower * t - speed * t, t));
        }
        add_full_neighbor(scene, 1, std::move(lead));
      } else if (branch < 0.7) {
        // oscillating close leader; the ego stays in lane and brakes
        const double gap0 = rng.uniform(5.0, 7.0);
        const double amp = rng.uniform(0.5, 1.0);
        const double period = rng.uniform(1.5, 2.5);
        const double keep_speed = rng.uniform(0.5, 0.8);
        for (int k = 0; k < n_fut; ++k) {
          const double t = future_time(k);
          const double y = speed * t - (1.0 - keep_speed) * speed * t * t / t_f;
          scene.ego_future.push_back(tpl.place(0.0, y));
        }
        std::vector<CartPoint> lead;
        for (int k = 0; k < n_hist; ++k) {
          const double t = frame_time(k);
          const double wobble = amp * std::sin(2.0 * M_PI * t / period);
          lead.push_back(straight(0.0, gap0 + wobble, t));
        }
        add_full_neighbor(scene, 1, std::move(lead));
      } else {
        // open road: keep lane, keep speed
        for (int k = 0; k < n_fut; ++k)
          scene.ego_future.push_back(straight(0.0, 0.0, future_time(k)));
      }
      // far distractors: outside the graph threshold, inside capture range
      const int n_distractors = rng.uniform_int(1, 2);
      for (int d = 0; d < n_distractors; ++d) {
        const double side = rng.uniform() < 0.5 ? -kLaneWidth : kLaneWidth;
        const double offset =
            (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(8.0, 14.0);
        std::vector<CartPoint> track;
        for (int k = 0; k < n_hist; ++k)
          track.push_back(straight(side, offset, frame_time(k)));
        add_full_neighbor(scene, 10 + d, std::move(track));
      }
    }
  }

  scene.maneuver_label = label_maneuver(scene);
  scene.split_tag = scene.maneuver_label.lateral == Lateral::left ? SplitTag::left
                    : scene.maneuver_label.lateral == Lateral::right
                        ? SplitTag::right
                        : SplitTag::keep;
  scene.ego_lane_at_ref = -1;

  if (noise_sigma > 0.0) {
    auto jitter = [&](CartPoint& p) {
      p.x += noise_sigma * rng.gaussian();
      p.y += noise_sigma * rng.gaussian();
    };
    for (CartPoint& p : scene.ego_history) jitter(p);
    for (CartPoint& p : scene.ego_future) jitter(p);
    for (NeighborTrack& nb : scene.neighbors)
      for (CartPoint& p : nb.positions) jitter(p);
  }
  return scene;
}

}  // namespace

std::vector<Scene> synth_generate(const SynthSpec& spec) {
  if (spec.n_scenes < 0) throw std::invalid_argument("synth_generate: n_scenes < 0");
  std::vector<Scene> scenes;
  scenes.reserve(static_cast<std::size_t>(spec.n_scenes));
  for (int i = 0; i < spec.n_scenes; ++i)
    scenes.push_back(synth_one(spec.kind, spec.noise_sigma, spec.t_h, spec.t_f,
                               spec.dt, mix_seed(spec.seed, static_cast<uint64_t>(i))));
  return scenes;
}

std::vector<Scene> synth_corpus(int n_scenes, double noise_sigma,
                                unsigned long long seed, double t_h, double t_f,
                                double dt) {
  std::vector<Scene> scenes;
  scenes.reserve(static_cast<std::size_t>(n_scenes));
  for (int i = 0; i < n_scenes; ++i) {
    const uint64_t scene_seed = mix_seed(seed, static_cast<uint64_t>(i));
    Rng pick(mix_seed(scene_seed, 0x9090));
    const SynthKind kind = pick.uniform() < 0.6 ? SynthKind::lane_change
                                                : SynthKind::roundabout_arc;
    scenes.push_back(synth_one(kind, noise_sigma, t_h, t_f, dt, scene_seed));
  }
  return scenes;
}

DatasetSplit split_dataset(std::vector<Scene> scenes,
                           const std::array<double, 3>& fractions, SplitMode mode,
                           unsigned long long seed) {
  double total = 0.0;
  for (double f : fractions) {
    if (f < 0.0) throw std::invalid_argument("split_dataset: negative fraction");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("split_dataset: fractions must sum to 1");

  std::vector<std::size_t> order(scenes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  const std::size_t n = scenes.size();
  const std::size_t n_train = static_cast<std::size_t>(std::lround(fractions[0] * static_cast<double>(n)));
  std::size_t n_val = static_cast<std::size_t>(std::lround(fractions[1] * static_cast<double>(n)));
  if (n_train + n_val > n) n_val = n - n_train;

  DatasetSplit split;
  for (std::size_t i = 0; i < n; ++i) {
    Scene& scene = scenes[order[i]];
    if (i < n_train) split.train.push_back(std::move(scene));
    else if (i < n_train + n_val) split.val.push_back(std::move(scene));
    else split.test.push_back(std::move(scene));
  }
  if (split.train.empty() || split.val.empty() || split.test.empty())
    throw std::runtime_error("split_dataset: empty split");

  if (mode == SplitMode::maneuver_based)
    for (const Scene& scene : split.test)
      split.test_by_tag[static_cast<std::size_t>(scene.split_tag)].push_back(scene);
  return split;
}

std::vector<Scene> subsample(const std::vector<Scene>& scenes, double fraction,
                             unsigned long long seed) {
  if (fraction <= 0.0 || fraction > 1.0)
    throw std::invalid_argument("subsample: fraction must be in (0, 1]");
  std::vector<std::size_t> order(scenes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  const std::size_t keep = static_cast<std::size_t>(
      std::lround(fraction * static_cast<double>(scenes.size())));
  order.resize(keep);
  std::sort(order.begin(), order.end());
  std::vector<Scene> out;
  out.reserve(keep);
  for (std::size_t i : order) out.push_back(scenes[i]);
  return out;
}

namespace {

constexpr char kCacheMagic[4] = {'B', 'A', 'T', 'S'};
constexpr uint32_t kCacheVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, const std::string& path) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) fail(path + ": truncated scene cache");
  return value;
}

void write_points(std::ofstream& out, const std::vector<CartPoint>& points) {
  write_pod(out, static_cast<uint64_t>(points.size()));
  for (const CartPoint& p : points) {
    write_pod(out, p.x);
    write_pod(out, p.y);
  }
}

std::vector<CartPoint> read_points(std::ifstream& in, const std::string& path) {
  const uint64_t n = read_pod<uint64_t>(in, path);
  std::vector<CartPoint> points(n);
  for (CartPoint& p : points) {
    p.x = read_pod<double>(in, path);
    p.y = read_pod<double>(in, path);
  }
  return points;
}

}  // namespace

void save_scene_cache(const std::vector<Scene>& scenes, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path + ": cannot open file for writing");
  out.write(kCacheMagic, 4);
  write_pod(out, kCacheVersion);
  write_pod(out, static_cast<uint64_t>(scenes.size()));
  for (const Scene& scene : scenes) {
    write_pod(out, scene.dt);
    write_pod(out, static_cast<uint8_t>(scene.maneuver_label.lateral));
    write_pod(out, static_cast<uint8_t>(scene.maneuver_label.longitudinal));
    write_pod(out, static_cast<uint8_t>(scene.split_tag));
    write_pod(out, static_cast<int32_t>(scene.ego_lane_at_ref));
    write_points(out, scene.ego_history);
    write_points(out, scene.ego_future);
    write_pod(out, static_cast<uint64_t>(scene.neighbors.size()));
    for (const NeighborTrack& nb : scene.neighbors) {
      write_pod(out, static_cast<int32_t>(nb.id));
      write_pod(out, static_cast<uint64_t>(nb.positions.size()));
      for (std::size_t k = 0; k < nb.positions.size(); ++k) {
        write_pod(out, nb.positions[k].x);
        write_pod(out, nb.positions[k].y);
        write_pod(out, static_cast<uint8_t>(nb.present[k] ? 1 : 0));
      }
    }
  }
  if (!out) fail(path + ": write failed");
}

std::vector<Scene> load_scene_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path + ": cannot open file");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCacheMagic, 4) != 0)
    fail(path + ": scene cache magic mismatch");
  const uint32_t version = read_pod<uint32_t>(in, path);
  if (version != kCacheVersion)
    fail(path + ": unsupported scene cache version " + std::to_string(version));
  const uint64_t count = read_pod<uint64_t>(in, path);
  std::vector<Scene> scenes;
  scenes.reserve(count);
  for (uint64_t s = 0; s < count; ++s) {
    Scene scene;
    scene.dt = read_pod<double>(in, path);
    scene.maneuver_label.lateral = static_cast<Lateral>(read_pod<uint8_t>(in, path));
    scene.maneuver_label.longitudinal =
        static_cast<Longitudinal>(read_pod<uint8_t>(in, path));
    scene.split_tag = static_cast<SplitTag>(read_pod<uint8_t>(in, path));
    scene.ego_lane_at_ref = read_pod<int32_t>(in, path);
    scene.ego_history = read_points(in, path);
    scene.ego_future = read_points(in, path);
    const uint64_t n_nb = read_pod<uint64_t>(in, path);
    for (uint64_t k = 0; k < n_nb; ++k) {
      NeighborTrack nb;
      nb.id = read_pod<int32_t>(in, path);
      const uint64_t n_frames = read_pod<uint64_t>(in, path);
      nb.positions.resize(n_frames);
      nb.present.resize(n_frames);
      for (uint64_t f = 0; f < n_frames; ++f) {
        nb.positions[f].x = read_pod<double>(in, path);
        nb.positions[f].y = read_pod<double>(in, path);
        nb.present[f] = read_pod<uint8_t>(in, path) != 0;
      }
      scene.neighbors.push_back(std::move(nb));
    }
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

}  // namespace bat::data
