#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "occnav/binary_io.hpp"
#include "occnav/error.hpp"
#include "occnav/occupancy.hpp"
#include "occnav/text_util.hpp"
#include "occnav/worldgen.hpp"

namespace occnav {

struct DatasetConfig {
  double pose_grid = 0.5;
  double yaw_step_deg = 45.0;
  double occupied_filter = 0.20;
  std::vector<std::uint64_t> train_worlds;
  std::vector<std::uint64_t> test_worlds;

  int headings() const { return static_cast<int>(std::lround(360.0 / yaw_step_deg)); }

  void validate() const {
    if (!(pose_grid > 0.0)) throw config_error("dataset: pose_grid must be positive");
    if (!(yaw_step_deg > 0.0) || std::fmod(360.0, yaw_step_deg) != 0.0)
      throw config_error("dataset: 360 must be divisible by yaw_step");
    if (!(occupied_filter > 0.0 && occupied_filter <= 1.0))
      throw config_error("dataset: occupied_filter must be in (0, 1]");
    for (auto t : train_worlds)
      for (auto s : test_worlds)
        if (t == s) throw config_error("dataset: world " + std::to_string(t) + " is in both train and test splits");
  }
};

struct PairMeta {
  std::uint64_t world_id = 0;
  Pose2D pose;
  friend bool operator==(const PairMeta&, const PairMeta&) = default;
};

struct SamplePair {
  ProbGrid input;   // from the center camera alone
  ProbGrid target;  // three-camera fusion
  PairMeta meta;
  friend bool operator==(const SamplePair&, const SamplePair&) = default;
};

/// A point is usable for the robot or a camera if it is outside every solid
/// and its truth cell is free.
inline bool position_free(const FloorPlan& plan, Vec2 p) {
  if (plan.is_solid(p)) return false;
  const Cell c = world_to_cell(plan, plan.truth_cell, p);
  return plan.truth_grid.in_bounds(c.row, c.col) && plan.truth_grid.at(c.row, c.col) == 0;
}

/// Lattice positions (centers of pose_grid squares) where the robot and all
/// rig cameras are free at every heading; each yields one pose per heading.
inline std::vector<Pose2D> sweep_poses(const FloorPlan& plan, const DatasetConfig& cfg, const CameraRig& rig) {
  std::vector<Pose2D> out;
  const int n_heading = cfg.headings();
  const int nx = static_cast<int>(std::floor(plan.boundary.width() / cfg.pose_grid + 1e-9));
  const int ny = static_cast<int>(std::floor(plan.boundary.height() / cfg.pose_grid + 1e-9));
  std::vector<Pose2D> headings;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double x = plan.boundary.x0 + (i + 0.5) * cfg.pose_grid;
      const double y = plan.boundary.y0 + (j + 0.5) * cfg.pose_grid;
      if (!position_free(plan, {x, y})) continue;
      headings.clear();
      bool ok = true;
      for (int k = 0; k < n_heading && ok; ++k) {
        const Pose2D pose(x, y, deg2rad(k * cfg.yaw_step_deg));
        const auto rp = rig_poses(pose, rig);
        ok = position_free(plan, rp.left.position()) && position_free(plan, rp.right.position());
        headings.push_back(pose);
      }
      if (ok) out.insert(out.end(), headings.begin(), headings.end());
    }
  }
  return out;
}

inline SamplePair build_pair(const FloorPlan& plan, const Pose2D& pose, const CameraRig& rig,
                             const CameraIntrinsics& intr, const GridSpec& spec, const OccupancyConfig& occ) {
  const auto rp = rig_poses(pose, rig);
  const auto oc = camera_map(plan, rp.center, pose, intr, spec, occ);
  const auto ol = camera_map(plan, rp.left, pose, intr, spec, occ);
  const auto orr = camera_map(plan, rp.right, pose, intr, spec, occ);
  return {logodds_to_prob(oc), logodds_to_prob(fuse3(oc, ol, orr)), {plan.seed, pose}};
}

inline double occupied_fraction(const ProbGrid& g, const OccupancyConfig& occ) {
  std::size_t n = 0;
  for (float p : g.values.data) n += classify(p, occ) == CellState::occupied;
  return g.values.size() ? static_cast<double>(n) / static_cast<double>(g.values.size()) : 0.0;
}

/// Keep unless the target is more than occupied_filter occupied.
inline bool filter_pair(const SamplePair& pair, const DatasetConfig& cfg, const OccupancyConfig& occ) {
  return occupied_fraction(pair.target, occ) <= cfg.occupied_filter;
}

/// Every kept pair of one world, in sweep order.
inline std::vector<SamplePair> build_world_pairs(const FloorPlan& plan, const DatasetConfig& cfg,
                                                 const CameraRig& rig, const CameraIntrinsics& intr,
                                                 const GridSpec& spec, const OccupancyConfig& occ) {
  std::vector<SamplePair> out;
  for (const auto& pose : sweep_poses(plan, cfg, rig)) {
    auto pair = build_pair(plan, pose, rig, intr, spec, occ);
    if (filter_pair(pair, cfg, occ)) out.push_back(std::move(pair));
  }
  return out;
}

class DatasetFormatError : public Error {
 public:
  enum class Code { bad_magic, bad_version, truncated, malformed };
  DatasetFormatError(Code code, const std::string& what) : Error(ErrorKind::data_format, what), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

inline constexpr std::uint32_t kDatasetVersion = 1;

// OCCD layout: "OCCD", u32 version, u32 pair count, u32 H, u32 W, then for
// each pair the input and target planes as H*W little-endian float32, then a
// u32-length-prefixed metadata text block:
//   grid <forward_extent> <lateral_extent>
//   pair <index> <world_id> <x> <y> <yaw>
inline void write_dataset(std::ostream& os, const std::vector<SamplePair>& pairs) {
  const int res = pairs.empty() ? 0 : pairs.front().input.spec.resolution;
  const GridSpec spec = pairs.empty() ? GridSpec{} : pairs.front().input.spec;
  os.write("OCCD", 4);
  binio::put_u32(os, kDatasetVersion);
  binio::put_u32(os, static_cast<std::uint32_t>(pairs.size()));
  binio::put_u32(os, static_cast<std::uint32_t>(res));
  binio::put_u32(os, static_cast<std::uint32_t>(res));
  std::ostringstream meta;
  meta << "grid " << format_double(spec.forward_extent) << ' ' << format_double(spec.lateral_extent) << "\n";
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    if (!(p.input.spec == spec) || !(p.target.spec == spec))
      throw Error(ErrorKind::data_format, "save_dataset: pairs do not share one grid spec");
    binio::put_f32s(os, p.input.values.data);
    binio::put_f32s(os, p.target.values.data);
    meta << "pair " << i << ' ' << p.meta.world_id << ' ' << format_double(p.meta.pose.x) << ' '
         << format_double(p.meta.pose.y) << ' ' << format_double(p.meta.pose.yaw) << "\n";
  }
  binio::put_bytes(os, meta.str());
}

inline std::vector<SamplePair> read_dataset(std::string bytes) {
  using Code = DatasetFormatError::Code;
  binio::Reader rd(std::move(bytes));
  std::string magic;
  if (!rd.get_raw(magic, 4)) throw DatasetFormatError(Code::truncated, "dataset truncated in header");
  if (magic != "OCCD") throw DatasetFormatError(Code::bad_magic, "bad magic: not an OCCD dataset");
  std::uint32_t version, count, h, w;
  if (!rd.get_u32(version)) throw DatasetFormatError(Code::truncated, "dataset truncated in header");
  if (version != kDatasetVersion)
    throw DatasetFormatError(Code::bad_version, "unsupported dataset version " + std::to_string(version));
  if (!rd.get_u32(count) || !rd.get_u32(h) || !rd.get_u32(w))
    throw DatasetFormatError(Code::truncated, "dataset truncated in header");
  if (h != w) throw DatasetFormatError(Code::malformed, "dataset planes must be square");
  if (count > 0 && h < 8) throw DatasetFormatError(Code::malformed, "dataset resolution below 8");
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  if (count > 0 && plane > 0 && rd.remaining() / (2 * 4 * plane) < count)
    throw DatasetFormatError(Code::truncated, "dataset truncated in pair data");
  std::vector<SamplePair> pairs(count);
  for (auto& p : pairs) {
    p.input.values = Grid<float>(static_cast<int>(h), static_cast<int>(w));
    p.target.values = Grid<float>(static_cast<int>(h), static_cast<int>(w));
    if (!rd.get_f32s(p.input.values.data, plane) || !rd.get_f32s(p.target.values.data, plane))
      throw DatasetFormatError(Code::truncated, "dataset truncated in pair data");
  }
  std::string meta;
  if (!rd.get_bytes(meta)) throw DatasetFormatError(Code::truncated, "dataset truncated in metadata");
  std::istringstream is(meta);
  std::string line;
  GridSpec spec;
  spec.resolution = static_cast<int>(h);
  std::size_t seen = 0;
  try {
    while (std::getline(is, line)) {
      std::istringstream ls(line);
      std::string key;
      if (!(ls >> key)) continue;
      if (key == "grid") {
        std::string f, l;
        ls >> f >> l;
        spec.forward_extent = parse_double(f);
        spec.lateral_extent = parse_double(l);
      } else if (key == "pair") {
        std::string idx, world, x, y, yaw;
        ls >> idx >> world >> x >> y >> yaw;
        const auto i = parse_uint(idx);
        if (i >= count) throw DatasetFormatError(Code::malformed, "metadata pair index out of range");
        auto& m = pairs[i].meta;
        m.world_id = parse_uint(world);
        m.pose.x = parse_double(x);
        m.pose.y = parse_double(y);
        m.pose.yaw = parse_double(yaw);
        ++seen;
      } else {
        throw DatasetFormatError(Code::malformed, "unknown metadata record '" + key + "'");
      }
    }
  } catch (const DatasetFormatError&) {
    throw;
  } catch (const Error& e) {
    throw DatasetFormatError(Code::malformed, std::string("dataset metadata: ") + e.what());
  }
  if (seen != count) throw DatasetFormatError(Code::malformed, "metadata does not cover every pair");
  if (rd.remaining() != 0) throw DatasetFormatError(Code::malformed, "trailing bytes after metadata");
  for (auto& p : pairs) {
    p.input.spec = spec;
    p.target.spec = spec;
  }
  return pairs;
}

inline void save_dataset(const std::vector<SamplePair>& pairs, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot write " + path);
  write_dataset(f, pairs);
  if (!f) throw io_error("write failed: " + path);
}

inline std::vector<SamplePair> load_dataset(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return read_dataset(ss.str());
}

}  // namespace occnav
