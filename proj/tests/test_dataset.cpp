#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "occnav/dataset.hpp"
#include "occnav/models/metrics.hpp"

using namespace occnav;

namespace {

GridSpec desk_grid() {
  GridSpec g;
  g.resolution = 64;
  return g;
}

bool in_solid(const FloorPlan& plan, double x, double y) {
  for (const auto& s : plan.solids())
    if (x >= s.rect.x0 && x <= s.rect.x1 && y >= s.rect.y0 && y <= s.rect.y1) return true;
  return !(x >= plan.boundary.x0 && x <= plan.boundary.x1 && y >= plan.boundary.y0 && y <= plan.boundary.y1);
}

// The point and the center of the truth cell holding it are both outside every solid.
bool free_point(const FloorPlan& plan, double x, double y) {
  const double c = plan.truth_cell;
  const double cx = (std::floor(x / c) + 0.5) * c, cy = (std::floor(y / c) + 0.5) * c;
  return !in_solid(plan, x, y) && !in_solid(plan, cx, cy);
}

// Brute-force lattice scan with the rig geometry written out by hand.
std::vector<Pose2D> lattice_oracle(const FloorPlan& plan, double grid, int headings, double d) {
  std::vector<Pose2D> out;
  for (double y = grid / 2; y < plan.boundary.y1; y += grid)
    for (double x = grid / 2; x < plan.boundary.x1; x += grid) {
      if (!free_point(plan, x, y)) continue;
      bool ok = true;
      for (int k = 0; k < headings; ++k) {
        const double yaw = 2 * std::numbers::pi * k / headings;
        const double lx = x - d * std::sin(yaw), ly = y + d * std::cos(yaw);
        const double rx = x + d * std::sin(yaw), ry = y - d * std::cos(yaw);
        ok = ok && free_point(plan, lx, ly) && free_point(plan, rx, ry);
      }
      if (!ok) continue;
      for (int k = 0; k < headings; ++k) out.emplace_back(x, y, 2 * std::numbers::pi * k / headings);
    }
  return out;
}

std::vector<SamplePair> small_dataset(std::uint64_t seed, std::size_t max_pairs) {
  WorldSpec ws;
  ws.seed = seed;
  const auto plan = generate_world(ws);
  DatasetConfig cfg;
  cfg.pose_grid = 1.0;
  auto pairs = build_world_pairs(plan, cfg, {}, {}, desk_grid(), {});
  if (pairs.size() > max_pairs) pairs.resize(max_pairs);
  return pairs;
}

}  // namespace

TEST(Sweep, EightHeadingsPerPosition) {
  WorldSpec ws;
  ws.seed = 2;
  const auto plan = generate_world(ws);
  const auto poses = sweep_poses(plan, DatasetConfig{}, CameraRig{});
  ASSERT_FALSE(poses.empty());
  ASSERT_EQ(poses.size() % 8, 0u);
  for (std::size_t i = 0; i < poses.size(); i += 8)
    for (int k = 0; k < 8; ++k) {
      EXPECT_EQ(poses[i + k].x, poses[i].x);
      EXPECT_EQ(poses[i + k].y, poses[i].y);
      EXPECT_NEAR(normalize_angle(poses[i + k].yaw - deg2rad(45.0 * k)), 0.0, 1e-12);
    }
}

TEST(Sweep, EmptyRoomMatchesLatticeOracle) {
  const auto plan = make_floor_plan(0, {0, 0, 3, 3}, 0.1, 0.05, {});
  const auto poses = sweep_poses(plan, DatasetConfig{}, CameraRig{});
  const auto want = lattice_oracle(plan, 0.5, 8, 0.3);
  ASSERT_EQ(poses.size(), want.size());
  EXPECT_EQ(poses.size(), 16u * 8u);  // the outer ring of lattice points puts a side camera in a wall
  for (std::size_t i = 0; i < poses.size(); ++i) {
    EXPECT_NEAR(poses[i].x, want[i].x, 1e-12);
    EXPECT_NEAR(poses[i].y, want[i].y, 1e-12);
    EXPECT_NEAR(normalize_angle(poses[i].yaw - want[i].yaw), 0.0, 1e-12);
  }
}

TEST(Sweep, GeneratedWorldsMatchLatticeOracle) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    WorldSpec ws;
    ws.seed = seed;
    const auto plan = generate_world(ws);
    const auto poses = sweep_poses(plan, DatasetConfig{}, CameraRig{});
    const auto want = lattice_oracle(plan, 0.5, 8, 0.3);
    ASSERT_EQ(poses.size(), want.size()) << seed;
    for (std::size_t i = 0; i < poses.size(); ++i) {
      EXPECT_NEAR(poses[i].x, want[i].x, 1e-12);
      EXPECT_NEAR(poses[i].y, want[i].y, 1e-12);
    }
  }
}

TEST(Sweep, LeftCameraInsideObstacleExcludes) {
  // robot at (1.25, 1.25) is free; facing -y its left camera sits at (1.55, 1.25)
  const auto plan = make_floor_plan(0, {0, 0, 3, 3}, 0.1, 0.05, {{0, {1.45, 1.0, 1.7, 1.5}}});
  const auto poses = sweep_poses(plan, DatasetConfig{}, CameraRig{});
  for (const auto& p : poses) EXPECT_FALSE(std::fabs(p.x - 1.25) < 1e-9 && std::fabs(p.y - 1.25) < 1e-9);
  const auto open = sweep_poses(make_floor_plan(0, {0, 0, 3, 3}, 0.1, 0.05, {}), DatasetConfig{}, CameraRig{});
  EXPECT_TRUE(std::any_of(open.begin(), open.end(),
                          [](const Pose2D& p) { return std::fabs(p.x - 1.25) < 1e-9 && std::fabs(p.y - 1.25) < 1e-9; }));
}

TEST(BuildPair, DegenerateRigTargetEqualsInput) {
  WorldSpec ws;
  ws.seed = 3;
  const auto plan = generate_world(ws);
  CameraRig rig;
  rig.lateral_offset = 0;
  rig.inward_rotation_deg = 0;
  const auto poses = sweep_poses(plan, DatasetConfig{}, rig);
  for (std::size_t i = 0; i < poses.size(); i += 37) {
    const auto pair = build_pair(plan, poses[i], rig, {}, desk_grid(), {});
    EXPECT_EQ(pair.input.values, pair.target.values);
  }
}

TEST(BuildPair, Deterministic) {
  WorldSpec ws;
  ws.seed = 4;
  const auto plan = generate_world(ws);
  const auto poses = sweep_poses(plan, DatasetConfig{}, CameraRig{});
  const auto a = build_pair(plan, poses[5], {}, {}, desk_grid(), {});
  const auto b = build_pair(plan, poses[5], {}, {}, desk_grid(), {});
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.meta.world_id, 4u);
}

TEST(BuildPair, TargetKeepsInputKnownCells) {
  const OccupancyConfig occ;
  std::size_t pairs = 0, gained = 0;
  double in_known_total = 0, newly_total = 0;
  for (std::uint64_t seed = 10; seed < 13; ++seed) {
    WorldSpec ws;
    ws.seed = seed;
    const auto plan = generate_world(ws);
    const auto poses = sweep_poses(plan, DatasetConfig{}, CameraRig{});
    for (std::size_t i = 0; i < poses.size(); i += 3) {
      const auto pair = build_pair(plan, poses[i], {}, {}, desk_grid(), occ);
      std::size_t in_known = 0, tg_known = 0;
      for (std::size_t k = 0; k < pair.input.values.size(); ++k) {
        in_known += is_known(pair.input.values.data[k], occ);
        tg_known += is_known(pair.target.values.data[k], occ);
      }
      EXPECT_GE(static_cast<double>(tg_known), 0.99 * static_cast<double>(in_known));
      ++pairs;
      gained += tg_known > in_known;
      const auto c = models::inpaint_counts(pair.input, pair.target, occ);
      in_known_total += c.input_known;
      newly_total += c.newly_known;
    }
  }
  EXPECT_GT(gained, pairs / 2);
  EXPECT_GT(newly_total / in_known_total, 0.0);
}

TEST(Filter, Boundaries) {
  const OccupancyConfig occ;
  DatasetConfig cfg;
  GridSpec spec;
  spec.resolution = 10;
  SamplePair p{ProbGrid(spec), ProbGrid(spec), {}};
  EXPECT_TRUE(filter_pair(p, cfg, occ));  // all unknown
  for (int i = 0; i < 20; ++i) p.target.values.data[i] = 0.6f;
  EXPECT_DOUBLE_EQ(occupied_fraction(p.target, occ), 0.20);
  EXPECT_TRUE(filter_pair(p, cfg, occ));
  for (int i = 20; i < 25; ++i) p.target.values.data[i] = 0.6f;
  EXPECT_FALSE(filter_pair(p, cfg, occ));
  // the input map plays no part
  for (auto& v : p.input.values.data) v = 0.9f;
  for (int i = 20; i < 25; ++i) p.target.values.data[i] = 0.4f;
  EXPECT_TRUE(filter_pair(p, cfg, occ));
}

TEST(Filter, BuiltPairsAllPass) {
  const auto pairs = small_dataset(6, 1000);
  ASSERT_FALSE(pairs.empty());
  for (const auto& p : pairs) EXPECT_LE(occupied_fraction(p.target, {}), 0.20);
}

TEST(DatasetConfig, Validation) {
  DatasetConfig c;
  c.yaw_step_deg = 50;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.occupied_filter = 0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.train_worlds = {1, 2};
  c.test_worlds = {2, 3};
  EXPECT_THROW(c.validate(), Error);
}

TEST(Occd, EmptyRoundTrip) {
  std::ostringstream os;
  write_dataset(os, {});
  EXPECT_TRUE(read_dataset(os.str()).empty());
}

TEST(Occd, RandomPairsRoundTripBitwise) {
  Rng rng(77);
  GridSpec spec;
  spec.resolution = 16;
  std::vector<SamplePair> pairs;
  for (int i = 0; i < 100; ++i) {
    SamplePair p{ProbGrid(spec), ProbGrid(spec), {rng.next_u64(), Pose2D(rng.uniform(0, 8), rng.uniform(0, 6), rng.uniform(-3, 3))}};
    for (auto& v : p.input.values.data) v = static_cast<float>(rng.uniform01());
    for (auto& v : p.target.values.data) v = static_cast<float>(rng.uniform01());
    pairs.push_back(p);
  }
  const std::string path = ::testing::TempDir() + "pairs.occd";
  save_dataset(pairs, path);
  const auto back = load_dataset(path);
  ASSERT_EQ(back.size(), pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_EQ(std::memcmp(back[i].input.values.data.data(), pairs[i].input.values.data.data(), 16 * 16 * 4), 0);
    EXPECT_EQ(back[i], pairs[i]);
  }
  std::remove(path.c_str());
}

TEST(Occd, BuiltPairsRoundTrip) {
  const auto pairs = small_dataset(7, 12);
  std::ostringstream os;
  write_dataset(os, pairs);
  EXPECT_EQ(read_dataset(os.str()), pairs);
}

namespace {

DatasetFormatError::Code error_code(const std::string& bytes) {
  try {
    read_dataset(bytes);
  } catch (const DatasetFormatError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::data_format);
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return DatasetFormatError::Code::malformed;
}

}  // namespace

TEST(Occd, FormatErrors) {
  using Code = DatasetFormatError::Code;
  std::ostringstream os;
  write_dataset(os, small_dataset(8, 3));
  const std::string good = os.str();
  std::string bad = good;
  bad[0] = 'X';
  EXPECT_EQ(error_code(bad), Code::bad_magic);
  bad = good;
  bad[4] = 9;
  EXPECT_EQ(error_code(bad), Code::bad_version);
  EXPECT_EQ(error_code(good.substr(0, good.size() / 2)), Code::truncated);
  EXPECT_EQ(error_code(good.substr(0, 10)), Code::truncated);
  EXPECT_EQ(error_code(good + "x"), Code::malformed);
  EXPECT_THROW(load_dataset("/nonexistent/x.occd"), Error);
}
