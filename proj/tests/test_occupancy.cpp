#include <gtest/gtest.h>

#include <numbers>

#include "occnav/occupancy.hpp"
#include "occnav/rng.hpp"

using namespace occnav;

namespace {

LogOddsGrid random_grid(const GridSpec& spec, Rng& rng, double zero_fraction = 0.2) {
  LogOddsGrid g(spec);
  for (auto& v : g.values.data)
    v = rng.uniform01() < zero_fraction ? 0.0f : static_cast<float>(0.01 * rng.uniform_int(-10, 10));
  return g;
}

LabeledPoints at(Vec2 p, int obstacle, int floor) {
  LabeledPoints out;
  for (int i = 0; i < obstacle; ++i) out.push_back({p, PointLabel::obstacle});
  for (int i = 0; i < floor; ++i) out.push_back({p, PointLabel::floor});
  return out;
}

void expect_pose(const Pose2D& p, double x, double y, double yaw_deg) {
  EXPECT_NEAR(p.x, x, 1e-12);
  EXPECT_NEAR(p.y, y, 1e-12);
  EXPECT_NEAR(p.yaw, deg2rad(yaw_deg), 1e-12);
}

}  // namespace

TEST(RigPoses, DefaultRig) {
  const auto rp = rig_poses(Pose2D(0, 0, 0), CameraRig{});
  expect_pose(rp.center, 0, 0, 0);
  expect_pose(rp.left, 0, 0.3, -30);
  expect_pose(rp.right, 0, -0.3, 30);
}

TEST(RigPoses, DegenerateRig) {
  CameraRig rig;
  rig.lateral_offset = 0;
  rig.inward_rotation_deg = 0;
  const Pose2D robot(1.5, -2.0, 0.7);
  const auto rp = rig_poses(robot, rig);
  EXPECT_EQ(rp.left, robot);
  EXPECT_EQ(rp.right, robot);
}

TEST(RigPoses, RotatedRobot) {
  const auto rp = rig_poses(Pose2D(0, 0, std::numbers::pi / 2), CameraRig{});
  expect_pose(rp.left, -0.3, 0, 60);
  expect_pose(rp.right, 0.3, 0, 120);
}

TEST(RobotFrame, Examples) {
  const LabeledPoints pts{{{1, 2}, PointLabel::floor}, {{0, 1}, PointLabel::obstacle}};
  const auto id = to_robot_frame(pts, Pose2D(0, 0, 0));
  EXPECT_EQ(id[0].position.x, 1);
  EXPECT_EQ(id[0].position.y, 2);
  const auto tr = to_robot_frame(pts, Pose2D(1, 2, 0));
  EXPECT_EQ(tr[0].position.x, 0);
  EXPECT_EQ(tr[0].position.y, 0);
  const auto rot = to_robot_frame(pts, Pose2D(0, 0, std::numbers::pi / 2));
  EXPECT_NEAR(rot[1].position.x, 1, 1e-12);
  EXPECT_NEAR(rot[1].position.y, 0, 1e-12);
  EXPECT_EQ(rot[1].label, PointLabel::obstacle);
}

TEST(RobotFrame, PreservesDistances) {
  Rng rng(2);
  LabeledPoints pts;
  for (int i = 0; i < 50; ++i) pts.push_back({{rng.uniform(-5, 5), rng.uniform(-5, 5)}, PointLabel::floor});
  for (int t = 0; t < 20; ++t) {
    const Pose2D robot(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
    const auto out = to_robot_frame(pts, robot);
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j)
        EXPECT_NEAR(distance(out[i].position, out[j].position), distance(pts[i].position, pts[j].position), 1e-9);
  }
}

TEST(BinPoints, Examples) {
  const GridSpec spec;
  const OccupancyConfig cfg;
  const Vec2 p{1.0, 0.3};
  const auto cell = *crop_cell(spec, p);
  EXPECT_FLOAT_EQ(bin_points(at(p, 1, 0), spec, cfg).values.at(cell.row, cell.col), 0.01f);
  EXPECT_FLOAT_EQ(bin_points(at(p, 0, 1500), spec, cfg).values.at(cell.row, cell.col), -0.10f);
  EXPECT_FLOAT_EQ(bin_points(at(p, 3, 1), spec, cfg).values.at(cell.row, cell.col), 0.02f);
}

TEST(BinPoints, CropGeometry) {
  const GridSpec spec;
  const OccupancyConfig cfg;
  // behind the robot, beyond the forward edge, beyond the lateral edges
  const auto g = bin_points(at({-0.01, 0}, 1, 0), spec, cfg);
  const auto g2 = bin_points(at({5.0, 0}, 1, 0), spec, cfg);
  const auto g3 = bin_points(at({1.0, 2.51}, 1, 0), spec, cfg);
  const auto g4 = bin_points(at({1.0, -2.5}, 1, 0), spec, cfg);
  for (const auto* x : {&g, &g2, &g3, &g4})
    for (float v : x->values.data) EXPECT_EQ(v, 0.0f);
  // the robot's left edge is row 0, forward is +column
  EXPECT_EQ(*crop_cell(spec, {0.001, 2.499}), (Cell{0, 0}));
  EXPECT_EQ(*crop_cell(spec, {4.999, -2.499}), (Cell{255, 255}));
  const Vec2 c = crop_cell_center(spec, {10, 20});
  EXPECT_EQ(*crop_cell(spec, c), (Cell{10, 20}));
}

TEST(BinPoints, MagnitudeBounded) {
  Rng rng(4);
  GridSpec spec;
  spec.resolution = 16;
  OccupancyConfig cfg;
  LabeledPoints pts;
  for (int i = 0; i < 20000; ++i)
    pts.push_back({{rng.uniform(-1, 6), rng.uniform(-3, 3)}, rng.uniform01() < 0.5 ? PointLabel::floor : PointLabel::obstacle});
  const auto g = bin_points(pts, spec, cfg);
  for (float v : g.values.data) EXPECT_LE(std::fabs(v), static_cast<float>(cfg.m * cfg.clip_counts));
}

TEST(Fuse3, Examples) {
  EXPECT_FLOAT_EQ(fuse_value(0.05f, -0.10f, 0.0f), -0.10f);
  EXPECT_EQ(fuse_value(0.10f, -0.10f, 0.0f), 0.0f);
  EXPECT_EQ(fuse_value(0.0f, 0.0f, 0.0f), 0.0f);
  Rng rng(5);
  GridSpec spec;
  spec.resolution = 32;
  const auto a = random_grid(spec, rng);
  const LogOddsGrid zero(spec);
  EXPECT_EQ(fuse3(a, zero, zero).values, a.values);
}

TEST(Fuse3, Properties) {
  Rng rng(6);
  GridSpec spec;
  spec.resolution = 16;
  for (int t = 0; t < 100; ++t) {
    const auto a = random_grid(spec, rng), b = random_grid(spec, rng), c = random_grid(spec, rng);
    const auto f = fuse3(a, b, c);
    for (const auto& perm : {fuse3(a, c, b), fuse3(b, a, c), fuse3(b, c, a), fuse3(c, a, b), fuse3(c, b, a)})
      EXPECT_EQ(perm.values, f.values);
    EXPECT_EQ(fuse3(a, a, a).values, a.values);
    for (std::size_t i = 0; i < f.values.size(); ++i) {
      const float x = a.values.data[i], y = b.values.data[i], z = c.values.data[i];
      EXPECT_EQ(std::fabs(f.values.data[i]) == std::max({std::fabs(x), std::fabs(y), std::fabs(z)}) ||
                    f.values.data[i] == 0.0f,
                true);
      const double s = static_cast<double>(x) + y + z;
      EXPECT_EQ((f.values.data[i] > 0) - (f.values.data[i] < 0), (s > 0) - (s < 0));
    }
  }
}

TEST(Fuse3, SpecMismatchThrows) {
  GridSpec a, b;
  b.resolution = 128;
  EXPECT_THROW(fuse3(LogOddsGrid(a), LogOddsGrid(a), LogOddsGrid(b)), Error);
}

TEST(Logistic, Values) {
  EXPECT_EQ(logodds_to_prob(0.0f), 0.5f);
  EXPECT_NEAR(logodds_to_prob(0.10f), 0.52498, 1e-5);
  EXPECT_NEAR(logodds_to_prob(-0.02f), 0.49500, 1e-5);
  EXPECT_EQ(prob_to_logodds(0.0f), -10.0f);
  EXPECT_EQ(prob_to_logodds(1.0f), 10.0f);
  EXPECT_EQ(prob_to_logodds(1.0f, 4.0), 4.0f);
}

TEST(Logistic, RoundTripAndMonotone) {
  float prev = -1;
  for (int i = -1000; i <= 1000; ++i) {
    const float l = 0.005f * i;
    const float p = logodds_to_prob(l);
    EXPECT_GT(p, prev);
    prev = p;
    EXPECT_NEAR(prob_to_logodds(p), l, 1e-6 * std::max(1.0f, std::fabs(l)) * 4);
  }
}

TEST(Classify, Boundaries) {
  const OccupancyConfig cfg;
  EXPECT_EQ(classify(0.5, cfg), CellState::unknown);
  EXPECT_EQ(classify(0.505, cfg), CellState::occupied);
  EXPECT_EQ(classify(0.4949, cfg), CellState::free);
  EXPECT_EQ(classify(0.495, cfg), CellState::unknown);
}

TEST(Classify, SmallLogOddsAreUnknown) {
  const OccupancyConfig cfg;
  const double band = std::log(0.505 / 0.495);
  for (int i = -199; i <= 199; ++i) {
    const float l = static_cast<float>(band * i / 200.0);
    EXPECT_EQ(classify(logodds_to_prob(l), cfg), CellState::unknown) << l;
  }
  // net counts of three points are the smallest that classify as known
  EXPECT_EQ(classify(logodds_to_prob(0.03f), cfg), CellState::occupied);
  EXPECT_EQ(classify(logodds_to_prob(-0.03f), cfg), CellState::free);
}

TEST(CameraMap, SeesWallAhead) {
  const auto plan = make_floor_plan(0, {0, 0, 4, 8}, 0.1, 0.05, {});
  const Pose2D robot(1.0, 4.0, 0.0);
  GridSpec spec;
  spec.resolution = 64;
  const OccupancyConfig cfg;
  const auto g = logodds_to_prob(camera_map(plan, robot, robot, {}, spec, cfg));
  const auto cls = classify(g, cfg);
  // wall face at x=3.9, i.e. 2.9 m ahead
  const auto wall = *crop_cell(spec, {2.9, 0.0});
  const auto floor = *crop_cell(spec, {1.5, 0.0});
  EXPECT_EQ(cls.at(wall.row, wall.col), CellState::occupied);
  EXPECT_EQ(cls.at(floor.row, floor.col), CellState::free);
  const auto beyond = *crop_cell(spec, {3.6, 0.0});
  EXPECT_EQ(cls.at(beyond.row, beyond.col), CellState::unknown);
}
