#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "occnav/dataset.hpp"
#include "occnav/models/training.hpp"
#include "occnav/navsim.hpp"
#include "occnav/text_util.hpp"
#include "occnav/worldgen.hpp"

namespace occnav {

/// Everything one experiment needs. Parsed from a JSON document whose
/// sections mirror the members below; unknown keys are rejected and missing
/// keys keep their defaults.
struct RunConfig {
  std::uint64_t seed = 0;
  WorldSpec world;  // template; the seed is replaced by each world id
  DatasetConfig dataset;
  GridSpec grid;
  OccupancyConfig occupancy;
  CameraRig rig;
  CameraIntrinsics intrinsics;
  models::TrainConfig train;
  nav::NavConfig nav;
  nav::CostMapConfig cost;
  double validation_fraction = 0.1;
  std::vector<std::uint64_t> nav_worlds;  // empty: use dataset.test_worlds

  std::string canonical;  // normalized JSON, the input to hash()

  WorldSpec world_spec(std::uint64_t id) const {
    WorldSpec s = world;
    s.seed = id;
    return s;
  }

  nav::SimContext sim_context() const { return {intrinsics, rig, grid, occupancy, nav, cost}; }

  std::string hash() const { return hex64(fnv1a64(canonical)); }

  void validate() const {
    world.validate();
    dataset.validate();
    grid.validate();
    occupancy.validate();
    rig.validate();
    intrinsics.validate();
    train.validate();
    nav.validate();
    cost.validate();
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
      throw config_error("validation_fraction must be in [0, 1)");
  }
};

namespace detail {

using nlohmann::json;

class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw config_error("config section '" + name_ + "' must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw config_error("config " + name_ + "." + key + ": " + e.what());
    }
  }

  void range(const char* key, int& lo, int& hi) {
    std::vector<int> v{lo, hi};
    get(key, v);
    if (v.size() != 2) throw config_error("config " + name_ + "." + key + " must be [min, max]");
    lo = v[0];
    hi = v[1];
  }
  void range(const char* key, double& lo, double& hi) {
    std::vector<double> v{lo, hi};
    get(key, v);
    if (v.size() != 2) throw config_error("config " + name_ + "." + key + " must be [min, max]");
    lo = v[0];
    hi = v[1];
  }

  Section sub(const char* key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Section(j_.contains(key) ? j_.at(key) : empty, name_ + "." + key);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw config_error("config: unknown key '" + name_ + "." + k + "'");
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

}  // namespace detail

inline RunConfig parse_run_config(const std::string& text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw config_error(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  detail::Section root(j, "config");
  root.get("seed", c.seed);
  root.get("validation_fraction", c.validation_fraction);
  root.get("nav_worlds", c.nav_worlds);

  auto w = root.sub("world");
  w.get("width", c.world.width);
  w.get("height", c.world.height);
  w.range("obstacle_count", c.world.min_obstacles, c.world.max_obstacles);
  w.range("obstacle_size", c.world.min_obstacle_size, c.world.max_obstacle_size);
  w.get("min_clearance", c.world.min_clearance);
  w.get("wall_thickness", c.world.wall_thickness);
  w.get("truth_cell", c.world.truth_cell);
  w.get("max_attempts", c.world.max_attempts);
  w.finish();

  auto d = root.sub("dataset");
  d.get("pose_grid", c.dataset.pose_grid);
  d.get("yaw_step", c.dataset.yaw_step_deg);
  d.get("occupied_filter", c.dataset.occupied_filter);
  d.get("train_worlds", c.dataset.train_worlds);
  d.get("test_worlds", c.dataset.test_worlds);
  d.finish();

  auto g = root.sub("grid");
  g.get("forward_extent", c.grid.forward_extent);
  g.get("lateral_extent", c.grid.lateral_extent);
  g.get("resolution", c.grid.resolution);
  g.finish();

  auto o = root.sub("occupancy");
  o.get("m", c.occupancy.m);
  o.get("clip_counts", c.occupancy.clip_counts);
  o.get("free_threshold", c.occupancy.free_threshold);
  o.get("occupied_threshold", c.occupancy.occupied_threshold);
  o.get("max_logodds", c.occupancy.max_logodds);
  o.finish();

  auto r = root.sub("rig");
  r.get("lateral_offset", c.rig.lateral_offset);
  r.get("inward_rotation", c.rig.inward_rotation_deg);
  r.get("height", c.rig.height);
  r.finish();

  auto in = root.sub("intrinsics");
  in.get("hfov", c.intrinsics.hfov_deg);
  in.get("ray_count", c.intrinsics.ray_count);
  in.get("max_range", c.intrinsics.max_range);
  in.get("sample_step", c.intrinsics.sample_step);
  in.get("obstacle_points_per_hit", c.intrinsics.obstacle_points_per_hit);
  in.finish();

  auto t = root.sub("train");
  t.get("lambda_l1", c.train.lambda_l1);
  t.get("batch_size_gan", c.train.batch_size_gan);
  t.get("batch_size_pred", c.train.batch_size_pred);
  t.get("max_epochs", c.train.max_epochs);
  t.get("patience", c.train.patience);
  t.get("max_iterations", c.train.max_iterations);
  t.get("lr", c.train.adam.lr);
  t.get("beta1", c.train.adam.beta1);
  t.get("beta2", c.train.adam.beta2);
  t.get("base_channels", c.train.generator.base_channels);
  t.get("disc_base_channels", c.train.discriminator.base_channels);
  t.get("input_gain", c.train.generator.input_gain);
  c.train.discriminator.input_gain = c.train.generator.input_gain;
  std::string loss = models::to_string(c.train.pred_loss);
  t.get("pred_loss", loss);
  if (loss == "bce") c.train.pred_loss = models::PredLoss::bce;
  else if (loss == "mse") c.train.pred_loss = models::PredLoss::mse;
  else if (loss == "l1") c.train.pred_loss = models::PredLoss::l1;
  else throw config_error("config train.pred_loss must be bce, mse or l1");
  t.finish();

  auto n = root.sub("nav");
  n.get("cell", c.nav.cell);
  n.get("move_step", c.nav.move_step);
  n.get("los_tolerance", c.nav.los_tolerance_deg);
  n.get("s_max", c.nav.s_max);
  n.get("v_max", c.nav.v_max);
  n.get("omega_max", c.nav.omega_max_deg);
  n.get("v_min_fraction", c.nav.v_min_fraction);
  n.get("min_episode_distance", c.nav.min_episode_distance);
  n.get("full_speed_inpainted", c.nav.full_speed_inpainted);
  n.finish();

  auto k = root.sub("costmap");
  k.get("observed_free", c.cost.observed_free);
  k.get("observed_occupied", c.cost.observed_occupied);
  k.get("predicted_free", c.cost.predicted_free);
  k.get("predicted_occupied", c.cost.predicted_occupied);
  k.get("unknown", c.cost.unknown);
  k.finish();

  root.finish();
  c.train.seed = c.seed;
  c.canonical = j.dump();
  c.validate();
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw io_error("cannot read config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_run_config(ss.str());
}

}  // namespace occnav
