#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>
#include <string>
#include <tuple>
#include <vector>

#include "occnav/dataset.hpp"
#include "occnav/models/predictor.hpp"
#include "occnav/occupancy.hpp"
#include "occnav/worldgen.hpp"

namespace occnav::nav {

struct NavConfig {
  double cell = 0.2;
  double move_step = 0.2;
  double los_tolerance_deg = 1.0;
  int s_max = 100;
  double v_max = 1.0;            // m/s
  double omega_max_deg = 90.0;   // deg/s
  double v_min_fraction = 0.1;
  double min_episode_distance = 1.0;  // m, between src and dst in generated suites
  bool full_speed_inpainted = false;  // predicted-free counts as observed-free for speed

  double success_radius() const { return std::numbers::sqrt2 * cell; }

  void validate() const {
    if (!(cell > 0) || !(move_step > 0) || !(los_tolerance_deg > 0 && los_tolerance_deg < 180) || s_max < 1 ||
        !(v_max > 0) || !(omega_max_deg > 0) || !(v_min_fraction > 0 && v_min_fraction <= 1) ||
        !(min_episode_distance >= 0))
      throw config_error("nav: settings must be positive (los_tolerance < 180, v_min_fraction <= 1)");
  }
};

struct CostMapConfig {
  double observed_free = 1.0;
  double observed_occupied = 100000.0;
  double predicted_free = 2.0;
  double predicted_occupied = 1000.0;
  double unknown = 10.0;

  void validate() const {
    if (!(observed_occupied > predicted_occupied && predicted_occupied > unknown && unknown > predicted_free &&
          predicted_free > observed_free && observed_free > 0))
      throw config_error("costmap: weights must satisfy obs_occ > pred_occ > unknown > pred_free > obs_free > 0");
  }
};

/// World-frame map at nav cell resolution. `observed` holds fused log-odds;
/// `predicted` holds probabilities (0.5 = unknown) only where the observed
/// layer is still unknown.
struct GlobalMap {
  Vec2 origin;
  double cell = 0.2;
  Grid<float> observed;
  Grid<float> predicted;

  GlobalMap() = default;
  GlobalMap(const FloorPlan& plan, double cell_size) : origin{plan.boundary.x0, plan.boundary.y0}, cell(cell_size) {
    const auto r = rasterize(plan, cell_size);
    observed = Grid<float>(r.rows, r.cols, 0.0f);
    predicted = Grid<float>(r.rows, r.cols, 0.5f);
  }

  std::optional<Cell> cell_of(Vec2 p) const {
    const Cell c{static_cast<int>(std::floor((p.y - origin.y) / cell)),
                 static_cast<int>(std::floor((p.x - origin.x) / cell))};
    if (!observed.in_bounds(c.row, c.col)) return std::nullopt;
    return c;
  }
  Vec2 center(Cell c) const { return {origin.x + (c.col + 0.5) * cell, origin.y + (c.row + 0.5) * cell}; }
};

/// Pairwise form of the three-view fusion: max(|old|, |obs|) * sign(old + obs).
inline float fuse_pair(float old_value, float obs) { return fuse_value(old_value, obs, 0.0f); }

/// Combines the local cells that land in one global cell during a single
/// update: any occupied cell wins with its value, otherwise max(|v|) * sign(sum v).
class CellPool {
 public:
  void add(float v, const OccupancyConfig& occ) {
    sum_ += v;
    mag_ = std::max(mag_, std::fabs(v));
    if (v > 0.0f && classify(logodds_to_prob(v), occ) == CellState::occupied) occ_ = std::max(occ_, v);
  }
  float value() const {
    if (occ_ > 0.0f) return occ_;
    return sum_ > 0.0 ? mag_ : (sum_ < 0.0 ? -mag_ : 0.0f);
  }

 private:
  double sum_ = 0.0;
  float mag_ = 0.0f;
  float occ_ = 0.0f;
};

/// Folds one robot-frame observation (and its inpainted completion) into the
/// global map. Each local cell lands in the global cell containing its center;
/// the pooled value per cell is then fused pairwise into both layers.
inline void update_global(GlobalMap& g, const LogOddsGrid& local_obs, const ProbGrid& local_inpainted,
                          const Pose2D& robot, const OccupancyConfig& occ) {
  const double c = std::cos(robot.yaw), s = std::sin(robot.yaw);
  const int res = local_obs.spec.resolution;
  std::vector<std::size_t> touched;
  std::vector<CellPool> obs_pool(g.observed.size()), pred_pool(g.observed.size());
  std::vector<std::uint8_t> seen(g.observed.size(), 0);
  for (int r = 0; r < res; ++r)
    for (int col = 0; col < res; ++col) {
      const Vec2 lc = crop_cell_center(local_obs.spec, {r, col});
      const Vec2 w{robot.x + c * lc.x - s * lc.y, robot.y + s * lc.x + c * lc.y};
      const auto gc = g.cell_of(w);
      if (!gc) continue;
      const auto i = static_cast<std::size_t>(gc->row) * g.observed.cols + gc->col;
      if (!seen[i]) {
        seen[i] = 1;
        touched.push_back(i);
      }
      obs_pool[i].add(local_obs.values.at(r, col), occ);
      pred_pool[i].add(prob_to_logodds(local_inpainted.values.at(r, col), occ.max_logodds), occ);
    }
  for (const auto i : touched) {
    g.observed.data[i] = fuse_pair(g.observed.data[i], obs_pool[i].value());
    const float old = prob_to_logodds(g.predicted.data[i], occ.max_logodds);
    g.predicted.data[i] = logodds_to_prob(fuse_pair(old, pred_pool[i].value()));
  }
  for (std::size_t i = 0; i < g.observed.size(); ++i)
    if (is_known(logodds_to_prob(g.observed.data[i]), occ)) g.predicted.data[i] = 0.5f;
}

inline Grid<double> build_costmap(const GlobalMap& g, const CostMapConfig& cfg, const OccupancyConfig& occ) {
  Grid<double> cost(g.observed.rows, g.observed.cols, cfg.unknown);
  for (std::size_t i = 0; i < cost.size(); ++i) {
    switch (classify(logodds_to_prob(g.observed.data[i]), occ)) {
      case CellState::free: cost.data[i] = cfg.observed_free; continue;
      case CellState::occupied: cost.data[i] = cfg.observed_occupied; continue;
      case CellState::unknown: break;
    }
    switch (classify(g.predicted.data[i], occ)) {
      case CellState::free: cost.data[i] = cfg.predicted_free; break;
      case CellState::occupied: cost.data[i] = cfg.predicted_occupied; break;
      case CellState::unknown: cost.data[i] = cfg.unknown; break;
    }
  }
  return cost;
}

struct PlanResult {
  std::vector<Cell> path;  // src first, dst last
  double cost = 0.0;
};

/// Dijkstra over 8-connected moves. Entering a cell costs its weight, times
/// sqrt(2) on diagonals. Infinite weights are impassable. Among equal-cost
/// predecessors the lexicographically smallest (row, col) wins.
inline std::optional<PlanResult> plan(const Grid<double>& cost, Cell src, Cell dst) {
  if (!cost.in_bounds(src.row, src.col) || !cost.in_bounds(dst.row, dst.col))
    throw Error(ErrorKind::usage, "plan: src or dst out of bounds");
  const double inf = std::numeric_limits<double>::infinity();
  Grid<double> dist(cost.rows, cost.cols, inf);
  Grid<int> pred(cost.rows, cost.cols, -1);
  Grid<std::uint8_t> done(cost.rows, cost.cols, 0);
  using Item = std::tuple<double, int, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist.at(src.row, src.col) = 0.0;
  pq.emplace(0.0, src.row, src.col);
  while (!pq.empty()) {
    const auto [d, r, c] = pq.top();
    pq.pop();
    if (done.at(r, c)) continue;
    done.at(r, c) = 1;
    if (r == dst.row && c == dst.col) break;
    for (int dr = -1; dr <= 1; ++dr)
      for (int dc = -1; dc <= 1; ++dc) {
        if (!dr && !dc) continue;
        const int nr = r + dr, nc = c + dc;
        if (!cost.in_bounds(nr, nc) || done.at(nr, nc)) continue;
        const double w = cost.at(nr, nc);
        if (!std::isfinite(w)) continue;
        const double nd = d + w * (dr && dc ? std::numbers::sqrt2 : 1.0);
        double& cur = dist.at(nr, nc);
        int& p = pred.at(nr, nc);
        const int self = r * cost.cols + c;
        if (nd < cur || (nd == cur && self < p)) {
          const bool improved = nd < cur;
          cur = nd;
          p = self;
          if (improved) pq.emplace(nd, nr, nc);
        }
      }
  }
  if (!std::isfinite(dist.at(dst.row, dst.col))) return std::nullopt;
  PlanResult out;
  out.cost = dist.at(dst.row, dst.col);
  for (int idx = dst.row * cost.cols + dst.col;; idx = pred.data[idx]) {
    out.path.push_back({idx / cost.cols, idx % cost.cols});
    if (idx == src.row * cost.cols + src.col) break;
  }
  std::reverse(out.path.begin(), out.path.end());
  return out;
}

/// Speed over a path segment. Full speed when every cell is observed free;
/// otherwise v_max * 2(1 - q) with q the worst occupancy probability (observed
/// if known, else predicted if known, else 0.5), clamped to
/// [v_min_fraction * v_max, v_max].
inline double compute_speed(const std::vector<Cell>& segment, const GlobalMap& g, const NavConfig& cfg,
                            const OccupancyConfig& occ) {
  bool all_free = true;
  double q = 0.0;
  for (const auto& c : segment) {
    const double po = logodds_to_prob(g.observed.at(c.row, c.col));
    const auto so = classify(po, occ);
    double p = 0.5;
    if (so != CellState::unknown) {
      p = po;
    } else if (is_known(g.predicted.at(c.row, c.col), occ)) {
      p = g.predicted.at(c.row, c.col);
    }
    const bool counts_free =
        so == CellState::free ||
        (cfg.full_speed_inpainted && so == CellState::unknown && classify(p, occ) == CellState::free);
    all_free = all_free && counts_free;
    q = std::max(q, p);
  }
  if (all_free) return cfg.v_max;
  return std::clamp(cfg.v_max * 2.0 * (1.0 - q), cfg.v_min_fraction * cfg.v_max, cfg.v_max);
}

struct EpisodeSpec {
  std::uint64_t world_id = 0;
  Vec2 src;
  Vec2 dst;
  double yaw = 0.0;
  std::uint64_t seed = 0;
};

enum class Termination { reached, step_budget, error };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::reached: return "reached";
    case Termination::step_budget: return "step_budget";
    case Termination::error: return "error";
  }
  return "?";
}

struct EpisodeResult {
  bool success = false;
  double duration = 0.0;   // p_i, seconds
  double reference = 0.0;  // l_i, seconds
  int actions = 0;
  std::vector<Pose2D> trajectory;
  Termination termination = Termination::step_budget;
};

enum class Sensing { center, three_camera };

struct Method {
  std::string name;
  Sensing sensing = Sensing::center;
  const models::Predictor* predictor = nullptr;  // null: no map augmentation
};

struct SimContext {
  CameraIntrinsics intrinsics;
  CameraRig rig;
  GridSpec grid;
  OccupancyConfig occupancy;
  NavConfig nav;
  CostMapConfig cost;
};

namespace detail {

/// True cell state at nav resolution plus the analytic solid test.
inline bool collides(const FloorPlan& plan, const Grid<std::uint8_t>& nav_truth, const GlobalMap& g, Vec2 p) {
  if (plan.is_solid(p)) return true;
  const auto c = g.cell_of(p);
  return !c || nav_truth.at(c->row, c->col);
}

/// Cells after `path[0]` up to the end of the first straight run.
inline std::vector<Cell> first_segment(const std::vector<Cell>& path) {
  std::vector<Cell> seg;
  if (path.size() < 2) return seg;
  const int dr = path[1].row - path[0].row, dc = path[1].col - path[0].col;
  seg.push_back(path[1]);
  for (std::size_t k = 2; k < path.size(); ++k) {
    if (path[k].row - path[k - 1].row != dr || path[k].col - path[k - 1].col != dc) break;
    seg.push_back(path[k]);
  }
  return seg;
}

template <typename Sense>
EpisodeResult simulate(const FloorPlan& plan, const EpisodeSpec& spec, const SimContext& ctx, GlobalMap& map,
                       Sense&& sense) {
  const auto& nav = ctx.nav;
  const auto nav_truth = rasterize(plan, nav.cell);
  EpisodeResult res;
  Pose2D pose(spec.src.x, spec.src.y, spec.yaw);
  res.trajectory.push_back(pose);
  const auto dst_cell = map.cell_of(spec.dst);
  if (!dst_cell) throw Error(ErrorKind::usage, "episode: dst outside the map");
  const Vec2 goal = map.center(*dst_cell);
  const double tol = deg2rad(nav.los_tolerance_deg);
  while (true) {
    if (distance(pose.position(), goal) <= nav.success_radius() + 1e-9) {
      res.termination = Termination::reached;
      res.success = true;
      break;
    }
    if (res.actions >= nav.s_max) {
      res.termination = Termination::step_budget;
      break;
    }
    sense(map, pose);
    const auto cost = build_costmap(map, ctx.cost, ctx.occupancy);
    const auto here = map.cell_of(pose.position());
    const auto route = here ? occnav::nav::plan(cost, *here, *dst_cell) : std::nullopt;
    if (!route) {
      res.termination = Termination::error;
      break;
    }
    const auto seg = first_segment(route->path);
    const Vec2 target = seg.empty() ? goal : map.center(seg.back());
    const Vec2 delta = target - pose.position();
    const double dist = norm(delta);
    const double bearing = dist > 1e-12 ? std::atan2(delta.y, delta.x) : pose.yaw;
    const double turn = std::fabs(normalize_angle(bearing - pose.yaw));
    if (turn <= tol) {
      const double step = std::min(nav.move_step, dist);
      const Vec2 next = pose.position() + (step / std::max(dist, 1e-12)) * delta;
      ++res.actions;
      if (collides(plan, nav_truth, map, next)) {
        res.termination = Termination::error;
        break;
      }
      const double v = compute_speed(seg.empty() ? std::vector<Cell>{*dst_cell} : seg, map, nav, ctx.occupancy);
      res.duration += step / v;
      pose = Pose2D(next.x, next.y, bearing);
    } else {
      ++res.actions;
      res.duration += turn / deg2rad(nav.omega_max_deg);
      pose = Pose2D(pose.x, pose.y, bearing);
    }
    res.trajectory.push_back(pose);
  }
  return res;
}

}  // namespace detail

/// Local observation at `robot`: the center camera alone, or the fusion of
/// all three rig cameras (cameras that would sit inside a solid are skipped).
inline LogOddsGrid sense_local(const FloorPlan& plan, const Pose2D& robot, Sensing sensing, const SimContext& ctx) {
  const auto rp = rig_poses(robot, ctx.rig);
  auto view = [&](const Pose2D& cam) {
    if (plan.is_solid(cam.position())) return LogOddsGrid(ctx.grid);
    return camera_map(plan, cam, robot, ctx.intrinsics, ctx.grid, ctx.occupancy);
  };
  const auto oc = view(rp.center);
  if (sensing == Sensing::center) return oc;
  return fuse3(oc, view(rp.left), view(rp.right));
}

/// One navigation episode: sense, augment, fuse into the global map, plan,
/// then either rotate toward the next waypoint or step toward it.
inline EpisodeResult run_episode(const FloorPlan& plan, const EpisodeSpec& spec, const Method& method,
                                 const SimContext& ctx) {
  GlobalMap map(plan, ctx.nav.cell);
  return detail::simulate(plan, spec, ctx, map, [&](GlobalMap& m, const Pose2D& robot) {
    const auto obs = sense_local(plan, robot, method.sensing, ctx);
    const auto obs_p = logodds_to_prob(obs);
    const auto inpainted = method.predictor ? models::predict_inpaint(*method.predictor, obs_p, ctx.occupancy) : obs_p;
    update_global(m, obs, inpainted, robot, ctx.occupancy);
  });
}

/// Map built from the true geometry: every cell observed, at full evidence.
inline GlobalMap full_knowledge_map(const FloorPlan& plan, const SimContext& ctx) {
  GlobalMap map(plan, ctx.nav.cell);
  const auto truth = rasterize(plan, ctx.nav.cell);
  const float sat = static_cast<float>(ctx.occupancy.m * ctx.occupancy.clip_counts);
  for (std::size_t i = 0; i < truth.size(); ++i) map.observed.data[i] = truth.data[i] ? sat : -sat;
  return map;
}

/// l_i: the same simulator on a fixed full-knowledge map (no sensing).
inline EpisodeResult reference_run(const FloorPlan& plan, const EpisodeSpec& spec, const SimContext& ctx) {
  auto map = full_knowledge_map(plan, ctx);
  return detail::simulate(plan, spec, ctx, map, [](GlobalMap&, const Pose2D&) {});
}

inline double reference_duration(const FloorPlan& plan, const EpisodeSpec& spec, const SimContext& ctx) {
  const auto r = reference_run(plan, spec, ctx);
  if (!r.success) throw Error(ErrorKind::usage, "reference_duration: destination not reached on full-knowledge map");
  return r.duration;
}

/// (1/N) sum S_i * l_i / max(p_i, l_i); a success with p_i = l_i = 0 scores 1.
inline std::optional<double> spd(const std::vector<EpisodeResult>& results) {
  if (results.empty()) return std::nullopt;
  double acc = 0.0;
  for (const auto& r : results) {
    if (!r.success) continue;
    const double denom = std::max(r.duration, r.reference);
    acc += denom > 0.0 ? r.reference / denom : 1.0;
  }
  return acc / static_cast<double>(results.size());
}

inline double success_rate(const std::vector<EpisodeResult>& results) {
  if (results.empty()) return 0.0;
  const auto n = std::count_if(results.begin(), results.end(), [](const auto& r) { return r.success; });
  return static_cast<double>(n) / static_cast<double>(results.size());
}

/// Seeded episode specs over `plans` (episode i uses plan i mod |plans|). src
/// and dst are free nav-cell centers in one 4-connected component, at least
/// min_episode_distance apart, and the full-knowledge run reaches dst.
inline std::vector<EpisodeSpec> make_episode_specs(const std::vector<FloorPlan>& plans, int n, std::uint64_t seed,
                                                   const SimContext& ctx) {
  if (plans.empty()) throw config_error("episode generation needs at least one world");
  std::vector<EpisodeSpec> out;
  const double cell = ctx.nav.cell;
  for (int i = 0; i < n; ++i) {
    const auto& plan = plans[static_cast<std::size_t>(i) % plans.size()];
    const auto raster = rasterize(plan, cell);
    std::vector<Cell> free_cells;
    for (int r = 0; r < raster.rows; ++r)
      for (int c = 0; c < raster.cols; ++c)
        if (!raster.at(r, c)) free_cells.push_back({r, c});
    if (free_cells.empty()) throw config_error("world has no free cells");
    const std::uint64_t ep_seed = mix_seed(seed, static_cast<std::uint64_t>(i));
    Rng rng(ep_seed);
    bool found = false;
    for (int attempt = 0; attempt < 1000 && !found; ++attempt) {
      const Cell s = free_cells[rng.uniform_int(0, static_cast<std::int64_t>(free_cells.size()) - 1)];
      const Vec2 src = cell_center(plan, cell, s);
      std::vector<Cell> cand;
      for (const auto& c : reachable_cells(plan, cell, src))
        if (distance(cell_center(plan, cell, c), src) >= ctx.nav.min_episode_distance) cand.push_back(c);
      if (cand.empty()) continue;
      const Cell d = cand[rng.uniform_int(0, static_cast<std::int64_t>(cand.size()) - 1)];
      EpisodeSpec spec{plan.seed, src, cell_center(plan, cell, d), rng.uniform(-std::numbers::pi, std::numbers::pi),
                       ep_seed};
      spec.yaw = normalize_angle(spec.yaw);
      if (!reference_run(plan, spec, ctx).success) continue;
      out.push_back(spec);
      found = true;
    }
    if (!found) throw Error(ErrorKind::numeric, "could not generate episode " + std::to_string(i));
  }
  return out;
}

struct SuiteResult {
  std::string method;
  std::vector<EpisodeSpec> specs;
  std::vector<EpisodeResult> results;
  double spd = 0.0;
  double success_rate = 0.0;
};

/// Runs every spec with `method`; l_i comes from the full-knowledge run.
inline SuiteResult run_suite(const std::vector<FloorPlan>& plans, const std::vector<EpisodeSpec>& specs,
                             const Method& method, const SimContext& ctx) {
  SuiteResult out;
  out.method = method.name;
  out.specs = specs;
  for (const auto& spec : specs) {
    const auto it = std::find_if(plans.begin(), plans.end(), [&](const FloorPlan& p) { return p.seed == spec.world_id; });
    if (it == plans.end()) throw config_error("episode references unknown world " + std::to_string(spec.world_id));
    auto r = run_episode(*it, spec, method, ctx);
    r.reference = reference_duration(*it, spec, ctx);
    out.results.push_back(std::move(r));
  }
  out.spd = spd(out.results).value_or(0.0);
  out.success_rate = success_rate(out.results);
  return out;
}

}  // namespace occnav::nav
