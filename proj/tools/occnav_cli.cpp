// occnav command-line driver: worlds, datasets, training, evaluation,
// navigation suites and rendering. Exit codes: 0 ok, 1 usage, 2 config,
// 3 io, 4 data format, 5 numeric failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "occnav.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace occnav;

namespace {

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io_error("cannot create directory " + dir + ": " + ec.message());
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot write " + path);
  f << text;
  if (!f) throw io_error("write failed: " + path);
}

// A dataset argument may name the OCCD file itself or a gen-data directory.
std::string dataset_path(const std::string& arg, const char* split) {
  return fs::is_directory(arg) ? (fs::path(arg) / (std::string(split) + ".occd")).string() : arg;
}

std::vector<FloorPlan> make_worlds(const RunConfig& cfg, const std::vector<std::uint64_t>& ids) {
  std::vector<FloorPlan> out;
  for (auto id : ids) out.push_back(generate_world(cfg.world_spec(id)));
  return out;
}

std::vector<std::uint64_t> nav_world_ids(const RunConfig& cfg) {
  const auto& ids = cfg.nav_worlds.empty() ? cfg.dataset.test_worlds : cfg.nav_worlds;
  if (ids.empty()) throw config_error("no navigation worlds: set nav_worlds or dataset.test_worlds");
  return ids;
}

std::string join(const std::vector<std::uint64_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s;
}

// ---- gen-world ----

void gen_world(const std::string& config, const std::string& out) {
  const auto cfg = load_run_config(config);
  make_dir(out);
  auto ids = cfg.dataset.train_worlds;
  ids.insert(ids.end(), cfg.dataset.test_worlds.begin(), cfg.dataset.test_worlds.end());
  ids.insert(ids.end(), cfg.nav_worlds.begin(), cfg.nav_worlds.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  for (auto id : ids) {
    const auto plan = generate_world(cfg.world_spec(id));
    save_world(plan, (fs::path(out) / ("world_" + std::to_string(id) + ".txt")).string());
    std::cout << "world " << id << ": " << plan.obstacles.size() << " obstacles\n";
  }
}

// ---- gen-data ----

void gen_data(const std::string& config, const std::string& out) {
  const auto cfg = load_run_config(config);
  make_dir(out);
  std::ostringstream meta;
  meta << "config_hash " << cfg.hash() << "\n";
  meta << "seed " << cfg.seed << "\n";
  meta << "resolution " << cfg.grid.resolution << "\n";
  for (const auto& [split, ids] : {std::pair{"train", cfg.dataset.train_worlds}, std::pair{"test", cfg.dataset.test_worlds}}) {
    std::vector<SamplePair> pairs;
    meta << split << "_worlds " << join(ids) << "\n";
    for (auto id : ids) {
      const auto plan = generate_world(cfg.world_spec(id));
      auto w = build_world_pairs(plan, cfg.dataset, cfg.rig, cfg.intrinsics, cfg.grid, cfg.occupancy);
      meta << split << "_world " << id << " pairs " << w.size() << "\n";
      std::move(w.begin(), w.end(), std::back_inserter(pairs));
    }
    meta << split << "_pairs " << pairs.size() << "\n";
    save_dataset(pairs, (fs::path(out) / (std::string(split) + ".occd")).string());
    std::cout << split << ": " << pairs.size() << " pairs from " << ids.size() << " worlds\n";
  }
  meta << "config " << cfg.canonical << "\n";
  write_file((fs::path(out) / "metadata.txt").string(), meta.str());
}

// ---- train ----

void train(const std::string& config, const std::string& data, const std::string& method, const std::string& out) {
  auto cfg = load_run_config(config);
  auto tc = cfg.train;
  const bool gan = method == "gan";
  if (method == "pred-bce") tc.pred_loss = models::PredLoss::bce;
  else if (method == "pred-mse") tc.pred_loss = models::PredLoss::mse;
  else if (!gan) throw usage_error("--method must be pred-bce, pred-mse or gan");

  auto [tr, va] = models::split_validation(load_dataset(dataset_path(data, "train")), cfg.validation_fraction, cfg.seed);
  if (tr.empty()) throw format_error("training set is empty");
  std::cout << "training " << method << " on " << tr.size() << " pairs, validating on " << va.size() << "\n";
  const auto res = gan ? models::train_gan(tr, va, tc) : models::train_pred(tr, va, tc);

  const std::string name = gan ? "unet-gan" : (method == "pred-bce" ? "unet-pred-bce" : "unet-pred-mse");
  const auto& h = res.history;
  auto w = models::to_weights(res.generator, {{"method", name},
                                               {"seed", std::to_string(cfg.seed)},
                                               {"config_hash", cfg.hash()},
                                               {"epochs", std::to_string(h.epochs.size())},
                                               {"best_epoch", std::to_string(h.best_epoch)},
                                               {"stop_reason", h.stop_reason}});
  models::save_weights(w, out);

  std::ostringstream hist;
  hist << "epoch\ttrain_loss\ttrain_l1\tval_l1\td_loss\n";
  for (const auto& e : h.epochs)
    hist << e.epoch << '\t' << format_double(e.train_loss) << '\t' << format_double(e.train_l1) << '\t'
         << format_double(e.val_l1) << '\t' << format_double(e.d_loss) << '\n';
  write_file(out + ".history.tsv", hist.str());
  std::cout << "epochs " << h.epochs.size() << ", best " << h.best_epoch << " (val_l1 "
            << (h.best_epoch ? format_double(h.epochs[h.best_epoch - 1].val_l1) : "n/a") << "), stop " << h.stop_reason
            << "\n";
}

// ---- eval-inpaint ----

// Per-sample accuracy and inpainted fraction of the overwritten map, averaged
// over samples where each is defined.
json eval_report(const std::string& name, const std::vector<SamplePair>& pairs, const OccupancyConfig& occ,
                 const std::function<ProbGrid(const SamplePair&)>& complete, const std::string& hash) {
  std::vector<double> accs;
  double inp_sum = 0.0;
  std::size_t inp_n = 0;
  for (const auto& p : pairs) {
    const auto out = complete(p);
    if (auto a = models::inpaint_accuracy(out, p.target, occ)) accs.push_back(100.0 * *a);
    if (auto f = models::inpainted_fraction(p.input, out, occ)) {
      inp_sum += *f;
      ++inp_n;
    }
  }
  double acc = 0.0;
  for (double a : accs) acc += a;
  json r;
  r["method"] = name;
  r["n_samples"] = pairs.size();
  r["n_accuracy"] = accs.size();
  r["accuracy_pct"] = accs.empty() ? json() : json(acc / accs.size());
  r["inpainted_pct"] = inp_n ? json(inp_sum / inp_n) : json();
  const auto hist = models::accuracy_histogram(accs);
  r["histogram"] = std::vector<int>(hist.begin(), hist.end());
  r["config_hash"] = hash;
  return r;
}

void eval_inpaint(const std::string& weights, const std::string& baseline, const std::string& data,
                  const std::string& config, const std::string& out) {
  const OccupancyConfig occ = config.empty() ? OccupancyConfig{} : load_run_config(config).occupancy;
  std::optional<models::ModelWeights> w;
  if (!weights.empty()) w = models::load_weights(weights);
  const auto pairs = load_dataset(dataset_path(data, "test"));
  if (pairs.empty()) throw format_error("evaluation set is empty");
  json r;
  if (w) {
    const models::GeneratorPredictor pred(models::generator_from_weights(*w));
    const auto it = w->descriptor.find("method");
    const auto ch = w->descriptor.find("config_hash");
    r = eval_report(it == w->descriptor.end() ? "generator" : it->second, pairs, occ,
                    [&](const SamplePair& p) { return models::predict_inpaint(pred, p.input, occ); },
                    ch == w->descriptor.end() ? "" : ch->second);
  } else if (baseline == "identity") {
    r = eval_report("identity", pairs, occ, [](const SamplePair& p) { return p.input; }, "");
  } else if (baseline == "ground-truth") {
    r = eval_report("ground-truth", pairs, occ, [](const SamplePair& p) { return p.target; }, "");
  } else {
    throw usage_error("give --weights or --baseline identity|ground-truth");
  }
  const std::string text = r.dump(2) + "\n";
  if (out.empty()) std::cout << text;
  else write_file(out, text);
}

// ---- simulate ----

json episode_record(std::size_t i, const nav::EpisodeSpec& s, const nav::EpisodeResult& r) {
  json e;
  e["episode"] = i;
  e["world"] = s.world_id;
  e["src"] = {s.src.x, s.src.y};
  e["dst"] = {s.dst.x, s.dst.y};
  e["yaw"] = s.yaw;
  e["success"] = r.success;
  e["duration"] = r.duration;
  e["reference"] = r.reference;
  e["actions"] = r.actions;
  e["termination"] = nav::to_string(r.termination);
  json traj = json::array();
  for (const auto& p : r.trajectory) traj.push_back({p.x, p.y, p.yaw});
  e["trajectory"] = traj;
  return e;
}

void simulate(const std::string& config, const std::string& weights, const std::string& method, int episodes,
              const std::string& out) {
  if (episodes < 1) throw usage_error("--episodes must be at least 1");
  const auto cfg = load_run_config(config);
  const auto ctx = cfg.sim_context();
  nav::Method m{method};
  std::unique_ptr<models::GeneratorPredictor> pred;
  if (method == "gt3cam") {
    m.sensing = nav::Sensing::three_camera;
  } else if (method == "inpaint") {
    if (weights.empty()) throw usage_error("--method inpaint needs --weights");
    const auto w = models::load_weights(weights);
    pred = std::make_unique<models::GeneratorPredictor>(models::generator_from_weights(w));
    m.predictor = pred.get();
    if (auto it = w.descriptor.find("method"); it != w.descriptor.end()) m.name = it->second;
  } else if (method != "normal") {
    throw usage_error("--method must be normal, gt3cam or inpaint");
  }
  const auto plans = make_worlds(cfg, nav_world_ids(cfg));
  const auto specs = nav::make_episode_specs(plans, episodes, cfg.seed, ctx);
  const auto suite = nav::run_suite(plans, specs, m, ctx);

  make_dir(out);
  std::ostringstream log;
  for (std::size_t i = 0; i < specs.size(); ++i) log << episode_record(i, specs[i], suite.results[i]).dump() << "\n";
  write_file((fs::path(out) / "episodes.jsonl").string(), log.str());
  json s;
  s["method"] = suite.method;
  s["spd"] = suite.spd;
  s["success_rate"] = suite.success_rate;
  s["n_episodes"] = specs.size();
  s["config_hash"] = cfg.hash();
  write_file((fs::path(out) / "summary.json").string(), s.dump(2) + "\n");
  std::cout << s.dump(2) << "\n";
}

// ---- render ----

// Text grid: "rows cols" then rows*cols probabilities in row-major order.
Grid<float> read_text_grid(const std::string& text) {
  std::istringstream is(text);
  int rows = 0, cols = 0;
  if (!(is >> rows >> cols) || rows <= 0 || cols <= 0) throw format_error("grid file must start with 'rows cols'");
  Grid<float> g(rows, cols);
  for (auto& v : g.data)
    if (!(is >> v)) throw format_error("grid file has fewer than rows*cols values");
  std::string extra;
  if (is >> extra) throw format_error("grid file has trailing data");
  return g;
}

// Truth raster with y up; trajectory poses marked in red.
Image render_episode(const FloorPlan& plan, const json& ep, int px_per_cell) {
  const double cell = plan.truth_cell;
  const auto& truth = plan.truth_grid;
  Image img(truth.cols * px_per_cell, truth.rows * px_per_cell, 3);
  for (int r = 0; r < truth.rows; ++r)
    for (int c = 0; c < truth.cols; ++c) {
      const std::uint8_t v = prob_to_gray(truth.at(r, c) ? 1.0 : 0.0);
      for (int dy = 0; dy < px_per_cell; ++dy)
        for (int dx = 0; dx < px_per_cell; ++dx) {
          auto* p = img.px(c * px_per_cell + dx, (truth.rows - 1 - r) * px_per_cell + dy);
          p[0] = p[1] = p[2] = v;
        }
    }
  auto mark = [&](double x, double y, std::uint8_t red, std::uint8_t green) {
    const int px = static_cast<int>((x - plan.boundary.x0) / cell * px_per_cell);
    const int py = img.height - 1 - static_cast<int>((y - plan.boundary.y0) / cell * px_per_cell);
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx)
        if (px + dx >= 0 && px + dx < img.width && py + dy >= 0 && py + dy < img.height) {
          auto* p = img.px(px + dx, py + dy);
          p[0] = red;
          p[1] = green;
          p[2] = 0;
        }
  };
  for (const auto& p : ep.at("trajectory")) mark(p.at(0).get<double>(), p.at(1).get<double>(), 255, 0);
  mark(ep.at("src").at(0).get<double>(), ep.at("src").at(1).get<double>(), 0, 255);
  mark(ep.at("dst").at(0).get<double>(), ep.at("dst").at(1).get<double>(), 255, 255);
  return img;
}

void render(const std::string& in, const std::string& out, int pair, const std::string& layer,
            const std::string& weights, int episode, const std::string& config, double stretch) {
  const std::string bytes = read_file(in);
  Image img;
  if (bytes.rfind("OCCD", 0) == 0) {
    const auto pairs = read_dataset(bytes);
    if (pair < 0 || pair >= static_cast<int>(pairs.size()))
      throw usage_error("--pair out of range (dataset has " + std::to_string(pairs.size()) + " pairs)");
    const auto& p = pairs[pair];
    if (layer == "input") {
      img = render_prob(p.input.values, stretch);
    } else if (layer == "target") {
      img = render_prob(p.target.values, stretch);
    } else if (layer == "prediction") {
      if (weights.empty()) throw usage_error("--layer prediction needs --weights");
      const models::GeneratorPredictor pred(models::generator_from_weights(models::load_weights(weights)));
      const OccupancyConfig occ = config.empty() ? OccupancyConfig{} : load_run_config(config).occupancy;
      img = render_prob(models::predict_inpaint(pred, p.input, occ).values, stretch);
    } else {
      throw usage_error("--layer must be input, target or prediction");
    }
  } else if (in.ends_with(".jsonl")) {
    if (config.empty()) throw usage_error("rendering an episode log needs --config to rebuild its world");
    const auto cfg = load_run_config(config);
    std::istringstream is(bytes);
    std::string line;
    for (int i = 0; i <= episode; ++i)
      if (!std::getline(is, line)) throw usage_error("--episode out of range");
    json ep;
    try {
      ep = json::parse(line);
      img = render_episode(generate_world(cfg.world_spec(ep.at("world").get<std::uint64_t>())), ep, 4);
    } catch (const json::exception& e) {
      throw format_error(std::string("malformed episode record: ") + e.what());
    }
  } else if (bytes.rfind("# occnav floor plan", 0) == 0) {
    const auto plan = parse_world(bytes);
    Grid<float> g(plan.truth_grid.rows, plan.truth_grid.cols);
    for (int r = 0; r < g.rows; ++r)
      for (int c = 0; c < g.cols; ++c) g.at(g.rows - 1 - r, c) = plan.truth_grid.at(r, c) ? 1.0f : 0.0f;
    img = render_prob(g);
  } else {
    img = render_prob(read_text_grid(bytes), stretch);
  }
  write_pnm(img, out);
}

int exit_code(ErrorKind k) { return static_cast<int>(k); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"occnav: occupancy-map inpainting and navigation experiments"};
  app.require_subcommand(1);

  std::string config, out, data, method, weights, baseline, layer = "input", in;
  int episodes = 20, pair = 0, episode = 0;
  double stretch = 0.0;

  auto* gw = app.add_subcommand("gen-world", "Generate the configured worlds as description files");
  gw->add_option("--config", config, "Run config (JSON)")->required();
  gw->add_option("--out", out, "Output directory")->required();

  auto* gd = app.add_subcommand("gen-data", "Build train/test OCCD datasets and metadata");
  gd->add_option("--config", config, "Run config (JSON)")->required();
  gd->add_option("--out", out, "Output directory")->required();

  auto* tr = app.add_subcommand("train", "Train a generator; writes OCCW weights and a loss history");
  tr->add_option("--config", config, "Run config (JSON)")->required();
  tr->add_option("--data", data, "gen-data directory or OCCD file")->required();
  tr->add_option("--method", method, "pred-bce | pred-mse | gan")->required();
  tr->add_option("--out", out, "Weights file")->required();

  auto* ev = app.add_subcommand("eval-inpaint", "Accuracy, inpainted fraction and histogram on a dataset");
  ev->add_option("--weights", weights, "OCCW weights");
  ev->add_option("--baseline", baseline, "identity | ground-truth (instead of --weights)");
  ev->add_option("--data", data, "gen-data directory (uses test.occd) or OCCD file")->required();
  ev->add_option("--config", config, "Run config for the occupancy thresholds");
  ev->add_option("--out", out, "Report file (default stdout)");

  auto* sim = app.add_subcommand("simulate", "Run a navigation suite and report SPD");
  sim->add_option("--config", config, "Run config (JSON)")->required();
  sim->add_option("--weights", weights, "OCCW weights for --method inpaint");
  sim->add_option("--method", method, "normal | gt3cam | inpaint")->required();
  sim->add_option("--episodes", episodes, "Number of episodes (>= 1)");
  sim->add_option("--out", out, "Output directory for episodes.jsonl and summary.json")->required();

  auto* rd = app.add_subcommand("render", "Render a grid, dataset pair, world or episode to PGM/PPM");
  rd->add_option("--in", in, "Text grid, OCCD dataset, world file or episodes.jsonl")->required();
  rd->add_option("--out", out, "Output image (.pgm or .ppm)")->required();
  rd->add_option("--pair", pair, "Dataset pair index");
  rd->add_option("--layer", layer, "input | target | prediction");
  rd->add_option("--weights", weights, "OCCW weights for --layer prediction");
  rd->add_option("--episode", episode, "Episode index in the log");
  rd->add_option("--config", config, "Run config (episode worlds, occupancy thresholds)");
  rd->add_option("--stretch", stretch, "Stretch [0.5-b, 0.5+b] to full range");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code(ErrorKind::usage);
  }

  try {
    if (*gw) gen_world(config, out);
    else if (*gd) gen_data(config, out);
    else if (*tr) train(config, data, method, out);
    else if (*ev) eval_inpaint(weights, baseline, data, config, out);
    else if (*sim) simulate(config, weights, method, episodes, out);
    else if (*rd) render(in, out, pair, layer, weights, episode, config, stretch);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(ErrorKind::numeric);
  }
  return 0;
}
