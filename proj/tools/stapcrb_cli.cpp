// Command-line front end: dataset generation, per-stage processing and the
// end-to-end sweeps.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stapcrb/bench.hpp"
#include "stapcrb/config_io.hpp"
#include "stapcrb/parallel.hpp"
#include "stapcrb/stap_io.hpp"

namespace fs = std::filesystem;
using namespace stapcrb;

namespace {

struct SceneFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> scnr_db;
  std::optional<int> snapshots;
  std::optional<double> velocity_step;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "scene JSON file")->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "master seed");
    app->add_option("--scnr", scnr_db, "target SCNR (dB)");
    app->add_option("--snapshots", snapshots, "secondary snapshots K");
    app->add_option("--velocity-step", velocity_step, "velocity grid step (m/s)");
  }

  SceneConfig resolve() const {
    SceneConfig cfg = config.empty() ? default_scene() : load_scene_file(config);
    if (seed) cfg.rng_seed = *seed;
    if (scnr_db) cfg.target_scnr_db = *scnr_db;
    if (snapshots) cfg.snapshots = *snapshots;
    if (velocity_step) cfg.velocity_step_mps = *velocity_step;
    cfg.validate();
    return cfg;
  }
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trial_dir_name(int trial) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "trial_%05d", trial);
  return buf;
}

std::string bin_file(const char* prefix, std::size_t b) {
  return std::string(prefix) + "_bin" + std::to_string(b) + ".stap";
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read " + path.string());
  return nlohmann::json::parse(is);
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path.string());
  return os;
}

// A stored trial: truth, realized signal statistics and the Y/Z matrices.
struct StoredTrial {
  int trial = 0;
  fs::path dir;
  TargetTruth truth;
  cplx mean_signal;
  double mean_power = 0.0;
};

struct Dataset {
  SceneConfig cfg;
  std::vector<StoredTrial> trials;
};

Dataset open_dataset(const fs::path& root) {
  Dataset ds;
  ds.cfg = load_scene_file((root / "scene.json").string());
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && entry.path().filename().string().rfind("trial_", 0) == 0) {
      dirs.push_back(entry.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw ConfigError("no trial directories under " + root.string());
  for (const auto& d : dirs) {
    const nlohmann::json j = read_json(d / "truth.json");
    StoredTrial t;
    t.trial = j.at("trial").get<int>();
    t.dir = d;
    t.truth = truth_from_json(j.at("truth"));
    t.mean_signal = {j.at("mean_signal_re").get<double>(), j.at("mean_signal_im").get<double>()};
    t.mean_power = j.at("mean_power").get<double>();
    ds.trials.push_back(t);
  }
  return ds;
}

std::vector<WhitenedBin> load_whitened(const SceneConfig& cfg, const fs::path& dir) {
  std::vector<WhitenedBin> bins;
  for (std::size_t b = 0; b < static_cast<std::size_t>(cfg.num_range_bins); ++b) {
    bins.push_back(whiten_bin(read_matrix_file((dir / bin_file("z", b)).string()),
                              read_matrix_file((dir / bin_file("y", b)).string())));
  }
  return bins;
}

std::vector<double> grid_axis(double min, int count, double step) {
  std::vector<double> v(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = min + i * step;
  return v;
}

HeatmapTensor load_heatmap(const SceneConfig& cfg, const StoredTrial& t) {
  HeatmapTensor h = read_tensor_file(
      (t.dir / "heatmap.stap").string(),
      grid_axis(cfg.azimuth_min_deg, cfg.azimuth_count(), cfg.azimuth_step_deg),
      grid_axis(cfg.velocity_min_mps, cfg.velocity_count(), cfg.velocity_step_mps));
  h.truth = t.truth;
  return h;
}

GdConfig gd_from_flag(const std::string& gradient) {
  GdConfig gd;
  gd.gradient_mode = gradient == "fd" ? GradientMode::kFiniteDifference : GradientMode::kAnalytic;
  return gd;
}

CrbScaling scaling_from_flag(const std::string& s) {
  return s == "snapshot" ? CrbScaling::kSnapshotScaled : CrbScaling::kPaperVerbatim;
}

CrbAmplitude amplitude_from_flag(const std::string& s) {
  return s == "power" ? CrbAmplitude::kSignalPower : CrbAmplitude::kMeanSignal;
}

void cmd_simulate(const SceneConfig& cfg, int trials, int workers, const fs::path& out) {
  fs::create_directories(out);
  save_scene_file(cfg, (out / "scene.json").string());
  const TrialPipeline pipeline(cfg);
  parallel_for(static_cast<std::size_t>(trials), workers, [&](std::size_t i) {
    const auto sim = pipeline.simulate(cfg.rng_seed, 0, static_cast<int>(i));
    const fs::path dir = out / trial_dir_name(static_cast<int>(i));
    fs::create_directories(dir);
    write_json(dir / "truth.json", {{"trial", static_cast<int>(i)},
                                    {"truth", truth_to_json(sim.truth)},
                                    {"mean_signal_re", sim.data.signal.mean.real()},
                                    {"mean_signal_im", sim.data.signal.mean.imag()},
                                    {"mean_power", sim.data.signal.mean_power()}});
    for (std::size_t b = 0; b < sim.data.y.size(); ++b) {
      write_matrix_file((dir / bin_file("y", b)).string(), sim.data.y[b].values);
      write_matrix_file((dir / bin_file("z", b)).string(), sim.data.z[b].values);
    }
  });
  std::cout << "wrote " << trials << " trials to " << out.string() << '\n';
}

void cmd_heatmap(const fs::path& root, int workers) {
  const Dataset ds = open_dataset(root);
  const SteeringGrid grid(ds.cfg, phase_centers(ds.cfg));
  parallel_for(ds.trials.size(), workers, [&](std::size_t i) {
    const StoredTrial& t = ds.trials[i];
    HeatmapTensor h = build_heatmap(grid, load_whitened(ds.cfg, t.dir));
    write_tensor_file((t.dir / "heatmap.stap").string(), h);
    std::ofstream csv = open_out(t.dir / "heatmap.csv");
    write_tensor_csv(csv, h);
  });
  std::cout << "wrote " << ds.trials.size() << " heatmaps\n";
}

void cmd_estimate(const fs::path& root, const std::string& gradient, const std::string& checkpoint,
                  int workers, const fs::path& out) {
  const Dataset ds = open_dataset(root);
  const SubarrayPhaseCenters z = phase_centers(ds.cfg);
  const SteeringGrid grid(ds.cfg, z);
  const GdConfig gd = gd_from_flag(gradient);
  std::optional<CnnModel> cnn;
  if (!checkpoint.empty()) cnn = load_checkpoint(checkpoint);

  std::vector<std::string> rows(ds.trials.size());
  parallel_for(ds.trials.size(), workers, [&](std::size_t i) {
    const StoredTrial& t = ds.trials[i];
    const std::vector<WhitenedBin> bins = load_whitened(ds.cfg, t.dir);
    HeatmapTensor h = build_heatmap(grid, bins);
    h.truth = t.truth;
    std::vector<Estimate> est{peak_cell_midpoint(h)};
    const WhitenedBin& target = bins[static_cast<std::size_t>(t.truth.range_bin_index)];
    est.push_back(gd_estimate(GdProblem{ds.cfg, z, target.whitener, target.y}, est[0], t.truth, gd));
    if (cnn) est.push_back(predict(*cnn, h));
    std::ostringstream os;
    for (const Estimate& e : est) {
      os << t.trial << ',' << to_string(e.method) << ',' << num(e.azimuth_deg) << ',' << num(e.velocity_mps)
         << ',' << e.iterations_used << ',' << num(e.final_loss) << '\n';
    }
    rows[i] = os.str();
  });
  std::ofstream os = open_out(out);
  os << "trial_id,method,theta_hat,v_hat,iterations,final_loss\n";
  for (const auto& r : rows) os << r;
  std::cout << "wrote " << out.string() << '\n';
}

void cmd_crb(const fs::path& root, const std::string& axis, const std::string& scaling,
             const std::string& amplitude, const fs::path& out) {
  const Dataset ds = open_dataset(root);
  const SubarrayPhaseCenters z = phase_centers(ds.cfg);
  const CovarianceModel model = build_covariance(ds.cfg, z);
  const InterferenceSolver solver(model.total());
  const CrbScaling sc = scaling_from_flag(scaling);
  std::vector<CrbReport> reports;
  for (const StoredTrial& t : ds.trials) {
    const double power = amplitude == "power" ? t.mean_power : std::norm(t.mean_signal);
    reports.push_back(crb_report(ds.cfg, z, solver, t.truth, power, sc));
  }
  const CrbAverage avg = crb_sweep_average(reports);
  const double value = sweep_axis_from_string(axis) == SweepAxis::kScnr ? ds.cfg.target_scnr_db
                                                                        : ds.cfg.snapshots;
  std::ofstream os = open_out(out);
  os << "sweep_axis,sweep_value,crb_theta_deg2,crb_vel_mps2,scaling_mode,excluded_trials\n";
  os << axis << ',' << num(value) << ',' << num(avg.crb_theta) << ',' << num(avg.crb_velocity) << ','
     << to_string(sc) << ',' << avg.excluded << '\n';
  std::cout << "wrote " << out.string() << '\n';
}

void cmd_train(const fs::path& root, TrainConfig tc, const fs::path& out) {
  const Dataset ds = open_dataset(root);
  std::vector<HeatmapTensor> tensors;
  for (const StoredTrial& t : ds.trials) tensors.push_back(load_heatmap(ds.cfg, t));
  const CnnArchitecture arch{ds.cfg.num_range_bins, ds.cfg.azimuth_count(), ds.cfg.velocity_count()};
  TrainResult res = train(tensors, tc, arch, RegionBox::from_scene(ds.cfg));
  fs::create_directories(out);
  save_checkpoint(res.model, (out / "model.ckpt").string());
  write_training_log(res.log, (out / "train_log.csv").string());
  std::cout << "trained " << res.log.size() << " epochs (best " << res.best_epoch << "), wrote "
            << (out / "model.ckpt").string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Space-time radar simulation and azimuth/velocity estimation benchmark"};
  app.require_subcommand(1);

  SceneFlags scene;
  int trials = 100;
  int workers = 1;
  bool full_scale = false;
  std::string out = "out";
  std::string dataset;
  std::string axis = "scnr";
  std::string gradient = "analytic";
  std::string crb_scaling = "verbatim";
  std::string crb_amplitude = "mean";
  std::string checkpoint;
  std::string input_norm = "max";
  bool no_cnn = false;
  const std::vector<std::string> axes{"scnr", "snapshots"};

  auto* sim = app.add_subcommand("simulate", "emit a trial dataset");
  scene.attach(sim);
  sim->add_option("--trials", trials, "number of trials")->check(CLI::PositiveNumber);
  sim->add_option("--out", out, "output directory");
  sim->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);

  auto* heat = app.add_subcommand("heatmap", "compute NAMF tensors for a dataset");
  heat->add_option("--dataset", dataset, "dataset directory")->required();
  heat->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);

  auto* est = app.add_subcommand("estimate", "run MP, GD and optionally the CNN on a dataset");
  est->add_option("--dataset", dataset, "dataset directory")->required();
  est->add_option("--gradient", gradient, "GD gradient")->check(CLI::IsMember({"analytic", "fd"}));
  est->add_option("--checkpoint", checkpoint, "CNN checkpoint")->check(CLI::ExistingFile);
  est->add_option("--out", out, "output CSV");
  est->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);

  auto* crb = app.add_subcommand("crb", "average CRB over the dataset truths");
  crb->add_option("--dataset", dataset, "dataset directory")->required();
  crb->add_option("--axis", axis, "sweep axis label")->check(CLI::IsMember(axes));
  crb->add_option("--crb-scaling", crb_scaling, "CRB scaling")->check(CLI::IsMember({"verbatim", "snapshot"}));
  crb->add_option("--crb-amplitude", crb_amplitude, "|mean S|^2 or mean |S|^2")
      ->check(CLI::IsMember({"mean", "power"}));
  crb->add_option("--out", out, "output CSV");

  TrainConfig tc;
  auto* tr = app.add_subcommand("train", "train the CNN on a dataset's heatmaps");
  tr->add_option("--dataset", dataset, "dataset directory")->required();
  tr->add_option("--seed", tc.seed, "training seed");
  tr->add_option("--epochs", tc.epochs, "maximum epochs");
  tr->add_option("--input-norm", input_norm, "tensor normalization")->check(CLI::IsMember({"max", "raw"}));
  tr->add_option("--weight-decay", tc.weight_decay, "decoupled weight decay")->check(CLI::NonNegativeNumber);
  tr->add_flag("--shift-azimuth", tc.shift_azimuth, "cyclic azimuth-roll augmentation");
  tr->add_option("--out", out, "output directory");
  tr->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);

  auto* sw = app.add_subcommand("sweep", "end-to-end SCNR or snapshot sweep");
  scene.attach(sw);
  sw->add_option("--axis", axis, "sweep axis")->check(CLI::IsMember(axes));
  sw->add_option("--trials", trials, "trials per point (default 2000)");
  sw->add_flag("--full-scale", full_scale, "10000 trials per point");
  sw->add_option("--gradient", gradient, "GD gradient")->check(CLI::IsMember({"analytic", "fd"}));
  sw->add_option("--crb-scaling", crb_scaling, "CRB drawn in the plots")
      ->check(CLI::IsMember({"verbatim", "snapshot"}));
  sw->add_option("--crb-amplitude", crb_amplitude, "|mean S|^2 or mean |S|^2")
      ->check(CLI::IsMember({"mean", "power"}));
  sw->add_option("--input-norm", input_norm, "CNN tensor normalization")->check(CLI::IsMember({"max", "raw"}));
  sw->add_option("--weight-decay", tc.weight_decay, "CNN decoupled weight decay")->check(CLI::NonNegativeNumber);
  sw->add_flag("--shift-azimuth", tc.shift_azimuth, "CNN azimuth-roll augmentation");
  sw->add_flag("--no-cnn", no_cnn, "skip CNN training and evaluation");
  sw->add_option("--out", out, "output directory");
  sw->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    tc.workers = workers;
    tc.input_norm = input_norm == "raw" ? InputNormalization::kRaw : InputNormalization::kMaxNormalized;
    if (sim->parsed()) {
      cmd_simulate(scene.resolve(), trials, workers, out);
    } else if (heat->parsed()) {
      cmd_heatmap(dataset, workers);
    } else if (est->parsed()) {
      cmd_estimate(dataset, gradient, checkpoint, workers, out == "out" ? "out/estimates.csv" : out);
    } else if (crb->parsed()) {
      cmd_crb(dataset, axis, crb_scaling, crb_amplitude, out == "out" ? "out/crb.csv" : out);
    } else if (tr->parsed()) {
      cmd_train(dataset, tc, out);
    } else if (sw->parsed()) {
      const SceneConfig cfg = scene.resolve();
      const int n = full_scale ? 10000 : (sw->count("--trials") ? trials : 2000);
      const SweepSpec spec = SweepSpec::standard(sweep_axis_from_string(axis), n, cfg.rng_seed);
      BenchOptions opts;
      opts.workers = workers;
      opts.gd = gd_from_flag(gradient);
      opts.train = tc;
      opts.crb_amplitude = amplitude_from_flag(crb_amplitude);
      opts.run_cnn = !no_cnn;
      opts.log = [](const std::string& msg) { std::cerr << msg << '\n'; };
      const SweepReport report = run_sweep(spec, cfg, opts);
      const EmitResult res = emit_report(report, out, scaling_from_flag(crb_scaling));
      for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << "wrote " << res.csv_path << '\n';
      for (const auto& p : res.plot_paths) std::cout << "wrote " << p << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
