// Acceptance suite: one PASS/FAIL line per criterion.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "stapcrb/bench.hpp"
#include "stapcrb/crb.hpp"
#include "stapcrb/estimators.hpp"
#include "stapcrb/heatmap.hpp"
#include "stapcrb/learned.hpp"
#include "stapcrb/parallel.hpp"
#include "stapcrb/steering.hpp"
#include "stapcrb/synth.hpp"

namespace fs = std::filesystem;
using namespace stapcrb;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Verdict criterion1() {
  const auto t0 = Clock::now();
  const SceneConfig cfg = default_scene();
  const SubarrayPhaseCenters z = phase_centers(cfg);
  RandomStream rng(derive_seed(101, StreamTag::kOracle, {1}));
  const double h_theta = 1e-6;
  const double h_v = 1e-4;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double th = deg_to_rad(cfg.azimuth_at(rng.uniform_int(0, cfg.azimuth_count() - 1)));
    const double v = cfg.velocity_at(rng.uniform_int(0, cfg.velocity_count() - 1));
    const double phi = cfg.elevation_rad;
    const SteeringDerivative d = steering_derivatives(cfg, z, th, phi, v);
    const CVector fd_th = (space_time_steering(cfg, z, th + h_theta, phi, v).values -
                           space_time_steering(cfg, z, th - h_theta, phi, v).values) /
                          (2.0 * h_theta);
    const CVector fd_v = (space_time_steering(cfg, z, th, phi, v + h_v).values -
                          space_time_steering(cfg, z, th, phi, v - h_v).values) /
                         (2.0 * h_v);
    worst = std::max(worst, (d.d_theta - fd_th).norm() / d.d_theta.norm());
    worst = std::max(worst, (d.d_velocity - fd_v).norm() / d.d_velocity.norm());
  }
  const double t = seconds_since(t0);
  return {worst < 1e-5 && t < 1.0, fmt("max rel err %.3e (< 1e-5), %.3f s (< 1 s)", worst, t)};
}

// Direct triple loop over the tensor definition, sharing only the whitening matrix.
double naive_namf(const CMatrix& w, const CVector& a, const CMatrix& y) {
  const Eigen::Index n = a.size();
  const Eigen::Index k = y.cols();
  std::vector<cplx> aw(static_cast<std::size_t>(n));
  double a_energy = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    cplx s = 0.0;
    for (Eigen::Index c = 0; c < n; ++c) s += w(r, c) * a(c);
    aw[static_cast<std::size_t>(r)] = s;
    a_energy += std::norm(s);
  }
  std::vector<cplx> yw(static_cast<std::size_t>(n * k));
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index r = 0; r < n; ++r) {
      cplx s = 0.0;
      for (Eigen::Index c = 0; c < n; ++c) s += w(r, c) * y(c, j);
      yw[static_cast<std::size_t>(j * n + r)] = s;
    }
  }
  double num = 0.0;
  double diag_sq = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    cplx proj = 0.0;
    double col = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) {
      const cplx v = yw[static_cast<std::size_t>(j * n + r)];
      proj += std::conj(aw[static_cast<std::size_t>(r)]) * v;
      col += std::norm(v);
    }
    num += std::norm(proj);
    diag_sq += col * col;
  }
  return num / (a_energy * std::sqrt(diag_sq));
}

Verdict criterion2() {
  const SceneConfig cfg = default_scene();
  const TrialPipeline pipeline(cfg);
  double worst = 0.0;
  int instances = 0;
  for (int trial = 0; trial < 2; ++trial) {
    const auto sim = pipeline.simulate(202, 0, trial);
    std::vector<CMatrix> zs, ys;  // zs: per-bin covariance estimates
    for (std::size_t b = 0; b < sim.data.y.size(); ++b) {
      zs.push_back(estimate_covariance(sim.data.z[b].values).matrix);
      ys.push_back(sim.data.y[b].values);
    }
    const HeatmapTensor t = build_heatmap(cfg, zs, ys, pipeline.centers());
    for (std::size_t b = 0; b < ys.size(); ++b, ++instances) {
      const Whitener w(zs[b]);
      for (int j = 0; j < t.n_az; ++j) {
        for (int l = 0; l < t.n_vel; ++l) {
          const CVector a = space_time_steering(cfg, pipeline.centers(), deg_to_rad(t.azimuth_deg[j]),
                                                cfg.elevation_rad, t.velocity_mps[l])
                                .values;
          const double ref = naive_namf(w.matrix(), a, ys[b]);
          worst = std::max(worst, std::abs(t.at(static_cast<int>(b), j, l) - ref) / std::abs(ref));
        }
      }
    }
  }
  return {instances == 10 && worst < 1e-12,
          fmt("%d instances of 64x300, max rel diff %.3e (< 1e-12)", instances, worst)};
}

Verdict criterion3() {
  const SceneConfig cfg = default_scene();
  const CovarianceModel model = build_covariance(cfg, phase_centers(cfg));
  const InterferenceSampler sampler(model);
  RandomStream rng(derive_seed(303, StreamTag::kOracle, {3}));
  const int k = 100000;
  const CMatrix x = sampler.draw(SnapshotRole::kClutter, k, rng).values +
                    sampler.draw(SnapshotRole::kNoise, k, rng).values;
  const CMatrix xw = whiten(model.total(), x);
  const CMatrix s = (xw * xw.adjoint()) / static_cast<double>(k);
  const CMatrix eye = CMatrix::Identity(s.rows(), s.cols());
  const double err = (s - eye).norm() / eye.norm();
  return {err < 0.05, fmt("K = %d, ||S - I||_F / ||I||_F = %.4f (< 0.05)", k, err)};
}

Verdict criterion4() {
  const auto t0 = Clock::now();
  SceneConfig cfg = default_scene();
  cfg.target_scnr_db = 20.0;
  const TrialPipeline pipeline(cfg);
  RandomStream place(derive_seed(404, StreamTag::kTarget, {0}));
  const TargetTruth truth = place_target(
      cfg, place, [&](double az, double v) { return pipeline.mean_amplitude(az, v); });
  const cplx mean_signal = std::polar(truth.rcs, 2.0 * kPi * place.uniform());
  const SteeringDerivative d = steering_derivatives(cfg, pipeline.centers(), deg_to_rad(truth.azimuth_deg),
                                                    cfg.elevation_rad, truth.velocity_mps);
  const CMatrix r = pipeline.model().total();
  const double f_theta = fisher_theta(mean_signal, d.d_theta, r);
  const double f_vel = fisher_velocity(mean_signal, d.d_velocity, r);
  RandomStream mc_theta(derive_seed(404, StreamTag::kOracle, {1}));
  RandomStream mc_vel(derive_seed(404, StreamTag::kOracle, {2}));
  const double mc_t = fisher_monte_carlo_check(cfg, pipeline.centers(), pipeline.solver(), truth, mean_signal,
                                               FisherParameter::kAzimuth, 10000, mc_theta);
  const double mc_v = fisher_monte_carlo_check(cfg, pipeline.centers(), pipeline.solver(), truth, mean_signal,
                                               FisherParameter::kVelocity, 10000, mc_vel);
  const double e_t = std::abs(mc_t - f_theta) / f_theta;
  const double e_v = std::abs(mc_v - f_vel) / f_vel;
  const double t = seconds_since(t0);
  return {e_t < 0.10 && e_v < 0.10 && t < 120.0,
          fmt("theta: analytic %.4e MC %.4e (%.2f%%); v: analytic %.4e MC %.4e (%.2f%%); %.1f s", f_theta, mc_t,
              100 * e_t, f_vel, mc_v, 100 * e_v, t)};
}

Verdict criterion5() {
  const SweepSpec spec = SweepSpec::standard(SweepAxis::kScnr, 200, 505);
  std::vector<double> x, y_theta, y_vel;
  for (std::size_t p = 0; p < spec.values.size(); ++p) {
    const TrialPipeline pipeline(spec.scene_for(default_scene(), p));
    std::vector<CrbReport> reports(static_cast<std::size_t>(spec.trials));
    for (int i = 0; i < spec.trials; ++i) {
      const auto sim = pipeline.simulate(spec.seed, static_cast<int>(p), i);
      reports[static_cast<std::size_t>(i)] =
          crb_report(pipeline.config(), pipeline.centers(), pipeline.solver(), sim.truth,
                     crb_signal_power(sim.data.signal, CrbAmplitude::kMeanSignal), CrbScaling::kPaperVerbatim);
    }
    const CrbAverage avg = crb_sweep_average(reports);
    x.push_back(spec.values[p]);
    y_theta.push_back(10.0 * std::log10(avg.crb_theta));
    y_vel.push_back(10.0 * std::log10(avg.crb_velocity));
  }
  auto slope = [&](const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      mx += x[i];
      my += y[i];
    }
    mx /= x.size();
    my /= y.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sxy += (x[i] - mx) * (y[i] - my);
      sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
  };
  const double s_t = slope(y_theta);
  const double s_v = slope(y_vel);
  return {std::abs(s_t + 1.0) <= 0.01 && std::abs(s_v + 1.0) <= 0.01,
          fmt("slope theta %.6f, slope v %.6f (target -1.00 +/- 0.01)", s_t, s_v)};
}

Verdict criterion6() {
  SceneConfig cfg = default_scene();
  const SubarrayPhaseCenters z = phase_centers(cfg);
  const CovarianceModel model = noise_only_covariance(cfg);
  const InterferenceSampler sampler(model);
  const ScnrCalibrator calibrator(model);
  const SteeringGrid grid(cfg, z);
  SynthOptions opts;
  opts.y_interference_scale = 1e-6;
  const GdConfig gd;  // α_θ = 1e-5, T_θ = 100, α_v = 1e-2, T_v = 150
  const int trials = 100;
  std::vector<int> ok(trials, 0);
  std::vector<double> err_t(trials), err_v(trials);
  parallel_for(trials, 1, [&](std::size_t i) {
    RandomStream target_rng(derive_seed(606, StreamTag::kTarget, {i}));
    RandomStream noise_rng(derive_seed(606, StreamTag::kInterference, {i}));
    TargetTruth truth;
    truth.range_bin_index = target_rng.uniform_int(0, cfg.num_range_bins - 1);
    truth.azimuth_deg = cfg.azimuth_at(target_rng.uniform_int(0, cfg.azimuth_count() - 1));
    truth.velocity_mps = cfg.velocity_at(target_rng.uniform_int(0, cfg.velocity_count() - 1));
    truth.rcs = calibrator.amplitude(
        cfg.target_scnr_db,
        space_time_steering(cfg, z, deg_to_rad(truth.azimuth_deg), cfg.elevation_rad, truth.velocity_mps).values);
    const TrialData data = synthesize_trial(cfg, z, sampler, truth, target_rng, noise_rng, opts);
    const std::vector<WhitenedBin> bins = whiten_trial(data);
    const Estimate mp = peak_cell_midpoint(build_heatmap(grid, bins));
    const WhitenedBin& tb = bins[static_cast<std::size_t>(truth.range_bin_index)];
    const Estimate e = gd_estimate(GdProblem{cfg, z, tb.whitener, tb.y}, mp, truth, gd);
    err_t[i] = std::abs(e.azimuth_deg - truth.azimuth_deg);
    err_v[i] = std::abs(e.velocity_mps - truth.velocity_mps);
    ok[i] = err_t[i] < 0.01 && err_v[i] < 0.01;
  });
  int hits = 0;
  double worst_t = 0, worst_v = 0;
  for (int i = 0; i < trials; ++i) {
    hits += ok[static_cast<std::size_t>(i)];
    worst_t = std::max(worst_t, err_t[static_cast<std::size_t>(i)]);
    worst_v = std::max(worst_v, err_v[static_cast<std::size_t>(i)]);
  }
  return {hits >= 95, fmt("%d/100 converged (>= 95); worst |dtheta| %.2e deg, |dv| %.2e m/s", hits, worst_t, worst_v)};
}

struct DeskPoint {
  SweepPointResult result;
  std::string log;
};

const DeskPoint& desk_point(int workers) {
  static std::optional<DeskPoint> cached;
  if (!cached) {
    SweepSpec spec;
    spec.axis = SweepAxis::kScnr;
    spec.values = {20.0};
    spec.fixed_snapshots = 300;
    spec.trials = 2000;
    spec.seed = 707;
    BenchOptions opts;
    opts.workers = workers;
    DeskPoint dp;
    opts.log = [&](const std::string& m) { dp.log += "  # " + m + "\n"; };
    dp.result = run_sweep_point(spec, default_scene(), 0, opts);
    cached = std::move(dp);
  }
  return *cached;
}

const BiasVariance* find_method(const SweepPointResult& r, Method m) {
  for (const auto& mm : r.methods) {
    if (mm.method == m) return &mm.stats;
  }
  return nullptr;
}

Verdict criterion7(int workers) {
  const DeskPoint& dp = desk_point(workers);
  const auto* mp = find_method(dp.result, Method::kMP);
  const auto* gd = find_method(dp.result, Method::kGD);
  const auto* cnn = find_method(dp.result, Method::kCNN);
  if (!mp || !gd || !cnn) return {false, "missing method results"};
  std::cout << dp.log;
  const bool pass = gd->mse_theta <= mp->mse_theta && gd->mse_velocity <= mp->mse_velocity &&
                    cnn->mse_theta < mp->mse_theta && cnn->mse_velocity < mp->mse_velocity;
  return {pass, fmt("n_test %d; MSE_theta MP %.4e GD %.4e CNN %.4e; MSE_v MP %.4e GD %.4e CNN %.4e",
                    dp.result.n_test, mp->mse_theta, gd->mse_theta, cnn->mse_theta, mp->mse_velocity,
                    gd->mse_velocity, cnn->mse_velocity)};
}

Verdict criterion8(int workers) {
  const DeskPoint& dp = desk_point(workers);
  double worst_identity = 0.0;
  for (const auto& m : dp.result.methods) {
    worst_identity = std::max(worst_identity, std::abs(m.stats.mse_theta - m.stats.bias2_theta - m.stats.var_theta));
    worst_identity =
        std::max(worst_identity, std::abs(m.stats.mse_velocity - m.stats.bias2_velocity - m.stats.var_velocity));
  }
  const auto* cnn = find_method(dp.result, Method::kCNN);
  if (!cnn) return {false, "missing CNN results"};
  const double r_t = cnn->bias2_theta / cnn->mse_theta;
  const double r_v = cnn->bias2_velocity / cnn->mse_velocity;
  return {(r_t > 0.5 || r_v > 0.5) && worst_identity <= 1e-10,
          fmt("CNN bias2/MSE theta %.4f, v %.4f (one > 0.5); max |MSE - bias2 - var| %.2e (<= 1e-10)", r_t, r_v,
              worst_identity)};
}

Verdict criterion9(const std::string& cli) {
  if (cli.empty()) return {false, "CLI path not given"};
  const fs::path root = fs::temp_directory_path() / "stapcrb_acceptance_c9";
  fs::remove_all(root);
  std::vector<std::string> csv;
  std::vector<double> wall;
  for (int w : {1, 4}) {
    const fs::path out = root / ("workers" + std::to_string(w));
    const std::string cmd = "\"" + cli + "\" sweep --axis scnr --trials 200 --seed 7 --workers " +
                            std::to_string(w) + " --out \"" + out.string() + "\" > \"" +
                            (root / ("log" + std::to_string(w) + ".txt")).string() + "\" 2>&1";
    fs::create_directories(root);
    const auto t0 = Clock::now();
    const int rc = std::system(cmd.c_str());
    wall.push_back(seconds_since(t0));
    if (rc != 0) return {false, fmt("sweep with %d workers exited with %d", w, rc)};
    std::ifstream is(out / "sweep_scnr.csv", std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    csv.push_back(ss.str());
  }
  const bool same = !csv[0].empty() && csv[0] == csv[1];
  return {same && wall[0] < 1800.0 && wall[1] < 1800.0,
          fmt("CSV %s (%zu bytes); wall %.0f s (1 worker), %.0f s (4 workers), limit 1800 s",
              same ? "byte-identical" : "DIFFERS", csv[0].size(), wall[0], wall[1])};
}

Verdict criterion10() {
  CnnArchitecture arch;
  arch.in_channels = 2;
  arch.height = 8;
  arch.width = 6;
  arch.conv1_channels = 3;
  arch.conv2_channels = 4;
  arch.dense_units = 5;
  CnnModel model = init_model(arch, RegionBox{}, InputNormalization::kRaw, 1010);
  RandomStream rng(derive_seed(1010, StreamTag::kOracle, {0}));
  for (double& p : model.params) p += 0.05 * rng.normal();  // non-zero biases
  std::vector<double> input(static_cast<std::size_t>(arch.in_channels * arch.height * arch.width));
  for (double& v : input) v = rng.uniform(-1.0, 1.0);
  const std::array<double, 2> target{0.3, 0.7};
  std::vector<double> grad(model.params.size(), 0.0);
  example_loss_gradient(model, input, target, grad);
  const double h = 1e-6;
  double worst = 0.0;
  for (std::size_t i = 0; i < model.params.size(); ++i) {
    const double keep = model.params[i];
    model.params[i] = keep + h;
    const double lp = example_loss_gradient(model, input, target, {});
    model.params[i] = keep - h;
    const double lm = example_loss_gradient(model, input, target, {});
    model.params[i] = keep;
    const double fd = (lp - lm) / (2 * h);
    const double scale = std::max({std::abs(fd), std::abs(grad[i]), 1e-6});
    worst = std::max(worst, std::abs(fd - grad[i]) / scale);
  }
  return {worst < 1e-3, fmt("%zu parameters, max rel err %.3e (< 1e-3)", model.params.size(), worst)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string cli;
  std::vector<int> only;
  int workers = 1;
  app.add_option("--cli", cli, "path to the stapcrb executable");
  app.add_option("--only", only, "criteria to run");
  app.add_option("--workers", workers, "worker threads for the desk-scale point");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<int, std::function<Verdict()>>> criteria{
      {1, criterion1},
      {2, criterion2},
      {3, criterion3},
      {4, criterion4},
      {5, criterion5},
      {6, criterion6},
      {7, [&] { return criterion7(workers); }},
      {8, [&] { return criterion8(workers); }},
      {9, [&] { return criterion9(cli); }},
      {10, criterion10},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failed = 0;
  for (const auto& [id, run] : criteria) {
    if (!selected.empty() && !selected.count(id)) continue;
    Verdict v;
    const auto t0 = Clock::now();
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << v.detail
              << fmt(" [%.1f s]", seconds_since(t0)) << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
