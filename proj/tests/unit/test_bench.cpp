#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "stapcrb/bench.hpp"

using namespace stapcrb;

namespace {

BenchOptions quick_options(int workers) {
  BenchOptions o;
  o.workers = workers;
  o.train.epochs = 2;
  return o;
}

SweepSpec single_point(int trials) {
  SweepSpec s;
  s.axis = SweepAxis::kScnr;
  s.values = {20.0};
  s.trials = trials;
  s.seed = 31;
  return s;
}

}  // namespace

TEST_CASE("standard sweep axes") {
  const SweepSpec a = SweepSpec::standard(SweepAxis::kScnr, 100, 1);
  CHECK(a.values == std::vector<double>{-20, -15, -10, -5, 0, 5, 10, 15, 20});
  const SweepSpec b = SweepSpec::standard(SweepAxis::kSnapshots, 100, 1);
  CHECK(b.values == std::vector<double>{75, 100, 125, 150, 175, 200, 225, 250, 275, 300});
  CHECK(a.scene_for(default_scene(), 2).target_scnr_db == -10);
  CHECK(a.scene_for(default_scene(), 2).snapshots == 300);
  CHECK(b.scene_for(default_scene(), 0).snapshots == 75);
  CHECK(b.scene_for(default_scene(), 0).target_scnr_db == 20);
  SweepSpec bad = a;
  bad.trials = 9;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = a;
  bad.values = {0, 0};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK(test_split_size(2000) == 200);
  CHECK(test_split_size(10) == 1);
  CHECK(sweep_axis_from_string("snapshots") == SweepAxis::kSnapshots);
  CHECK_THROWS_AS(sweep_axis_from_string("range"), ConfigError);
}

TEST_CASE("targets are shared across sweep points") {
  const SweepSpec spec = SweepSpec::standard(SweepAxis::kScnr, 10, 5);
  const TrialPipeline p0(spec.scene_for(default_scene(), 0));
  const TrialPipeline p8(spec.scene_for(default_scene(), 8));
  const auto a = p0.simulate(5, 0, 3);
  const auto b = p8.simulate(5, 8, 3);
  CHECK(a.truth.azimuth_deg == b.truth.azimuth_deg);
  CHECK(a.truth.velocity_mps == b.truth.velocity_mps);
  CHECK(b.truth.rcs / a.truth.rcs == doctest::Approx(100.0).epsilon(1e-9));
  CHECK((a.data.z[0].values - b.data.z[0].values).norm() > 0.0);
}

TEST_CASE("single point is identical across runs and worker counts") {
  const SweepSpec spec = single_point(10);
  const SweepReport r1{SweepAxis::kScnr, {run_sweep_point(spec, default_scene(), 0, quick_options(1))}};
  const SweepReport r2{SweepAxis::kScnr, {run_sweep_point(spec, default_scene(), 0, quick_options(1))}};
  const SweepReport r3{SweepAxis::kScnr, {run_sweep_point(spec, default_scene(), 0, quick_options(3))}};
  CHECK(format_report_csv(r1) == format_report_csv(r2));
  CHECK(format_report_csv(r1) == format_report_csv(r3));
  REQUIRE(r1.points[0].methods.size() == 3);
  CHECK(r1.points[0].n_test + r1.points[0].excluded == 1);
  for (const auto& m : r1.points[0].methods) {
    CHECK(m.stats.mse_theta >= 0.0);
    CHECK(std::abs(m.stats.mse_theta - m.stats.bias2_theta - m.stats.var_theta) <= 1e-10);
    CHECK(std::abs(m.stats.mse_velocity - m.stats.bias2_velocity - m.stats.var_velocity) <= 1e-10);
  }
}

TEST_CASE("midpoint MSE respects the quantisation floor") {
  const TrialPipeline p(default_scene());
  std::vector<Estimate> est;
  std::vector<TargetTruth> truth;
  for (int i = 0; i < 200; ++i) {
    const TrialOutcome o = run_trial(p, 41, 0, i, quick_options(1), false);
    est.push_back(o.mp);
    truth.push_back(o.truth);
  }
  const BiasVariance s = bias_variance_decomposition(est, truth);
  CHECK(s.mse_theta >= 0.4 * 0.4 / 12.0);
}

TEST_CASE("report CSV round trip") {
  SweepReport r;
  r.axis = SweepAxis::kSnapshots;
  for (double k : {75.0, 100.0}) {
    SweepPointResult p;
    p.value = k;
    p.n_trials = 40;
    p.n_test = 3;
    p.excluded = 1;
    p.crb_verbatim = {0.123456789012345, 1.5, 3, 1};
    p.crb_scaled = {0.1 / 3, 1.5 / 75, 3, 1};
    for (Method m : {Method::kMP, Method::kGD, Method::kCNN}) {
      BiasVariance s;
      s.count = 3;
      s.bias2_theta = 0.1 * k;
      s.var_theta = 1.0 / 3.0;
      s.mse_theta = s.bias2_theta + s.var_theta;
      s.bias2_velocity = 0.7;
      s.var_velocity = 2.0 / 7.0;
      s.mse_velocity = s.bias2_velocity + s.var_velocity;
      p.methods.push_back({m, s});
    }
    r.points.push_back(p);
  }
  const std::string csv = format_report_csv(r);
  const SweepReport back = parse_report_csv(csv);
  CHECK(format_report_csv(back) == csv);
  REQUIRE(back.points.size() == 2);
  CHECK(back.axis == SweepAxis::kSnapshots);
  CHECK(back.points[1].methods[2].method == Method::kCNN);
  CHECK(back.points[1].methods[2].stats.var_theta == 1.0 / 3.0);
  CHECK(back.points[0].crb_scaled.crb_theta == 0.1 / 3);
  CHECK(back.points[0].crb_verbatim.excluded == 1);
}

TEST_CASE("empty report and plot structure") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "stapcrb_unit_emit";
  fs::remove_all(dir);
  const EmitResult empty = emit_report(SweepReport{}, dir.string(), CrbScaling::kPaperVerbatim);
  CHECK(empty.plot_paths.empty());
  CHECK(empty.warnings.size() == 1);
  std::ifstream is(empty.csv_path);
  std::stringstream ss;
  ss << is.rdbuf();
  const std::string text = ss.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 1);

  SweepReport r;
  for (double v : {-20.0, 0.0, 20.0}) {
    SweepPointResult p;
    p.value = v;
    p.crb_verbatim = {1.0 / (v + 30), 2.0 / (v + 30), 5, 0};
    p.crb_scaled = p.crb_verbatim;
    for (Method m : {Method::kMP, Method::kGD, Method::kCNN}) {
      BiasVariance s;
      s.mse_theta = 0.5;
      s.mse_velocity = 0.7;
      p.methods.push_back({m, s});
    }
    r.points.push_back(p);
  }
  const std::string svg = render_plot_svg(r, false, CrbScaling::kSnapshotScaled);
  const std::regex series("data-series=\"([A-Z]+)\"");
  std::vector<std::string> names;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), series); it != std::sregex_iterator(); ++it)
    names.push_back((*it)[1]);
  CHECK(names == std::vector<std::string>{"MP", "GD", "CNN", "CRB"});
  const EmitResult full = emit_report(r, dir.string(), CrbScaling::kPaperVerbatim);
  CHECK(full.plot_paths.size() == 2);
  for (const auto& p : full.plot_paths) CHECK(fs::exists(p));
  fs::remove_all(dir);
}
