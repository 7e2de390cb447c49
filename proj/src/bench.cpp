#include "stapcrb/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "stapcrb/parallel.hpp"
#include "stapcrb/steering.hpp"

namespace stapcrb {

std::string to_string(SweepAxis a) { return a == SweepAxis::kScnr ? "scnr" : "snapshots"; }

SweepAxis sweep_axis_from_string(const std::string& s) {
  if (s == "scnr") return SweepAxis::kScnr;
  if (s == "snapshots") return SweepAxis::kSnapshots;
  throw ConfigError("unknown sweep axis: " + s);
}

SweepSpec SweepSpec::standard(SweepAxis axis, int trials, std::uint64_t seed) {
  SweepSpec s;
  s.axis = axis;
  s.trials = trials;
  s.seed = seed;
  if (axis == SweepAxis::kScnr) {
    for (int db = -20; db <= 20; db += 5) s.values.push_back(db);
  } else {
    for (int k = 75; k <= 300; k += 25) s.values.push_back(k);
  }
  return s;
}

void SweepSpec::validate() const {
  if (trials < 10) throw ConfigError("a sweep needs at least 10 trials per point");
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] > values[i - 1])) throw ConfigError("sweep values must be strictly increasing");
  }
  if (axis == SweepAxis::kSnapshots) {
    for (double v : values) {
      if (v < 2 || v != std::floor(v)) throw ConfigError("snapshot sweep values must be integers >= 2");
    }
  }
}

SceneConfig SweepSpec::scene_for(const SceneConfig& base, std::size_t index) const {
  SceneConfig cfg = base;
  if (axis == SweepAxis::kScnr) {
    cfg.target_scnr_db = values.at(index);
    cfg.snapshots = fixed_snapshots;
  } else {
    cfg.snapshots = static_cast<int>(values.at(index));
    cfg.target_scnr_db = fixed_scnr_db;
  }
  cfg.rng_seed = seed;
  return cfg;
}

TrialPipeline::TrialPipeline(const SceneConfig& cfg)
    : cfg_((cfg.validate(), cfg)),
      z_(phase_centers(cfg_)),
      model_(build_covariance(cfg_, z_)),
      sampler_(model_),
      calibrator_(model_),
      solver_(model_.total()),
      grid_(cfg_, z_) {}

double TrialPipeline::mean_amplitude(double azimuth_deg, double velocity_mps) const {
  const CVector a =
      space_time_steering(cfg_, z_, deg_to_rad(azimuth_deg), cfg_.elevation_rad, velocity_mps).values;
  return calibrator_.amplitude(cfg_.target_scnr_db, a);
}

TrialPipeline::Simulated TrialPipeline::simulate(std::uint64_t seed, int point, int trial,
                                                 const SynthOptions& opts) const {
  RandomStream target_rng(derive_seed(seed, StreamTag::kTarget, {static_cast<std::uint64_t>(trial)}));
  RandomStream interference_rng(derive_seed(
      seed, StreamTag::kInterference, {static_cast<std::uint64_t>(point), static_cast<std::uint64_t>(trial)}));
  Simulated s;
  s.truth = place_target(cfg_, target_rng,
                         [this](double az, double v) { return mean_amplitude(az, v); });
  s.data = synthesize_trial(cfg_, z_, sampler_, s.truth, target_rng, interference_rng, opts);
  return s;
}

std::vector<WhitenedBin> whiten_trial(const TrialData& data) {
  std::vector<WhitenedBin> bins;
  bins.reserve(data.y.size());
  for (std::size_t b = 0; b < data.y.size(); ++b) bins.push_back(whiten_bin(data.z[b].values, data.y[b].values));
  return bins;
}

Estimate gd_estimate(const GdProblem& problem, const Estimate& init, const TargetTruth& truth,
                     const GdConfig& gd) {
  const Estimate az = gd_azimuth(problem, init.azimuth_deg, truth.velocity_mps, gd);
  const Estimate vel = gd_velocity(problem, truth.azimuth_deg, init.velocity_mps, gd);
  Estimate e;
  e.method = Method::kGD;
  e.azimuth_deg = az.azimuth_deg;
  e.velocity_mps = vel.velocity_mps;
  e.iterations_used = az.iterations_used + vel.iterations_used;
  const CVector a = space_time_steering(problem.cfg, problem.z, deg_to_rad(e.azimuth_deg),
                                        problem.cfg.elevation_rad, e.velocity_mps)
                        .values;
  e.final_loss = gd_loss(problem.whitener.apply(a), problem.y_whitened);
  return e;
}

TrialOutcome run_trial(const TrialPipeline& pipeline, std::uint64_t seed, int point, int trial,
                       const BenchOptions& opts, bool evaluate) {
  const SceneConfig& cfg = pipeline.config();
  auto sim = pipeline.simulate(seed, point, trial);
  TrialOutcome out;
  out.trial = trial;
  out.truth = sim.truth;
  out.mean_signal = sim.data.signal.mean;
  out.mean_power = sim.data.signal.mean_power();

  const std::vector<WhitenedBin> bins = whiten_trial(sim.data);
  out.tensor = build_heatmap(pipeline.grid(), bins);
  out.tensor.truth = sim.truth;
  out.mp = peak_cell_midpoint(out.tensor);
  if (!evaluate) return out;

  const double power = crb_signal_power(sim.data.signal, opts.crb_amplitude);
  out.crb_verbatim = crb_report(cfg, pipeline.centers(), pipeline.solver(), sim.truth, power,
                                CrbScaling::kPaperVerbatim);
  out.crb_scaled = crb_report(cfg, pipeline.centers(), pipeline.solver(), sim.truth, power,
                              CrbScaling::kSnapshotScaled);
  if (!out.crb_verbatim.bounded) {
    out.excluded = true;
    out.exclusion_reason = "unbounded CRB";
  }
  const WhitenedBin& target = bins[static_cast<std::size_t>(sim.truth.range_bin_index)];
  const GdProblem problem{cfg, pipeline.centers(), target.whitener, target.y};
  try {
    out.gd = gd_estimate(problem, out.mp, sim.truth, opts.gd);
  } catch (const NumericalError& e) {
    out.excluded = true;
    out.exclusion_reason = e.what();
  }
  return out;
}

int test_split_size(int trials) {
  return std::max(1, static_cast<int>(std::lround(0.1 * trials)));
}

SweepPointResult run_sweep_point(const SweepSpec& spec, const SceneConfig& base, std::size_t index,
                                 const BenchOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  const SceneConfig cfg = spec.scene_for(base, index);
  const TrialPipeline pipeline(cfg);
  const int n = spec.trials;
  const int n_test = test_split_size(n);
  const int n_train = n - n_test;

  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(n));
  parallel_for(outcomes.size(), opts.workers, [&](std::size_t i) {
    outcomes[i] = run_trial(pipeline, spec.seed, static_cast<int>(index), static_cast<int>(i), opts,
                            static_cast<int>(i) >= n_train);
  });
  if (opts.log) {
    std::ostringstream msg;
    msg << to_string(spec.axis) << "=" << spec.values[index] << ": simulated " << n << " trials";
    opts.log(msg.str());
  }

  std::optional<CnnModel> cnn;
  if (opts.run_cnn) {
    std::vector<HeatmapTensor> train_set;
    train_set.reserve(static_cast<std::size_t>(n_train));
    for (int i = 0; i < n_train; ++i) train_set.push_back(outcomes[static_cast<std::size_t>(i)].tensor);
    TrainConfig tc = opts.train;
    tc.seed = derive_seed(spec.seed, StreamTag::kTraining, {static_cast<std::uint64_t>(index)});
    tc.workers = opts.workers;
    const CnnArchitecture arch{cfg.num_range_bins, cfg.azimuth_count(), cfg.velocity_count()};
    TrainResult tr = train(train_set, tc, arch, RegionBox::from_scene(cfg));
    if (opts.log) {
      std::ostringstream msg;
      msg << "  cnn: " << tr.log.size() << " epochs, best " << tr.best_epoch << ", val loss "
          << (tr.log.empty() ? 0.0 : tr.log[static_cast<std::size_t>(std::max(tr.best_epoch, 1)) - 1].val_loss);
      opts.log(msg.str());
    }
    cnn = std::move(tr.model);
  }

  std::vector<TargetTruth> truths;
  std::vector<Estimate> mp, gd, cnn_est;
  std::vector<CrbReport> crb_v, crb_s;
  SweepPointResult res;
  res.value = spec.values[index];
  res.n_trials = n;
  for (int i = n_train; i < n; ++i) {
    const TrialOutcome& o = outcomes[static_cast<std::size_t>(i)];
    if (o.excluded) {
      ++res.excluded;
      continue;
    }
    truths.push_back(o.truth);
    mp.push_back(o.mp);
    gd.push_back(*o.gd);
    if (cnn) cnn_est.push_back(predict(*cnn, o.tensor));
    crb_v.push_back(o.crb_verbatim);
    crb_s.push_back(o.crb_scaled);
  }
  res.n_test = static_cast<int>(truths.size());
  if (res.n_test > 0) {
    res.methods.push_back({Method::kMP, bias_variance_decomposition(mp, truths)});
    res.methods.push_back({Method::kGD, bias_variance_decomposition(gd, truths)});
    if (cnn) res.methods.push_back({Method::kCNN, bias_variance_decomposition(cnn_est, truths)});
    res.crb_verbatim = crb_sweep_average(crb_v);
    res.crb_scaled = crb_sweep_average(crb_s);
  }
  res.crb_verbatim.excluded += res.excluded;
  res.crb_scaled.excluded += res.excluded;
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

SweepReport run_sweep(const SweepSpec& spec, const SceneConfig& base, const BenchOptions& opts) {
  spec.validate();
  SweepReport report;
  report.axis = spec.axis;
  // Points run in order; parallelism lives inside each point so the CNN
  // stage can follow its dataset directly.
  for (std::size_t i = 0; i < spec.values.size(); ++i) {
    report.points.push_back(run_sweep_point(spec, base, i, opts));
  }
  return report;
}

namespace {

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_db(double v) { return 10.0 * std::log10(v); }

const char* kCsvHeader =
    "axis,value,method,n_trials,n_test,excluded,mse_theta,mse_vel,mse_theta_db,mse_vel_db,"
    "bias2_theta,var_theta,bias2_vel,var_vel,crb_theta_verbatim,crb_theta_scaled,crb_vel_verbatim,"
    "crb_vel_scaled,crb_count,crb_excluded";

Method method_from_string(const std::string& s) {
  if (s == "MP") return Method::kMP;
  if (s == "GD") return Method::kGD;
  if (s == "CNN") return Method::kCNN;
  throw ConfigError("unknown method: " + s);
}

}  // namespace

std::string format_report_csv(const SweepReport& report) {
  std::ostringstream os;
  os << kCsvHeader << '\n';
  for (const auto& p : report.points) {
    for (const auto& m : p.methods) {
      const BiasVariance& s = m.stats;
      os << to_string(report.axis) << ',' << num(p.value) << ',' << to_string(m.method) << ',' << p.n_trials
         << ',' << p.n_test << ',' << p.excluded << ',' << num(s.mse_theta) << ',' << num(s.mse_velocity)
         << ',' << num(to_db(s.mse_theta)) << ',' << num(to_db(s.mse_velocity)) << ',' << num(s.bias2_theta)
         << ',' << num(s.var_theta) << ',' << num(s.bias2_velocity) << ',' << num(s.var_velocity) << ','
         << num(p.crb_verbatim.crb_theta) << ',' << num(p.crb_scaled.crb_theta) << ','
         << num(p.crb_verbatim.crb_velocity) << ',' << num(p.crb_scaled.crb_velocity) << ','
         << p.crb_verbatim.count << ',' << p.crb_verbatim.excluded << '\n';
    }
  }
  return os.str();
}

SweepReport parse_report_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw ConfigError("unexpected sweep CSV header");
  SweepReport report;
  bool have_axis = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 20) throw ConfigError("malformed sweep CSV row: " + line);
    const SweepAxis axis = sweep_axis_from_string(f[0]);
    if (have_axis && axis != report.axis) throw ConfigError("mixed axes in sweep CSV");
    report.axis = axis;
    have_axis = true;
    const double value = std::stod(f[1]);
    if (report.points.empty() || report.points.back().value != value) {
      SweepPointResult p;
      p.value = value;
      p.n_trials = std::stoi(f[3]);
      p.n_test = std::stoi(f[4]);
      p.excluded = std::stoi(f[5]);
      p.crb_verbatim = {std::stod(f[14]), std::stod(f[16]), std::stoi(f[18]), std::stoi(f[19])};
      p.crb_scaled = {std::stod(f[15]), std::stod(f[17]), std::stoi(f[18]), std::stoi(f[19])};
      report.points.push_back(p);
    }
    MethodMetrics m;
    m.method = method_from_string(f[2]);
    m.stats.count = report.points.back().n_test;
    m.stats.mse_theta = std::stod(f[6]);
    m.stats.mse_velocity = std::stod(f[7]);
    m.stats.bias2_theta = std::stod(f[10]);
    m.stats.var_theta = std::stod(f[11]);
    m.stats.bias2_velocity = std::stod(f[12]);
    m.stats.var_velocity = std::stod(f[13]);
    report.points.back().methods.push_back(m);
  }
  return report;
}

std::string render_plot_svg(const SweepReport& report, bool velocity, CrbScaling scaling) {
  constexpr double W = 640, H = 420, left = 70, right = 150, top = 40, bottom = 50;
  struct Series {
    std::string name, color;
    std::vector<std::pair<double, double>> pts;
  };
  std::vector<Series> series;
  const std::map<Method, std::string> colors{{Method::kMP, "#1f77b4"}, {Method::kGD, "#2ca02c"},
                                             {Method::kCNN, "#d62728"}};
  for (Method m : {Method::kMP, Method::kGD, Method::kCNN}) {
    Series s{to_string(m), colors.at(m), {}};
    for (const auto& p : report.points) {
      for (const auto& mm : p.methods) {
        if (mm.method != m) continue;
        const double y = velocity ? mm.stats.mse_velocity : mm.stats.mse_theta;
        if (y > 0.0) s.pts.emplace_back(p.value, y);
      }
    }
    if (!s.pts.empty()) series.push_back(std::move(s));
  }
  Series crb{"CRB", "#000000", {}};
  for (const auto& p : report.points) {
    const CrbAverage& c = scaling == CrbScaling::kPaperVerbatim ? p.crb_verbatim : p.crb_scaled;
    const double y = velocity ? c.crb_velocity : c.crb_theta;
    if (c.count > 0 && y > 0.0) crb.pts.emplace_back(p.value, y);
  }
  series.push_back(std::move(crb));

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series) {
    for (auto [x, y] : s.pts) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (xmin > xmax) {
    xmin = 0;
    xmax = 1;
    ymin = 1;
    ymax = 10;
  }
  if (xmax == xmin) xmax = xmin + 1;
  const double lo = std::floor(std::log10(ymin));
  const double hi = std::max(lo + 1, std::ceil(std::log10(ymax)));
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * (W - left - right); };
  auto py = [&](double y) { return top + (hi - std::log10(y)) / (hi - lo) * (H - top - bottom); };

  std::ostringstream os;
  os.precision(6);
  const std::string param = velocity ? "velocity" : "azimuth";
  const std::string unit = velocity ? "(m/s)^2" : "deg^2";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << param
     << " MSE vs CRB (" << to_string(scaling) << ")</text>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << H - bottom << "\" x2=\"" << W - right << "\" y2=\"" << H - bottom
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << H - bottom
     << "\" stroke=\"black\"/>\n";
  for (double d = lo; d <= hi; d += 1.0) {
    os << "<line x1=\"" << left << "\" y1=\"" << py(std::pow(10.0, d)) << "\" x2=\"" << W - right << "\" y2=\""
       << py(std::pow(10.0, d)) << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << py(std::pow(10.0, d)) + 4
       << "\" text-anchor=\"end\" font-size=\"11\">1e" << d << "</text>\n";
  }
  for (const auto& p : report.points) {
    os << "<text x=\"" << px(p.value) << "\" y=\"" << H - bottom + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
       << p.value << "</text>\n";
  }
  os << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\" font-size=\"12\">"
     << (report.axis == SweepAxis::kScnr ? "mean output SCNR (dB)" : "snapshots K") << "</text>\n";
  os << "<text x=\"16\" y=\"" << (top + H - bottom) / 2 << "\" font-size=\"12\" transform=\"rotate(-90 16 "
     << (top + H - bottom) / 2 << ")\" text-anchor=\"middle\">MSE " << unit << "</text>\n";
  int row = 0;
  for (const auto& s : series) {
    os << "<polyline class=\"series\" data-series=\"" << s.name << "\" fill=\"none\" stroke=\"" << s.color
       << "\" stroke-width=\"2\"" << (s.name == "CRB" ? " stroke-dasharray=\"6 4\"" : "") << " points=\"";
    for (auto [x, y] : s.pts) os << px(x) << ',' << py(y) << ' ';
    os << "\"/>\n";
    const double ly = top + 20 + 18 * row++;
    os << "<line x1=\"" << W - right + 12 << "\" y1=\"" << ly << "\" x2=\"" << W - right + 36 << "\" y2=\"" << ly
       << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << W - right + 42 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">" << s.name << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

EmitResult emit_report(const SweepReport& report, const std::string& out_dir, CrbScaling plot_scaling) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + out_dir + ": " + ec.message());
  EmitResult res;
  const std::string stem = (fs::path(out_dir) / ("sweep_" + to_string(report.axis))).string();
  res.csv_path = stem + ".csv";
  auto write = [](const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + path);
    os << content;
    if (!os) throw ConfigError("failed writing " + path);
  };
  write(res.csv_path, format_report_csv(report));

  std::ostringstream timing;
  timing << "value,wall_seconds\n";
  for (const auto& p : report.points) timing << num(p.value) << ',' << num(p.wall_seconds) << '\n';
  write(stem + "_timing.csv", timing.str());

  bool any = false;
  for (const auto& p : report.points) any = any || !p.methods.empty();
  if (!any) {
    res.warnings.push_back("empty report: wrote header-only CSV and no plots");
    return res;
  }
  for (bool velocity : {false, true}) {
    const std::string path = stem + (velocity ? "_velocity.svg" : "_theta.svg");
    write(path, render_plot_svg(report, velocity, plot_scaling));
    res.plot_paths.push_back(path);
  }
  return res;
}

}  // namespace stapcrb
