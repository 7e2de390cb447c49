#ifndef STAPCRB_BENCH_HPP
#define STAPCRB_BENCH_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stapcrb/crb.hpp"
#include "stapcrb/estimators.hpp"
#include "stapcrb/heatmap.hpp"
#include "stapcrb/learned.hpp"
#include "stapcrb/scene.hpp"
#include "stapcrb/synth.hpp"

namespace stapcrb {

enum class SweepAxis { kScnr, kSnapshots };

std::string to_string(SweepAxis a);
SweepAxis sweep_axis_from_string(const std::string& s);

struct SweepSpec {
  SweepAxis axis = SweepAxis::kScnr;
  std::vector<double> values;
  int fixed_snapshots = 300;     // complement of the SCNR sweep
  double fixed_scnr_db = 20.0;   // complement of the snapshot sweep
  int trials = 2000;             // N per point
  std::uint64_t seed = 1;

  /// SCNR ∈ {−20, −15, …, 20} dB or K ∈ {75, 100, …, 300}.
  static SweepSpec standard(SweepAxis axis, int trials, std::uint64_t seed);
  void validate() const;
  /// Scene for point `index`: the swept value applied on top of `base`.
  SceneConfig scene_for(const SceneConfig& base, std::size_t index) const;
};

struct BenchOptions {
  int workers = 1;
  GdConfig gd;
  TrainConfig train;
  CrbAmplitude crb_amplitude = CrbAmplitude::kMeanSignal;
  bool run_cnn = true;
  std::function<void(const std::string&)> log;
};

/// Everything that depends only on the scene: geometry, covariance model,
/// sampler, SCNR calibration, CRB solver and the steering grid.
class TrialPipeline {
 public:
  explicit TrialPipeline(const SceneConfig& cfg);

  const SceneConfig& config() const { return cfg_; }
  const SubarrayPhaseCenters& centers() const { return z_; }
  const CovarianceModel& model() const { return model_; }
  const InterferenceSampler& sampler() const { return sampler_; }
  const ScnrCalibrator& calibrator() const { return calibrator_; }
  const InterferenceSolver& solver() const { return solver_; }
  const SteeringGrid& grid() const { return grid_; }

  /// μ for a target at (θ, v) at the scene's target SCNR.
  double mean_amplitude(double azimuth_deg, double velocity_mps) const;

  struct Simulated {
    TargetTruth truth;
    TrialData data;
  };
  /// Target and signal phases depend on (seed, trial) only, so every sweep
  /// point sees the same targets; interference depends on (seed, point, trial).
  Simulated simulate(std::uint64_t seed, int point, int trial, const SynthOptions& opts = {}) const;

 private:
  SceneConfig cfg_;
  SubarrayPhaseCenters z_;
  CovarianceModel model_;
  InterferenceSampler sampler_;
  ScnrCalibrator calibrator_;
  InterferenceSolver solver_;
  SteeringGrid grid_;
};

struct TrialOutcome {
  int trial = 0;
  TargetTruth truth;
  cplx mean_signal{0.0, 0.0};
  double mean_power = 0.0;
  HeatmapTensor tensor;
  Estimate mp;
  std::optional<Estimate> gd;
  CrbReport crb_verbatim;
  CrbReport crb_scaled;
  bool excluded = false;
  std::string exclusion_reason;
};

/// Whitening + heatmap for simulated data.
std::vector<WhitenedBin> whiten_trial(const TrialData& data);

/// Combined GD estimate: θ̇ from the azimuth run at v*, v̇ from the velocity
/// run at θ*, both initialized from `init`.
Estimate gd_estimate(const GdProblem& problem, const Estimate& init, const TargetTruth& truth,
                     const GdConfig& gd);

/// Simulates and processes one trial. With `evaluate`, also runs GD and the CRB.
TrialOutcome run_trial(const TrialPipeline& pipeline, std::uint64_t seed, int point, int trial,
                       const BenchOptions& opts, bool evaluate);

struct MethodMetrics {
  Method method = Method::kMP;
  BiasVariance stats;
};

struct SweepPointResult {
  double value = 0.0;
  int n_trials = 0;
  int n_test = 0;  // evaluated test trials after exclusions
  int excluded = 0;
  std::vector<MethodMetrics> methods;
  CrbAverage crb_verbatim;
  CrbAverage crb_scaled;
  double wall_seconds = 0.0;
};

struct SweepReport {
  SweepAxis axis = SweepAxis::kScnr;
  std::vector<SweepPointResult> points;
};

/// Test split size for N trials (10 %, at least one).
int test_split_size(int trials);

SweepPointResult run_sweep_point(const SweepSpec& spec, const SceneConfig& base, std::size_t index,
                                 const BenchOptions& opts);
SweepReport run_sweep(const SweepSpec& spec, const SceneConfig& base, const BenchOptions& opts);

/// Long-form CSV; wall times are excluded so output is byte-stable.
std::string format_report_csv(const SweepReport& report);
SweepReport parse_report_csv(const std::string& text);

/// SVG with log-scaled y: one series per method plus the CRB of `scaling`.
std::string render_plot_svg(const SweepReport& report, bool velocity, CrbScaling scaling);

struct EmitResult {
  std::string csv_path;
  std::vector<std::string> plot_paths;
  std::vector<std::string> warnings;
};

EmitResult emit_report(const SweepReport& report, const std::string& out_dir, CrbScaling plot_scaling);

}  // namespace stapcrb

#endif  // STAPCRB_BENCH_HPP
