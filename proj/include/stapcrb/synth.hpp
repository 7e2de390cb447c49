#ifndef STAPCRB_SYNTH_HPP
#define STAPCRB_SYNTH_HPP

#include <vector>

#include "stapcrb/common.hpp"
#include "stapcrb/random.hpp"
#include "stapcrb/scene.hpp"
#include "stapcrb/steering.hpp"

namespace stapcrb {

/// Clutter and noise covariances of the synthetic interference model.
struct CovarianceModel {
  CMatrix clutter_cov;
  CMatrix noise_cov;
  double cnr_db = 0.0;

  CMatrix total() const { return clutter_cov + noise_cov; }
};

struct ClutterOptions {
  int patches = 181;  // equal-power patches spanning azimuth [-90°, 90°]
  double loading = 1e-6;  // diagonal loading relative to trace/(ΛL)
};

/// Σ_n = I; Σ_c a zero-Doppler clutter ridge scaled to trace(Σ_c) = CNR·trace(Σ_n).
CovarianceModel build_covariance(const SceneConfig& cfg, const SubarrayPhaseCenters& z,
                                 const ClutterOptions& opts = {});

/// Noise-only model (clutter amplitude zero).
CovarianceModel noise_only_covariance(const SceneConfig& cfg);

/// Principal square root V diag(√λ) V^H of a Hermitian PSD matrix.
CMatrix hermitian_sqrt(const CMatrix& m);

enum class SnapshotRole { kY, kZ, kClutter, kNoise, kWhitenedY };

struct SnapshotMatrix {
  CMatrix values;  // (Λ·L) × K
  SnapshotRole role = SnapshotRole::kY;
  int range_bin = 0;
};

struct SignalRow {
  CVector values;  // S_j, j = 0..K-1
  cplx mean{0.0, 0.0};

  double mean_power() const { return values.squaredNorm() / static_cast<double>(values.size()); }
};

/// Draws circular complex Gaussian columns with a fixed covariance.
class InterferenceSampler {
 public:
  explicit InterferenceSampler(const CovarianceModel& model);

  SnapshotMatrix draw(SnapshotRole role, int snapshots, RandomStream& rng) const;

 private:
  CMatrix clutter_root_;
  CMatrix noise_root_;
};

/// One-shot convenience for role kClutter or kNoise.
SnapshotMatrix draw_clutter_noise(const CovarianceModel& model, SnapshotRole role, int snapshots,
                                  RandomStream& rng);

/// Solves against R = Σ_c + Σ_n to give the amplitude hitting the target output SCNR.
class ScnrCalibrator {
 public:
  explicit ScnrCalibrator(const CovarianceModel& model);

  /// a^H R^{-1} a
  double matched_gain(const CVector& a) const;
  /// μ with μ² · a^H R^{-1} a = 10^(scnr_db / 10).
  double amplitude(double scnr_db, const CVector& a) const;

 private:
  Eigen::LLT<CMatrix> llt_;
};

double calibrate_amplitude(const SceneConfig& cfg, const CovarianceModel& model,
                           const SpaceTimeVector& a);

/// Subtracts the mean snapshot from every column.
void mean_center(CMatrix& m);

struct SynthOptions {
  double y_interference_scale = 1.0;  // scales C + N inside Y only
};

struct TrialData {
  std::vector<SnapshotMatrix> y;  // one per range bin
  std::vector<SnapshotMatrix> z;
  SignalRow signal;
};

/// Y = a(θ*, 0, v*) S + C + N in bin ρ*, Y = C + N elsewhere, Z = fresh C̄ + N̄.
/// Signal phases come from `signal_rng`, interference from `interference_rng`.
TrialData synthesize_trial(const SceneConfig& cfg, const SubarrayPhaseCenters& z,
                           const InterferenceSampler& sampler, const TargetTruth& truth,
                           RandomStream& signal_rng, RandomStream& interference_rng,
                           const SynthOptions& opts = {});

struct CovarianceEstimate {
  CMatrix matrix;
  double loading = 0.0;  // diagonal amount added, 0 when none was needed
};

/// Z Z^H / K, diagonally loaded when rank deficient.
CovarianceEstimate estimate_covariance(const CMatrix& z);

/// Σ^{-1/2} via eigendecomposition.
class Whitener {
 public:
  explicit Whitener(const CMatrix& covariance);

  const CMatrix& matrix() const { return inv_sqrt_; }
  CMatrix apply(const CMatrix& m) const { return inv_sqrt_ * m; }
  CVector apply(const CVector& v) const { return inv_sqrt_ * v; }

 private:
  CMatrix inv_sqrt_;
};

CMatrix whiten(const CMatrix& covariance, const CMatrix& m);

}  // namespace stapcrb

#endif  // STAPCRB_SYNTH_HPP
