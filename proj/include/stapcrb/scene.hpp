#ifndef STAPCRB_SCENE_HPP
#define STAPCRB_SCENE_HPP

#include <cstdint>
#include <functional>

#include "stapcrb/common.hpp"
#include "stapcrb/random.hpp"

namespace stapcrb {

/// Physical and experimental parameters of one scenario. Angles are in
/// degrees here (human-facing); steering math converts to radians.
struct SceneConfig {
  double carrier_freq_hz = 1.0e10;
  double bandwidth_hz = 5.0e6;
  double prf_hz = 1100.0;
  int num_pulses = 4;     // Λ
  int num_channels = 16;  // L, beamformed sub-arrays
  double element_spacing_m = 0.015;
  int full_array_cols = 48;
  int full_array_rows = 5;
  double platform_height_m = 1000.0;
  double range_lower_m = 14538.0;
  double range_upper_m = 14688.0;
  double azimuth_min_deg = 20.0;
  double azimuth_max_deg = 30.0;
  double velocity_min_mps = 175.0;
  double velocity_max_mps = 190.0;
  double azimuth_step_deg = 0.4;
  double velocity_step_mps = 0.75;
  int num_range_bins = 5;  // κ
  double elevation_rad = 0.0;
  double cnr_db = 20.0;
  double rcs_spread = 10.0;  // l, full RCS interval width in percent of μ
  int snapshots = 300;       // K
  double target_scnr_db = 20.0;
  std::uint64_t rng_seed = 1;

  int space_time_dim() const { return num_pulses * num_channels; }
  double range_bin_size_m() const { return kSpeedOfLight / (2.0 * bandwidth_hz); }
  double wavenumber() const { return 2.0 * kPi * carrier_freq_hz / kSpeedOfLight; }

  int azimuth_count() const;
  int velocity_count() const;
  double azimuth_at(int j) const { return azimuth_min_deg + j * azimuth_step_deg; }
  double velocity_at(int l) const { return velocity_min_mps + l * velocity_step_mps; }

  /// Throws ConfigError naming the first violated invariant.
  void validate() const;
};

/// Table-1 scenario with Λ = 4, L = 16, K = 300, 20 dB CNR and SCNR.
/// Δv defaults to 0.75 m/s so the velocity axis has 21 points.
SceneConfig default_scene();

/// Number of points of the closed grid min, min+step, ... <= max.
int grid_count(double min, double max, double step);

struct TargetTruth {
  int range_bin_index = 0;
  double azimuth_deg = 0.0;
  double velocity_mps = 0.0;
  double rcs = 0.0;  // σ, constant modulus of the per-snapshot signal
};

/// Beamformed sub-array phase centers, one row (x, y, z) in meters per channel.
struct SubarrayPhaseCenters {
  Eigen::MatrixX3d positions;
};

/// Sub-arrays of (cols/L × rows) elements along the y axis, array centered at
/// the origin. θ = 0 is broadside (+x).
SubarrayPhaseCenters phase_centers(const SceneConfig& cfg);

/// Mean amplitude μ for a target at (azimuth_deg, velocity_mps).
using AmplitudeCalibration = std::function<double(double azimuth_deg, double velocity_mps)>;

/// Uniform range bin, azimuth, velocity; σ ~ U[μ(1 − l/200), μ(1 + l/200)].
TargetTruth place_target(const SceneConfig& cfg, RandomStream& rng,
                         const AmplitudeCalibration& mean_amplitude);

}  // namespace stapcrb

#endif  // STAPCRB_SCENE_HPP
