#include "stapcrb/scene.hpp"

#include <cmath>
#include <string>

namespace stapcrb {

int grid_count(double min, double max, double step) {
  if (!(step > 0.0) || !(max >= min)) throw ConfigError("grid requires step > 0 and max >= min");
  return static_cast<int>(std::floor((max - min) / step + 1e-9)) + 1;
}

int SceneConfig::azimuth_count() const {
  return grid_count(azimuth_min_deg, azimuth_max_deg, azimuth_step_deg);
}

int SceneConfig::velocity_count() const {
  return grid_count(velocity_min_mps, velocity_max_mps, velocity_step_mps);
}

void SceneConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid scene: ") + what);
  };
  require(carrier_freq_hz > 0.0 && bandwidth_hz > 0.0 && prf_hz > 0.0,
          "frequencies must be positive");
  require(num_pulses >= 1, "num_pulses >= 1");
  require(num_channels >= 1, "num_channels >= 1");
  require(num_range_bins >= 1, "num_range_bins >= 1");
  require(snapshots >= 2, "snapshots >= 2 (mean-centering annihilates K = 1)");
  require(full_array_cols >= 1 && full_array_rows >= 1, "array dimensions >= 1");
  require(full_array_cols % num_channels == 0, "full_array_cols divisible by num_channels");
  require(element_spacing_m > 0.0, "element_spacing_m > 0");
  require(azimuth_min_deg < azimuth_max_deg, "azimuth_min < azimuth_max");
  require(velocity_min_mps < velocity_max_mps, "velocity_min < velocity_max");
  require(azimuth_step_deg > 0.0 && velocity_step_mps > 0.0, "grid steps > 0");
  require(rcs_spread >= 0.0 && rcs_spread <= 200.0, "rcs_spread in [0, 200] percent");
  const double span = range_upper_m - range_lower_m;
  const double expected = num_range_bins * range_bin_size_m();
  require(std::abs(span - expected) <= 1e-6 * expected,
          "range_upper - range_lower must equal num_range_bins * c/(2B)");
}

SceneConfig default_scene() { return SceneConfig{}; }

SubarrayPhaseCenters phase_centers(const SceneConfig& cfg) {
  if (cfg.num_channels < 1 || cfg.full_array_cols % cfg.num_channels != 0) {
    throw ConfigError("full_array_cols must be divisible by num_channels");
  }
  const int group = cfg.full_array_cols / cfg.num_channels;
  const double first = -0.5 * (cfg.full_array_cols - 1) * cfg.element_spacing_m;
  SubarrayPhaseCenters out;
  out.positions = Eigen::MatrixX3d::Zero(cfg.num_channels, 3);
  for (int m = 0; m < cfg.num_channels; ++m) {
    // Centroid of the group's element columns; rows are symmetric about 0.
    const double mid_col = m * group + 0.5 * (group - 1);
    out.positions(m, 1) = first + mid_col * cfg.element_spacing_m;
  }
  return out;
}

TargetTruth place_target(const SceneConfig& cfg, RandomStream& rng,
                         const AmplitudeCalibration& mean_amplitude) {
  TargetTruth t;
  t.range_bin_index = rng.uniform_int(0, cfg.num_range_bins - 1);
  t.azimuth_deg = rng.uniform(cfg.azimuth_min_deg, cfg.azimuth_max_deg);
  t.velocity_mps = rng.uniform(cfg.velocity_min_mps, cfg.velocity_max_mps);
  const double u = rng.uniform();
  const double mu = mean_amplitude ? mean_amplitude(t.azimuth_deg, t.velocity_mps) : 1.0;
  const double half = 0.5 * cfg.rcs_spread / 100.0 * mu;
  t.rcs = (mu - half) + 2.0 * half * u;
  return t;
}

}  // namespace stapcrb
