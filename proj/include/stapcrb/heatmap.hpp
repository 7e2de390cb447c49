#ifndef STAPCRB_HEATMAP_HPP
#define STAPCRB_HEATMAP_HPP

#include <optional>
#include <span>
#include <vector>

#include "stapcrb/common.hpp"
#include "stapcrb/scene.hpp"
#include "stapcrb/synth.hpp"

namespace stapcrb {

/// κ × n_az × n_vel tensor of NAMF statistics, velocity index fastest.
struct HeatmapTensor {
  int bins = 0;
  int n_az = 0;
  int n_vel = 0;
  std::vector<double> values;
  std::vector<double> azimuth_deg;
  std::vector<double> velocity_mps;
  std::optional<TargetTruth> truth;

  HeatmapTensor() = default;
  HeatmapTensor(int bins_, const std::vector<double>& az, const std::vector<double>& vel);

  std::size_t flat_index(int bin, int j, int l) const {
    return (static_cast<std::size_t>(bin) * n_az + j) * n_vel + l;
  }
  double& at(int bin, int j, int l) { return values[flat_index(bin, j, l)]; }
  double at(int bin, int j, int l) const { return values[flat_index(bin, j, l)]; }
};

/// NAMF statistic ‖ã^H Ỹ‖² / ((ã^H ã) ‖diag(Ỹ^H Ỹ)‖₂) on whitened inputs.
double namf(const CVector& a_whitened, const CMatrix& y_whitened);

/// Steering vectors for every (θ_j, v_l) cell as columns j·n_vel + l.
class SteeringGrid {
 public:
  SteeringGrid(const SceneConfig& cfg, const SubarrayPhaseCenters& z);

  const CMatrix& vectors() const { return vectors_; }
  const std::vector<double>& azimuth_deg() const { return azimuth_deg_; }
  const std::vector<double>& velocity_mps() const { return velocity_mps_; }
  int n_az() const { return static_cast<int>(azimuth_deg_.size()); }
  int n_vel() const { return static_cast<int>(velocity_mps_.size()); }

 private:
  CMatrix vectors_;
  std::vector<double> azimuth_deg_;
  std::vector<double> velocity_mps_;
};

/// Whitening state of one range bin: Σ̂^{-1/2} and Ỹ = Σ̂^{-1/2} Y.
struct WhitenedBin {
  Whitener whitener;
  CMatrix y;
};

WhitenedBin whiten_bin(const CMatrix& z, const CMatrix& y);

HeatmapTensor build_heatmap(const SteeringGrid& grid, std::span<const WhitenedBin> bins);

/// Whitens bin b with covariances[b] and sweeps the grid.
HeatmapTensor build_heatmap(const SceneConfig& cfg, std::span<const CMatrix> covariances,
                            std::span<const CMatrix> y, const SubarrayPhaseCenters& z);

}  // namespace stapcrb

#endif  // STAPCRB_HEATMAP_HPP
