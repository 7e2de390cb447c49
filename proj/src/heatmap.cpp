#include "stapcrb/heatmap.hpp"

#include <cmath>
#include <sstream>

#include "stapcrb/steering.hpp"

namespace stapcrb {

HeatmapTensor::HeatmapTensor(int bins_, const std::vector<double>& az, const std::vector<double>& vel)
    : bins(bins_),
      n_az(static_cast<int>(az.size())),
      n_vel(static_cast<int>(vel.size())),
      values(static_cast<std::size_t>(bins_) * az.size() * vel.size(), 0.0),
      azimuth_deg(az),
      velocity_mps(vel) {}

double namf(const CVector& a_whitened, const CMatrix& y_whitened) {
  if (a_whitened.size() != y_whitened.rows()) throw ConfigError("namf: dimension mismatch");
  const double a_energy = a_whitened.squaredNorm();
  const double column_norm = y_whitened.colwise().squaredNorm().norm();
  if (!(a_energy > 0.0) || !(column_norm > 0.0)) {
    throw DegenerateInputError("namf: zero steering vector or zero data");
  }
  const double numerator = (a_whitened.adjoint() * y_whitened).squaredNorm();
  return numerator / (a_energy * column_norm);
}

SteeringGrid::SteeringGrid(const SceneConfig& cfg, const SubarrayPhaseCenters& z) {
  const int n_az = cfg.azimuth_count();
  const int n_vel = cfg.velocity_count();
  for (int j = 0; j < n_az; ++j) azimuth_deg_.push_back(cfg.azimuth_at(j));
  for (int l = 0; l < n_vel; ++l) velocity_mps_.push_back(cfg.velocity_at(l));
  vectors_.resize(cfg.space_time_dim(), static_cast<Eigen::Index>(n_az) * n_vel);
  for (int j = 0; j < n_az; ++j) {
    for (int l = 0; l < n_vel; ++l) {
      vectors_.col(static_cast<Eigen::Index>(j) * n_vel + l) =
          space_time_steering(cfg, z, deg_to_rad(azimuth_deg_[j]), cfg.elevation_rad, velocity_mps_[l]).values;
    }
  }
}

WhitenedBin whiten_bin(const CMatrix& z, const CMatrix& y) {
  Whitener w(estimate_covariance(z).matrix);
  CMatrix yw = w.apply(y);
  return {std::move(w), std::move(yw)};
}

HeatmapTensor build_heatmap(const SteeringGrid& grid, std::span<const WhitenedBin> bins) {
  HeatmapTensor out(static_cast<int>(bins.size()), grid.azimuth_deg(), grid.velocity_mps());
  for (std::size_t b = 0; b < bins.size(); ++b) {
    const CMatrix& yw = bins[b].y;
    const double column_norm = yw.colwise().squaredNorm().norm();
    const CMatrix aw = bins[b].whitener.matrix() * grid.vectors();
    const Eigen::VectorXd a_energy = aw.colwise().squaredNorm().transpose();
    const Eigen::VectorXd numerator = (aw.adjoint() * yw).rowwise().squaredNorm();
    for (int j = 0; j < out.n_az; ++j) {
      for (int l = 0; l < out.n_vel; ++l) {
        const Eigen::Index c = static_cast<Eigen::Index>(j) * out.n_vel + l;
        if (!(a_energy(c) > 0.0) || !(column_norm > 0.0)) {
          std::ostringstream msg;
          msg << "namf degenerate at bin " << b << ", azimuth " << grid.azimuth_deg()[j]
              << " deg, velocity " << grid.velocity_mps()[l] << " m/s";
          throw DegenerateInputError(msg.str());
        }
        out.at(static_cast<int>(b), j, l) = numerator(c) / (a_energy(c) * column_norm);
      }
    }
  }
  return out;
}

HeatmapTensor build_heatmap(const SceneConfig& cfg, std::span<const CMatrix> covariances,
                            std::span<const CMatrix> y, const SubarrayPhaseCenters& z) {
  if (covariances.size() != y.size()) throw ConfigError("one covariance per range bin required");
  std::vector<WhitenedBin> bins;
  bins.reserve(y.size());
  for (std::size_t b = 0; b < y.size(); ++b) {
    Whitener w(covariances[b]);
    CMatrix yw = w.apply(y[b]);
    bins.push_back({std::move(w), std::move(yw)});
  }
  return build_heatmap(SteeringGrid(cfg, z), bins);
}

}  // namespace stapcrb
