#include "stapcrb/steering.hpp"

#include <cmath>

namespace stapcrb {

namespace {

constexpr cplx kI{0.0, 1.0};

Eigen::Vector3d look_direction(double theta, double phi) {
  return {std::cos(phi) * std::cos(theta), std::cos(phi) * std::sin(theta), std::sin(phi)};
}

}  // namespace

double doppler_frequency(const SceneConfig& cfg, double velocity_mps) {
  return 2.0 * velocity_mps * cfg.carrier_freq_hz / kSpeedOfLight;
}

CVector array_steering(const SceneConfig& cfg, const SubarrayPhaseCenters& z,
                       double theta_rad, double phi_rad) {
  const Eigen::VectorXd phase = cfg.wavenumber() * (z.positions * look_direction(theta_rad, phi_rad));
  CVector out(phase.size());
  for (Eigen::Index m = 0; m < phase.size(); ++m) out(m) = std::polar(1.0, phase(m));
  return out;
}

CVector doppler_steering(const SceneConfig& cfg, double velocity_mps) {
  const double normalized = doppler_frequency(cfg, velocity_mps) / cfg.prf_hz;
  CVector out(cfg.num_pulses);
  for (int p = 0; p < cfg.num_pulses; ++p) {
    out(p) = std::polar(1.0, -2.0 * kPi * normalized * p);
  }
  return out;
}

CVector kronecker(const CVector& left, const CVector& right) {
  CVector out(left.size() * right.size());
  for (Eigen::Index p = 0; p < left.size(); ++p) {
    out.segment(p * right.size(), right.size()) = left(p) * right;
  }
  return out;
}

SpaceTimeVector space_time_steering(const SceneConfig& cfg, const SubarrayPhaseCenters& z,
                                    double theta_rad, double phi_rad, double velocity_mps) {
  return {kronecker(doppler_steering(cfg, velocity_mps), array_steering(cfg, z, theta_rad, phi_rad)),
          theta_rad, phi_rad, velocity_mps};
}

CVector steering_derivative_theta(const SceneConfig& cfg, const SubarrayPhaseCenters& z,
                                  double theta_rad, double phi_rad, double velocity_mps) {
  const Eigen::Vector3d g{-std::cos(phi_rad) * std::sin(theta_rad),
                          std::cos(phi_rad) * std::cos(theta_rad), 0.0};
  const Eigen::VectorXd zg = z.positions * g;
  CVector spatial = array_steering(cfg, z, theta_rad, phi_rad);
  for (Eigen::Index m = 0; m < spatial.size(); ++m) spatial(m) *= kI * cfg.wavenumber() * zg(m);
  return kronecker(doppler_steering(cfg, velocity_mps), spatial);
}

CVector steering_derivative_velocity(const SceneConfig& cfg, const SubarrayPhaseCenters& z,
                                     double theta_rad, double phi_rad, double velocity_mps) {
  CVector temporal = doppler_steering(cfg, velocity_mps);
  const double scale = 2.0 * cfg.carrier_freq_hz / kSpeedOfLight;
  for (int p = 0; p < cfg.num_pulses; ++p) {
    const double h = 2.0 * kPi * p / cfg.prf_hz;
    temporal(p) *= -kI * scale * h;
  }
  return kronecker(temporal, array_steering(cfg, z, theta_rad, phi_rad));
}

SteeringDerivative steering_derivatives(const SceneConfig& cfg, const SubarrayPhaseCenters& z,
                                        double theta_rad, double phi_rad, double velocity_mps) {
  return {steering_derivative_theta(cfg, z, theta_rad, phi_rad, velocity_mps),
          steering_derivative_velocity(cfg, z, theta_rad, phi_rad, velocity_mps)};
}

}  // namespace stapcrb
