#include "stapcrb/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stapcrb/steering.hpp"

namespace stapcrb {

std::string to_string(Method m) {
  switch (m) {
    case Method::kMP: return "MP";
    case Method::kGD: return "GD";
    case Method::kCNN: return "CNN";
  }
  return "?";
}

void GdConfig::validate() const {
  if (!(learning_rate_az >= 0.0) || !(learning_rate_vel >= 0.0)) {
    throw ConfigError("learning rates must be non-negative");
  }
  if (iters_az < 1 || iters_vel < 1) throw ConfigError("iteration counts must be >= 1");
  if (gradient_mode == GradientMode::kFiniteDifference && !(fd_step > 0.0)) {
    throw ConfigError("fd_step must be positive");
  }
}

Estimate peak_cell_midpoint(const HeatmapTensor& t) {
  if (t.values.empty()) throw DegenerateInputError("empty heatmap tensor");
  std::size_t best = 0;
  for (std::size_t i = 1; i < t.values.size(); ++i) {
    if (t.values[i] > t.values[best]) best = i;
  }
  if (!(t.values[best] > 0.0)) throw DegenerateInputError("heatmap tensor has no positive cell");
  const std::size_t l = best % t.n_vel;
  const std::size_t j = (best / t.n_vel) % t.n_az;
  Estimate e;
  e.azimuth_deg = t.azimuth_deg[j];
  e.velocity_mps = t.velocity_mps[l];
  e.method = Method::kMP;
  return e;
}

Eigen::RowVectorXcd ls_coefficients(const CVector& a_whitened, const CMatrix& y_whitened) {
  const double energy = a_whitened.squaredNorm();
  if (!(energy > 0.0)) throw DegenerateInputError("least squares with zero steering vector");
  return (a_whitened.adjoint() * y_whitened) / energy;
}

double gd_loss(const CVector& a_whitened, const CMatrix& y_whitened) {
  const Eigen::RowVectorXcd c = ls_coefficients(a_whitened, y_whitened);
  const double n = static_cast<double>(y_whitened.rows()) * static_cast<double>(y_whitened.cols());
  return (y_whitened - a_whitened * c).squaredNorm() / n;
}

LossGradient gd_loss_gradient(const CVector& a_whitened, const CVector& da_whitened,
                              const CMatrix& y_whitened) {
  const double g = a_whitened.squaredNorm();
  if (!(g > 0.0)) throw DegenerateInputError("least squares with zero steering vector");
  const double n = static_cast<double>(y_whitened.rows()) * static_cast<double>(y_whitened.cols());
  const Eigen::RowVectorXcd proj = a_whitened.adjoint() * y_whitened;
  const Eigen::RowVectorXcd dproj = da_whitened.adjoint() * y_whitened;
  const double f = proj.squaredNorm();
  const double df = 2.0 * (proj.conjugate().cwiseProduct(dproj)).sum().real();
  const double dg = 2.0 * a_whitened.dot(da_whitened).real();
  LossGradient out;
  // Envelope form of the refit loss: ‖Ỹ‖² − |ã^H Ỹ|²/‖ã‖².
  out.loss = gd_loss(a_whitened, y_whitened);
  out.gradient = -(df * g - f * dg) / (g * g * n);
  return out;
}

namespace {

double loss_at(const GdProblem& p, double az_deg, double v) {
  const CVector a = space_time_steering(p.cfg, p.z, deg_to_rad(az_deg), p.cfg.elevation_rad, v).values;
  return gd_loss(p.whitener.apply(a), p.y_whitened);
}

void check_finite(const LossGradient& lg, const char* what, int iteration) {
  if (!std::isfinite(lg.loss) || !std::isfinite(lg.gradient)) {
    std::ostringstream msg;
    msg << what << ": non-finite loss or gradient at iteration " << iteration;
    throw NumericalError(msg.str());
  }
}

}  // namespace

LossGradient azimuth_objective(const GdProblem& p, double azimuth_deg, double velocity_mps,
                               const GdConfig& gd) {
  const double unit = gd.azimuth_unit == AngleUnit::kRadians ? 1.0 : kPi / 180.0;  // d(rad)/d(unit)
  if (gd.gradient_mode == GradientMode::kAnalytic) {
    const double theta = deg_to_rad(azimuth_deg);
    const CVector a = space_time_steering(p.cfg, p.z, theta, p.cfg.elevation_rad, velocity_mps).values;
    const CVector da = steering_derivative_theta(p.cfg, p.z, theta, p.cfg.elevation_rad, velocity_mps);
    LossGradient lg = gd_loss_gradient(p.whitener.apply(a), p.whitener.apply(da), p.y_whitened);
    lg.gradient *= unit;
    return lg;
  }
  // Central difference in the step unit; h relative to the parameter magnitude.
  const double value = gd.azimuth_unit == AngleUnit::kRadians ? deg_to_rad(azimuth_deg) : azimuth_deg;
  const double h = gd.fd_step * std::max(std::abs(value), 1e-3);
  const double h_deg = gd.azimuth_unit == AngleUnit::kRadians ? rad_to_deg(h) : h;
  LossGradient lg;
  lg.loss = loss_at(p, azimuth_deg, velocity_mps);
  lg.gradient = (loss_at(p, azimuth_deg + h_deg, velocity_mps) -
                 loss_at(p, azimuth_deg - h_deg, velocity_mps)) /
                (2.0 * h);
  return lg;
}

LossGradient velocity_objective(const GdProblem& p, double azimuth_deg, double velocity_mps,
                                const GdConfig& gd) {
  if (gd.gradient_mode == GradientMode::kAnalytic) {
    const double theta = deg_to_rad(azimuth_deg);
    const CVector a = space_time_steering(p.cfg, p.z, theta, p.cfg.elevation_rad, velocity_mps).values;
    const CVector da = steering_derivative_velocity(p.cfg, p.z, theta, p.cfg.elevation_rad, velocity_mps);
    return gd_loss_gradient(p.whitener.apply(a), p.whitener.apply(da), p.y_whitened);
  }
  const double h = gd.fd_step * std::max(std::abs(velocity_mps), 1e-3);
  LossGradient lg;
  lg.loss = loss_at(p, azimuth_deg, velocity_mps);
  lg.gradient = (loss_at(p, azimuth_deg, velocity_mps + h) -
                 loss_at(p, azimuth_deg, velocity_mps - h)) /
                (2.0 * h);
  return lg;
}

Estimate gd_azimuth(const GdProblem& p, double azimuth_init_deg, double velocity_true_mps,
                    const GdConfig& gd) {
  gd.validate();
  const double to_deg = gd.azimuth_unit == AngleUnit::kRadians ? 180.0 / kPi : 1.0;
  double theta = azimuth_init_deg;
  for (int t = 0; t < gd.iters_az; ++t) {
    const LossGradient lg = azimuth_objective(p, theta, velocity_true_mps, gd);
    check_finite(lg, "gd_azimuth", t);
    theta -= gd.learning_rate_az * lg.gradient * to_deg;
    theta = std::clamp(theta, p.cfg.azimuth_min_deg, p.cfg.azimuth_max_deg);
  }
  Estimate e;
  e.azimuth_deg = theta;
  e.velocity_mps = velocity_true_mps;
  e.method = Method::kGD;
  e.iterations_used = gd.iters_az;
  e.final_loss = loss_at(p, theta, velocity_true_mps);
  if (!std::isfinite(e.final_loss)) throw NumericalError("gd_azimuth: non-finite final loss");
  return e;
}

Estimate gd_velocity(const GdProblem& p, double azimuth_true_deg, double velocity_init_mps,
                     const GdConfig& gd) {
  gd.validate();
  double v = velocity_init_mps;
  for (int t = 0; t < gd.iters_vel; ++t) {
    const LossGradient lg = velocity_objective(p, azimuth_true_deg, v, gd);
    check_finite(lg, "gd_velocity", t);
    v -= gd.learning_rate_vel * lg.gradient;
    v = std::clamp(v, p.cfg.velocity_min_mps, p.cfg.velocity_max_mps);
  }
  Estimate e;
  e.azimuth_deg = azimuth_true_deg;
  e.velocity_mps = v;
  e.method = Method::kGD;
  e.iterations_used = gd.iters_vel;
  e.final_loss = loss_at(p, azimuth_true_deg, v);
  if (!std::isfinite(e.final_loss)) throw NumericalError("gd_velocity: non-finite final loss");
  return e;
}

}  // namespace stapcrb
