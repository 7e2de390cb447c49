#include "stapcrb/crb.hpp"

#include <cmath>

#include "stapcrb/parallel.hpp"
#include "stapcrb/steering.hpp"

namespace stapcrb {

std::string to_string(CrbScaling s) {
  return s == CrbScaling::kPaperVerbatim ? "verbatim" : "snapshot";
}

std::string to_string(CrbAmplitude a) {
  return a == CrbAmplitude::kMeanSignal ? "mean" : "power";
}

InterferenceSolver::InterferenceSolver(const CMatrix& r) : llt_(r), root_(hermitian_sqrt(r)) {
  if (llt_.info() != Eigen::Success) throw NumericalError("interference covariance is not positive definite");
}

double InterferenceSolver::quadratic(const CVector& d) const {
  return llt_.matrixL().solve(d).squaredNorm();
}

double fisher_information(double signal_power, const CVector& db_dp, const InterferenceSolver& r) {
  return 2.0 * signal_power * r.quadratic(db_dp);
}

double fisher_theta(cplx mean_signal, const CVector& db_dtheta, const CMatrix& r) {
  return fisher_information(std::norm(mean_signal), db_dtheta, InterferenceSolver(r));
}

double fisher_velocity(cplx mean_signal, const CVector& db_dv, const CMatrix& r) {
  return fisher_information(std::norm(mean_signal), db_dv, InterferenceSolver(r));
}

CrbReport crb_report(const SceneConfig& cfg, const SubarrayPhaseCenters& z, const InterferenceSolver& r,
                     const TargetTruth& truth, double signal_power, CrbScaling scaling) {
  const double theta = deg_to_rad(truth.azimuth_deg);
  const double scale = scaling == CrbScaling::kSnapshotScaled ? cfg.snapshots : 1.0;
  const double per_rad2 = scale * fisher_information(
      signal_power, steering_derivative_theta(cfg, z, theta, cfg.elevation_rad, truth.velocity_mps), r);
  const double per_mps2 = scale * fisher_information(
      signal_power, steering_derivative_velocity(cfg, z, theta, cfg.elevation_rad, truth.velocity_mps), r);

  CrbReport out;
  out.scaling = scaling;
  out.fisher_theta = per_rad2 * (kPi / 180.0) * (kPi / 180.0);
  out.fisher_velocity = per_mps2;
  out.bounded = out.fisher_theta > 0.0 && out.fisher_velocity > 0.0 &&
                std::isfinite(out.fisher_theta) && std::isfinite(out.fisher_velocity);
  if (out.bounded) {
    out.crb_theta = 1.0 / out.fisher_theta;
    out.crb_velocity = 1.0 / out.fisher_velocity;
  }
  return out;
}

double crb_signal_power(const SignalRow& s, CrbAmplitude amplitude) {
  return amplitude == CrbAmplitude::kMeanSignal ? std::norm(s.mean) : s.mean_power();
}

CrbAverage crb_sweep_average(std::span<const CrbReport> reports) {
  if (reports.empty()) throw DegenerateInputError("CRB average over an empty trial set");
  std::vector<double> theta;
  std::vector<double> vel;
  CrbAverage out;
  for (const CrbReport& r : reports) {
    if (!r.bounded) {
      ++out.excluded;
      continue;
    }
    theta.push_back(r.crb_theta);
    vel.push_back(r.crb_velocity);
  }
  out.count = static_cast<int>(theta.size());
  if (out.count > 0) {
    out.crb_theta = pairwise_sum(theta) / out.count;
    out.crb_velocity = pairwise_sum(vel) / out.count;
  }
  return out;
}

double fisher_monte_carlo_check(const SceneConfig& cfg, const SubarrayPhaseCenters& z,
                                const InterferenceSolver& r, const TargetTruth& truth,
                                cplx mean_signal, FisherParameter parameter, int n_mc,
                                RandomStream& rng) {
  if (n_mc < 1) throw ConfigError("n_mc must be >= 1");
  const double theta = deg_to_rad(truth.azimuth_deg);
  const double v = truth.velocity_mps;
  const double h = parameter == FisherParameter::kAzimuth ? 1e-6 : 1e-5;

  auto mean_at = [&](double offset) -> CVector {
    const double th = parameter == FisherParameter::kAzimuth ? theta + offset : theta;
    const double vv = parameter == FisherParameter::kVelocity ? v + offset : v;
    return space_time_steering(cfg, z, th, cfg.elevation_rad, vv).values * mean_signal;
  };
  const CVector m0 = mean_at(0.0);
  const CVector m_plus = mean_at(h);
  const CVector m_minus = mean_at(-h);

  const Eigen::Index n = m0.size();
  CVector w(n);
  double acc = 0.0;
  for (int it = 0; it < n_mc; ++it) {
    for (Eigen::Index i = 0; i < n; ++i) w(i) = rng.complex_normal();
    const CVector y = m0 + r.root() * w;
    // ln p(y | p) = −(y − m(p))^H R^{-1} (y − m(p)) + const
    const double lp_plus = -r.quadratic(y - m_plus);
    const double lp_minus = -r.quadratic(y - m_minus);
    const double score = (lp_plus - lp_minus) / (2.0 * h);
    acc += score * score;
  }
  return acc / n_mc;
}

}  // namespace stapcrb
