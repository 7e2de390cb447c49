#ifndef STAPCRB_STEERING_HPP
#define STAPCRB_STEERING_HPP

#include "stapcrb/common.hpp"
#include "stapcrb/scene.hpp"

namespace stapcrb {

/// a(θ, φ, v) = ψ(v) ⊗ ξ(θ, φ), length Λ·L, entry p·L + m = ψ_p ξ_m.
struct SpaceTimeVector {
  CVector values;
  double theta_rad = 0.0;
  double phi_rad = 0.0;
  double velocity_mps = 0.0;
};

/// Analytic ∂a/∂θ (per radian) and ∂a/∂v (per m/s).
struct SteeringDerivative {
  CVector d_theta;
  CVector d_velocity;
};

double doppler_frequency(const SceneConfig& cfg, double velocity_mps);

/// ξ_m = exp(i k ⟨z_m, u(θ, φ)⟩), u = [cosφ cosθ, cosφ sinθ, sinφ].
CVector array_steering(const SceneConfig& cfg, const SubarrayPhaseCenters& z,
                       double theta_rad, double phi_rad);

/// ψ_p = exp(−i 2π (f_dop / f_PR) p).
CVector doppler_steering(const SceneConfig& cfg, double velocity_mps);

CVector kronecker(const CVector& left, const CVector& right);

SpaceTimeVector space_time_steering(const SceneConfig& cfg, const SubarrayPhaseCenters& z,
                                    double theta_rad, double phi_rad, double velocity_mps);

/// ψ(v) ⊗ [i k (z g) ⊙ ξ(θ, φ)], g = [−cosφ sinθ, cosφ cosθ, 0].
CVector steering_derivative_theta(const SceneConfig& cfg, const SubarrayPhaseCenters& z,
                                  double theta_rad, double phi_rad, double velocity_mps);

/// [−i (2 f_c / c) h ⊙ ψ(v)] ⊗ ξ(θ, φ), h_p = 2π p / f_PR.
CVector steering_derivative_velocity(const SceneConfig& cfg, const SubarrayPhaseCenters& z,
                                     double theta_rad, double phi_rad, double velocity_mps);

SteeringDerivative steering_derivatives(const SceneConfig& cfg, const SubarrayPhaseCenters& z,
                                        double theta_rad, double phi_rad, double velocity_mps);

}  // namespace stapcrb

#endif  // STAPCRB_STEERING_HPP
