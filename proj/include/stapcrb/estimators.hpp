#ifndef STAPCRB_ESTIMATORS_HPP
#define STAPCRB_ESTIMATORS_HPP

#include <string>

#include "stapcrb/common.hpp"
#include "stapcrb/heatmap.hpp"
#include "stapcrb/scene.hpp"
#include "stapcrb/synth.hpp"

namespace stapcrb {

enum class Method { kMP, kGD, kCNN };

std::string to_string(Method m);

struct Estimate {
  double azimuth_deg = 0.0;
  double velocity_mps = 0.0;
  Method method = Method::kMP;
  int iterations_used = 0;
  double final_loss = 0.0;  // GD only
};

enum class GradientMode { kAnalytic, kFiniteDifference };

/// Unit in which the azimuth step θ ← θ − α ∇L is taken.
enum class AngleUnit { kRadians, kDegrees };

struct GdConfig {
  double learning_rate_az = 1e-5;
  double learning_rate_vel = 1e-2;
  int iters_az = 100;
  int iters_vel = 150;
  GradientMode gradient_mode = GradientMode::kAnalytic;
  double fd_step = 1e-5;  // relative to the parameter magnitude
  AngleUnit azimuth_unit = AngleUnit::kRadians;

  void validate() const;
};

/// Center of the global argmax cell; ties go to the lowest flat index.
Estimate peak_cell_midpoint(const HeatmapTensor& t);

/// ĉ = ã^H Ỹ / (ã^H ã).
Eigen::RowVectorXcd ls_coefficients(const CVector& a_whitened, const CMatrix& y_whitened);

/// Mean squared modulus of Ỹ − ã ĉ over all Λ·L rows and K columns.
double gd_loss(const CVector& a_whitened, const CMatrix& y_whitened);

struct LossGradient {
  double loss = 0.0;
  double gradient = 0.0;  // per unit of the parameter the derivative was taken in
};

/// Loss and its derivative given dã/dp, with ĉ refit at every p.
LossGradient gd_loss_gradient(const CVector& a_whitened, const CVector& da_whitened,
                              const CMatrix& y_whitened);

/// Target bin inputs shared by both gradient-descent estimators.
struct GdProblem {
  const SceneConfig& cfg;
  const SubarrayPhaseCenters& z;
  const Whitener& whitener;
  const CMatrix& y_whitened;
};

/// Azimuth descent at known v*. Result's velocity is v*.
Estimate gd_azimuth(const GdProblem& problem, double azimuth_init_deg, double velocity_true_mps,
                    const GdConfig& gd);

/// Velocity descent at known θ*. Result's azimuth is θ*.
Estimate gd_velocity(const GdProblem& problem, double azimuth_true_deg, double velocity_init_mps,
                     const GdConfig& gd);

/// Loss and gradient of the azimuth problem at θ (degrees), gradient in gd.azimuth_unit.
LossGradient azimuth_objective(const GdProblem& problem, double azimuth_deg, double velocity_mps,
                               const GdConfig& gd);
/// Loss and gradient of the velocity problem at v, gradient per m/s.
LossGradient velocity_objective(const GdProblem& problem, double azimuth_deg, double velocity_mps,
                                const GdConfig& gd);

}  // namespace stapcrb

#endif  // STAPCRB_ESTIMATORS_HPP
