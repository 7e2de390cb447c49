#ifndef STAPCRB_CRB_HPP
#define STAPCRB_CRB_HPP

#include <span>
#include <string>
#include <vector>

#include "stapcrb/common.hpp"
#include "stapcrb/random.hpp"
#include "stapcrb/scene.hpp"
#include "stapcrb/synth.hpp"

namespace stapcrb {

/// verbatim: Fisher information of one snapshot. snapshot: multiplied by K.
enum class CrbScaling { kPaperVerbatim, kSnapshotScaled };

/// Signal power entering the Fisher information: |S̄|² or mean |S_j|².
enum class CrbAmplitude { kMeanSignal, kSignalPower };

std::string to_string(CrbScaling s);
std::string to_string(CrbAmplitude a);

/// Solves quadratic forms d^H R^{-1} d for the true interference covariance.
class InterferenceSolver {
 public:
  explicit InterferenceSolver(const CMatrix& r);
  double quadratic(const CVector& d) const;
  const CMatrix& root() const { return root_; }

 private:
  Eigen::LLT<CMatrix> llt_;
  CMatrix root_;  // R^{1/2}, for sampling
};

/// Fisher information of a parameter p for y ~ CN(b(p) S̄, R):
/// 2 |S̄|² Re[(∂b/∂p)^H R^{-1} (∂b/∂p)], per unit² of p.
double fisher_information(double signal_power, const CVector& db_dp, const InterferenceSolver& r);

/// Per rad².
double fisher_theta(cplx mean_signal, const CVector& db_dtheta, const CMatrix& r);
/// Per (m/s)².
double fisher_velocity(cplx mean_signal, const CVector& db_dv, const CMatrix& r);

struct CrbReport {
  bool bounded = false;  // false: zero Fisher information, CRB unbounded
  double crb_theta = 0.0;        // deg²
  double crb_velocity = 0.0;     // (m/s)²
  double fisher_theta = 0.0;     // per deg²
  double fisher_velocity = 0.0;  // per (m/s)²
  CrbScaling scaling = CrbScaling::kPaperVerbatim;
};

CrbReport crb_report(const SceneConfig& cfg, const SubarrayPhaseCenters& z, const InterferenceSolver& r,
                     const TargetTruth& truth, double signal_power, CrbScaling scaling);

/// Signal power selected by `amplitude` for a realized signal row.
double crb_signal_power(const SignalRow& s, CrbAmplitude amplitude);

struct CrbAverage {
  double crb_theta = 0.0;
  double crb_velocity = 0.0;
  int count = 0;
  int excluded = 0;
};

/// Arithmetic mean over bounded reports (fixed-order pairwise summation).
CrbAverage crb_sweep_average(std::span<const CrbReport> reports);

enum class FisherParameter { kAzimuth, kVelocity };

/// Monte Carlo E[(∂/∂p ln p(y|p))²] at the truth, score by central finite
/// differences of the complex Gaussian log-likelihood. Units as fisher_theta /
/// fisher_velocity.
double fisher_monte_carlo_check(const SceneConfig& cfg, const SubarrayPhaseCenters& z,
                                const InterferenceSolver& r, const TargetTruth& truth,
                                cplx mean_signal, FisherParameter parameter, int n_mc,
                                RandomStream& rng);

}  // namespace stapcrb

#endif  // STAPCRB_CRB_HPP
