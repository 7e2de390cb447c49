#ifndef STAPCRB_COMMON_HPP
#define STAPCRB_COMMON_HPP

#include <complex>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

namespace stapcrb {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

// Range-bin width c/(2B) is exactly 30 m at B = 5 MHz with this value.
inline constexpr double kSpeedOfLight = 3.0e8;
inline constexpr double kPi = std::numbers::pi;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Invalid or inconsistent configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Inputs for which a statistic or estimate is undefined (zero vectors, empty tensors).
class DegenerateInputError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Non-finite values or factorization failures.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stapcrb

#endif  // STAPCRB_COMMON_HPP
