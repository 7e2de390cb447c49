#include <doctest.h>

#include <cmath>

#include "stapcrb/steering.hpp"

using namespace stapcrb;

namespace {

SubarrayPhaseCenters zero_centers(int n) {
  SubarrayPhaseCenters z;
  z.positions = Eigen::MatrixX3d::Zero(n, 3);
  return z;
}

double max_abs_dev_from_one(const CVector& v) {
  return (v - CVector::Ones(v.size())).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("array steering special cases") {
  const SceneConfig cfg = default_scene();
  CHECK(max_abs_dev_from_one(array_steering(cfg, zero_centers(16), 0.4, 0.1)) < 1e-15);
  CHECK(max_abs_dev_from_one(array_steering(cfg, phase_centers(cfg), 0.0, 0.0)) < 1e-15);
}

TEST_CASE("adjacent sub-array phase increment at 25 degrees") {
  const SceneConfig cfg = default_scene();
  const CVector xi = array_steering(cfg, phase_centers(cfg), deg_to_rad(25.0), 0.0);
  const double k = 2.0 * 3.14159265358979323846 * 1e10 / 3e8;
  const double expected = k * 0.045 * std::sin(25.0 * 3.14159265358979323846 / 180.0);
  for (int m = 0; m + 1 < xi.size(); ++m) {
    const double inc = std::arg(xi(m + 1) / xi(m));
    CHECK(std::remainder(inc - expected, 2.0 * kPi) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
  }
}

TEST_CASE("Doppler steering") {
  const SceneConfig cfg = default_scene();
  CHECK(doppler_frequency(cfg, 175.0) == doctest::Approx(2.0 * 175.0 * 1e10 / 3e8).epsilon(1e-14));
  CHECK(doppler_frequency(cfg, 175.0) == doctest::Approx(11666.666666666666).epsilon(1e-12));
  const CVector psi = doppler_steering(cfg, 183.0);
  CHECK(psi(0) == cplx(1.0, 0.0));
  const double fd = 2.0 * 183.0 * 1e10 / 3e8;
  for (int p = 0; p < psi.size(); ++p) {
    const cplx ref = std::exp(cplx(0.0, -2.0 * kPi * fd / 1100.0 * p));
    CHECK(std::abs(psi(p) - ref) < 1e-12);
  }
  CHECK(max_abs_dev_from_one(doppler_steering(cfg, 0.0)) < 1e-15);
}

TEST_CASE("Kronecker product layout") {
  CVector one(1);
  one << cplx(1.0, 0.0);
  CVector xi(3);
  xi << cplx(1, 2), cplx(0, 1), cplx(-1, 0);
  CHECK((kronecker(one, xi) - xi).norm() == 0.0);
  CHECK((kronecker(xi, one) - xi).norm() == 0.0);
  CVector psi(2);
  psi << cplx(2, 0), cplx(0, -1);
  const CVector k = kronecker(psi, xi);
  REQUIRE(k.size() == 6);
  for (int p = 0; p < 2; ++p)
    for (int m = 0; m < 3; ++m) CHECK(k(p * 3 + m) == psi(p) * xi(m));

  const SceneConfig cfg = default_scene();
  const CVector a = space_time_steering(cfg, phase_centers(cfg), 0.3, 0.0, 180.0).values;
  CHECK(a.size() == 64);
  CHECK((a.cwiseAbs() - Eigen::VectorXd::Ones(64)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("azimuth derivative") {
  const SceneConfig cfg = default_scene();
  const auto z = phase_centers(cfg);
  const double th = deg_to_rad(25.0);
  const double h = 1e-6;
  const CVector d = steering_derivative_theta(cfg, z, th, 0.0, 182.0);
  const CVector fd = (space_time_steering(cfg, z, th + h, 0.0, 182.0).values -
                      space_time_steering(cfg, z, th - h, 0.0, 182.0).values) /
                     (2 * h);
  CHECK((d - fd).norm() / d.norm() < 1e-6);
  CHECK(steering_derivative_theta(cfg, zero_centers(16), th, 0.0, 182.0).norm() == 0.0);
  CHECK(steering_derivative_theta(cfg, z, th, kPi / 2, 182.0).norm() < 1e-12);
}

TEST_CASE("velocity derivative") {
  SceneConfig cfg = default_scene();
  const auto z = phase_centers(cfg);
  const double th = deg_to_rad(25.0);
  const double h = 1e-6;
  const CVector d = steering_derivative_velocity(cfg, z, th, 0.0, 182.0);
  const CVector fd = (space_time_steering(cfg, z, th, 0.0, 182.0 + h).values -
                      space_time_steering(cfg, z, th, 0.0, 182.0 - h).values) /
                     (2 * h);
  CHECK((d - fd).norm() / d.norm() < 1e-6);
  // |∂a/∂v| at pulse p is (2 f_c / c) 2π p / f_PR.
  for (int p = 0; p < cfg.num_pulses; ++p) {
    const double expected = 2.0 * 1e10 / 3e8 * 2.0 * kPi * p / 1100.0;
    CHECK(std::abs(d(p * cfg.num_channels)) == doctest::Approx(expected).epsilon(1e-12));
  }
  cfg.num_pulses = 1;
  CHECK(steering_derivative_velocity(cfg, z, th, 0.0, 182.0).norm() == 0.0);
}
