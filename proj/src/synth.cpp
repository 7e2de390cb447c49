#include "stapcrb/synth.hpp"

#include <cmath>
#include <limits>

namespace stapcrb {

namespace {

Eigen::SelfAdjointEigenSolver<CMatrix> eigen_of(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
  if (es.info() != Eigen::Success) throw NumericalError("Hermitian eigendecomposition failed");
  return es;
}

}  // namespace

CovarianceModel build_covariance(const SceneConfig& cfg, const SubarrayPhaseCenters& z,
                                 const ClutterOptions& opts) {
  if (opts.patches < 1) throw ConfigError("clutter model needs at least one patch");
  const int n = cfg.space_time_dim();
  CovarianceModel model;
  model.cnr_db = cfg.cnr_db;
  model.noise_cov = CMatrix::Identity(n, n);

  CMatrix ridge = CMatrix::Zero(n, n);
  for (int q = 0; q < opts.patches; ++q) {
    const double az = opts.patches == 1 ? 0.0 : -90.0 + 180.0 * q / (opts.patches - 1);
    const CVector a = space_time_steering(cfg, z, deg_to_rad(az), 0.0, 0.0).values;
    ridge.noalias() += a * a.adjoint();
  }
  const double trace = ridge.trace().real();
  ridge += CMatrix::Identity(n, n) * (opts.loading * trace / n);

  const double target_trace = std::pow(10.0, cfg.cnr_db / 10.0) * model.noise_cov.trace().real();
  model.clutter_cov = ridge * (target_trace / ridge.trace().real());
  return model;
}

CovarianceModel noise_only_covariance(const SceneConfig& cfg) {
  const int n = cfg.space_time_dim();
  return {CMatrix::Zero(n, n), CMatrix::Identity(n, n), -std::numeric_limits<double>::infinity()};
}

CMatrix hermitian_sqrt(const CMatrix& m) {
  if (m.size() == 0 || m.isZero(0.0)) return CMatrix::Zero(m.rows(), m.cols());
  const auto es = eigen_of(m);
  const Eigen::VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().adjoint();
}

InterferenceSampler::InterferenceSampler(const CovarianceModel& model)
    : clutter_root_(hermitian_sqrt(model.clutter_cov)), noise_root_(hermitian_sqrt(model.noise_cov)) {}

SnapshotMatrix InterferenceSampler::draw(SnapshotRole role, int snapshots, RandomStream& rng) const {
  if (snapshots < 1) throw ConfigError("snapshot count must be >= 1");
  if (role != SnapshotRole::kClutter && role != SnapshotRole::kNoise) {
    throw ConfigError("sampler draws clutter or noise only");
  }
  const CMatrix& root = role == SnapshotRole::kClutter ? clutter_root_ : noise_root_;
  CMatrix w(root.cols(), snapshots);
  for (int j = 0; j < snapshots; ++j) {
    for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = rng.complex_normal();
  }
  return {root * w, role, 0};
}

SnapshotMatrix draw_clutter_noise(const CovarianceModel& model, SnapshotRole role, int snapshots,
                                  RandomStream& rng) {
  return InterferenceSampler(model).draw(role, snapshots, rng);
}

ScnrCalibrator::ScnrCalibrator(const CovarianceModel& model) : llt_(model.total()) {
  if (llt_.info() != Eigen::Success) throw NumericalError("interference covariance is singular");
}

double ScnrCalibrator::matched_gain(const CVector& a) const {
  return llt_.matrixL().solve(a).squaredNorm();
}

double ScnrCalibrator::amplitude(double scnr_db, const CVector& a) const {
  const double gain = matched_gain(a);
  if (!(gain > 0.0)) throw DegenerateInputError("zero matched-filter gain");
  return std::sqrt(std::pow(10.0, scnr_db / 10.0) / gain);
}

double calibrate_amplitude(const SceneConfig& cfg, const CovarianceModel& model,
                           const SpaceTimeVector& a) {
  return ScnrCalibrator(model).amplitude(cfg.target_scnr_db, a.values);
}

void mean_center(CMatrix& m) {
  if (m.cols() == 0) return;
  const CVector mean = m.rowwise().mean();
  m.colwise() -= mean;
}

TrialData synthesize_trial(const SceneConfig& cfg, const SubarrayPhaseCenters& z,
                           const InterferenceSampler& sampler, const TargetTruth& truth,
                           RandomStream& signal_rng, RandomStream& interference_rng,
                           const SynthOptions& opts) {
  const int k = cfg.snapshots;
  if (k < 2) throw ConfigError("K = 1 is rejected: mean-centering would zero the data");

  TrialData out;
  out.signal.values.resize(k);
  for (int j = 0; j < k; ++j) {
    out.signal.values(j) = std::polar(truth.rcs, 2.0 * kPi * signal_rng.uniform());
  }
  out.signal.mean = out.signal.values.mean();

  const CVector a = space_time_steering(cfg, z, deg_to_rad(truth.azimuth_deg), cfg.elevation_rad,
                                        truth.velocity_mps)
                        .values;
  for (int bin = 0; bin < cfg.num_range_bins; ++bin) {
    SnapshotMatrix y{sampler.draw(SnapshotRole::kClutter, k, interference_rng).values, SnapshotRole::kY, bin};
    y.values += sampler.draw(SnapshotRole::kNoise, k, interference_rng).values;
    if (opts.y_interference_scale != 1.0) y.values *= opts.y_interference_scale;
    if (bin == truth.range_bin_index) y.values.noalias() += a * out.signal.values.transpose();

    SnapshotMatrix zm{sampler.draw(SnapshotRole::kClutter, k, interference_rng).values, SnapshotRole::kZ, bin};
    zm.values += sampler.draw(SnapshotRole::kNoise, k, interference_rng).values;

    mean_center(y.values);
    mean_center(zm.values);
    out.y.push_back(std::move(y));
    out.z.push_back(std::move(zm));
  }
  return out;
}

CovarianceEstimate estimate_covariance(const CMatrix& z) {
  const Eigen::Index n = z.rows();
  const Eigen::Index k = z.cols();
  if (k < 1) throw ConfigError("covariance estimate needs at least one snapshot");
  CovarianceEstimate est;
  est.matrix = (z * z.adjoint()) / static_cast<double>(k);
  // Centered data loses one rank, so K <= n may still be singular.
  bool load = k < n;
  if (!load) {
    const auto es = eigen_of(est.matrix);
    const double lo = es.eigenvalues()(0);
    const double mean = est.matrix.trace().real() / n;
    load = !(lo > 1e-10 * mean);
  }
  if (load) {
    const double mean = est.matrix.trace().real() / n;
    est.loading = mean > 0.0 ? 1e-6 * mean : 1e-6;
    est.matrix += CMatrix::Identity(n, n) * est.loading;
  }
  return est;
}

Whitener::Whitener(const CMatrix& covariance) {
  const auto es = eigen_of(covariance);
  const Eigen::VectorXd& lambda = es.eigenvalues();
  const double top = lambda(lambda.size() - 1);
  if (!(lambda(0) > 0.0) || !(lambda(0) > 1e-15 * top)) {
    throw NumericalError("covariance is not positive definite");
  }
  inv_sqrt_ = es.eigenvectors() * lambda.cwiseSqrt().cwiseInverse().asDiagonal() *
              es.eigenvectors().adjoint();
}

CMatrix whiten(const CMatrix& covariance, const CMatrix& m) { return Whitener(covariance).apply(m); }

}  // namespace stapcrb
