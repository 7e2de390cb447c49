#include "stapcrb/learned.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "stapcrb/parallel.hpp"
#include "stapcrb/random.hpp"

namespace stapcrb {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace {

using Mat = Eigen::MatrixXd;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMap = Eigen::Map<const RowMat>;
using RowMap = Eigen::Map<RowMat>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;
using VecMap = Eigen::Map<Eigen::VectorXd>;

struct Offsets {
  std::size_t w1, b1, w2, b2, w3, b3, w4, b4, total;
};

Offsets offsets_of(const CnnArchitecture& a) {
  Offsets o{};
  std::size_t at = 0;
  auto take = [&at](std::size_t n) {
    const std::size_t start = at;
    at += n;
    return start;
  };
  o.w1 = take(static_cast<std::size_t>(a.conv1_channels) * a.in_channels * 9);
  o.b1 = take(a.conv1_channels);
  o.w2 = take(static_cast<std::size_t>(a.conv2_channels) * a.conv1_channels * 9);
  o.b2 = take(a.conv2_channels);
  o.w3 = take(static_cast<std::size_t>(a.dense_units) * a.flat_size());
  o.b3 = take(a.dense_units);
  o.w4 = take(static_cast<std::size_t>(2) * a.dense_units);
  o.b4 = take(2);
  o.total = at;
  return o;
}

// col(c·9 + ky·3 + kx, y·w + x) = in(c, (y+ky−1)·w + (x+kx−1)), zero outside.
Mat im2col(const Mat& in, int h, int w) {
  const int channels = static_cast<int>(in.rows());
  Mat col = Mat::Zero(static_cast<Eigen::Index>(channels) * 9, static_cast<Eigen::Index>(h) * w);
  for (int c = 0; c < channels; ++c) {
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const Eigen::Index row = c * 9 + ky * 3 + kx;
        for (int y = 0; y < h; ++y) {
          const int sy = y + ky - 1;
          if (sy < 0 || sy >= h) continue;
          for (int x = 0; x < w; ++x) {
            const int sx = x + kx - 1;
            if (sx < 0 || sx >= w) continue;
            col(row, y * w + x) = in(c, sy * w + sx);
          }
        }
      }
    }
  }
  return col;
}

Mat col2im(const Mat& col, int channels, int h, int w) {
  Mat out = Mat::Zero(channels, static_cast<Eigen::Index>(h) * w);
  for (int c = 0; c < channels; ++c) {
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const Eigen::Index row = c * 9 + ky * 3 + kx;
        for (int y = 0; y < h; ++y) {
          const int sy = y + ky - 1;
          if (sy < 0 || sy >= h) continue;
          for (int x = 0; x < w; ++x) {
            const int sx = x + kx - 1;
            if (sx < 0 || sx >= w) continue;
            out(c, sy * w + sx) += col(row, y * w + x);
          }
        }
      }
    }
  }
  return out;
}

struct Pooled {
  Mat values;
  Eigen::MatrixXi argmax;  // index into the unpooled h·w positions
};

Pooled maxpool2(const Mat& in, int h, int w) {
  const int ph = h / 2;
  const int pw = w / 2;
  Pooled p{Mat(in.rows(), static_cast<Eigen::Index>(ph) * pw),
           Eigen::MatrixXi(in.rows(), static_cast<Eigen::Index>(ph) * pw)};
  for (Eigen::Index c = 0; c < in.rows(); ++c) {
    for (int y = 0; y < ph; ++y) {
      for (int x = 0; x < pw; ++x) {
        int best = (2 * y) * w + 2 * x;
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            const int idx = (2 * y + dy) * w + 2 * x + dx;
            if (in(c, idx) > in(c, best)) best = idx;
          }
        }
        p.values(c, y * pw + x) = in(c, best);
        p.argmax(c, y * pw + x) = best;
      }
    }
  }
  return p;
}

struct Forward {
  Mat col1, a1, col2, a2;
  Pooled p1, p2;
  Eigen::VectorXd flat, hidden;
  std::array<double, 2> out{};
};

Forward run_forward(const CnnModel& m, std::span<const double> input) {
  const CnnArchitecture& a = m.arch;
  const Offsets o = offsets_of(a);
  const double* p = m.params.data();
  const int hw = a.height * a.width;
  if (input.size() != static_cast<std::size_t>(a.in_channels) * hw) {
    throw ConfigError("CNN input shape does not match the model");
  }
  Forward f;
  // Input is channel-major; as a (channels × hw) matrix that is row-major.
  const Mat x = ConstRowMap(input.data(), a.in_channels, hw);
  f.col1 = im2col(x, a.height, a.width);
  f.a1 = ConstRowMap(p + o.w1, a.conv1_channels, a.in_channels * 9) * f.col1;
  f.a1.colwise() += ConstVecMap(p + o.b1, a.conv1_channels);
  f.a1 = f.a1.cwiseMax(0.0);
  f.p1 = maxpool2(f.a1, a.height, a.width);

  f.col2 = im2col(f.p1.values, a.pool1_height(), a.pool1_width());
  f.a2 = ConstRowMap(p + o.w2, a.conv2_channels, a.conv1_channels * 9) * f.col2;
  f.a2.colwise() += ConstVecMap(p + o.b2, a.conv2_channels);
  f.a2 = f.a2.cwiseMax(0.0);
  f.p2 = maxpool2(f.a2, a.pool1_height(), a.pool1_width());

  const Eigen::Index positions = f.p2.values.cols();
  f.flat.resize(a.flat_size());
  for (Eigen::Index c = 0; c < f.p2.values.rows(); ++c) {
    for (Eigen::Index q = 0; q < positions; ++q) f.flat(c * positions + q) = f.p2.values(c, q);
  }
  f.hidden = (ConstRowMap(p + o.w3, a.dense_units, a.flat_size()) * f.flat +
              ConstVecMap(p + o.b3, a.dense_units))
                 .cwiseMax(0.0);
  const Eigen::Vector2d out = ConstRowMap(p + o.w4, 2, a.dense_units) * f.hidden + ConstVecMap(p + o.b4, 2);
  f.out = {out(0), out(1)};
  return f;
}

// Routes pooled gradients back to the argmax positions, masked by ReLU.
Mat unpool(const Mat& grad, const Pooled& pooled, const Mat& activation) {
  Mat out = Mat::Zero(activation.rows(), activation.cols());
  for (Eigen::Index c = 0; c < grad.rows(); ++c) {
    for (Eigen::Index q = 0; q < grad.cols(); ++q) {
      const int idx = pooled.argmax(c, q);
      if (activation(c, idx) > 0.0) out(c, idx) += grad(c, q);
    }
  }
  return out;
}

}  // namespace

std::size_t CnnArchitecture::parameter_count() const { return offsets_of(*this).total; }

void CnnArchitecture::validate() const {
  if (in_channels < 1 || conv1_channels < 1 || conv2_channels < 1 || dense_units < 1) {
    throw ConfigError("CNN channel and unit counts must be >= 1");
  }
  if (pool2_height() < 1 || pool2_width() < 1) throw ConfigError("CNN input too small for two pooling stages");
}

std::string to_string(InputNormalization n) { return n == InputNormalization::kMaxNormalized ? "max" : "raw"; }

RegionBox RegionBox::from_scene(const SceneConfig& cfg) {
  return {cfg.azimuth_min_deg, cfg.azimuth_max_deg, cfg.velocity_min_mps, cfg.velocity_max_mps};
}

std::vector<std::vector<int>> CnnModel::layer_shapes() const {
  const CnnArchitecture& a = arch;
  return {{a.conv1_channels, a.in_channels, 3, 3}, {a.conv1_channels},
          {a.conv2_channels, a.conv1_channels, 3, 3}, {a.conv2_channels},
          {a.dense_units, a.flat_size()}, {a.dense_units},
          {2, a.dense_units}, {2}};
}

CnnModel init_model(const CnnArchitecture& arch, const RegionBox& box, InputNormalization norm,
                    std::uint64_t seed) {
  arch.validate();
  const Offsets o = offsets_of(arch);
  CnnModel m{arch, norm, box, std::vector<double>(o.total, 0.0)};
  RandomStream rng(seed);
  auto he = [&](std::size_t start, std::size_t count, int fan_in) {
    const double s = std::sqrt(2.0 / fan_in);
    for (std::size_t i = 0; i < count; ++i) m.params[start + i] = s * rng.normal();
  };
  he(o.w1, o.b1 - o.w1, arch.in_channels * 9);
  he(o.w2, o.b2 - o.w2, arch.conv1_channels * 9);
  he(o.w3, o.b3 - o.w3, arch.flat_size());
  const double s4 = std::sqrt(1.0 / arch.dense_units);
  for (std::size_t i = o.w4; i < o.b4; ++i) m.params[i] = s4 * rng.normal();
  return m;
}

std::vector<double> prepare_input(const CnnModel& model, const HeatmapTensor& t) {
  const CnnArchitecture& a = model.arch;
  if (t.bins != a.in_channels || t.n_az != a.height || t.n_vel != a.width) {
    std::ostringstream msg;
    msg << "tensor shape " << t.bins << "x" << t.n_az << "x" << t.n_vel << " does not match model input "
        << a.in_channels << "x" << a.height << "x" << a.width;
    throw ConfigError(msg.str());
  }
  std::vector<double> x = t.values;
  if (model.input_norm == InputNormalization::kMaxNormalized) {
    const double peak = *std::max_element(x.begin(), x.end());
    if (peak > 0.0) {
      for (double& v : x) v /= peak;
    }
  }
  return x;
}

std::array<double, 2> forward_prepared(const CnnModel& model, std::span<const double> input) {
  return run_forward(model, input).out;
}

std::array<double, 2> forward(const CnnModel& model, const HeatmapTensor& t) {
  const std::vector<double> x = prepare_input(model, t);
  return forward_prepared(model, x);
}

std::array<double, 2> normalize_target(const RegionBox& box, double azimuth_deg, double velocity_mps) {
  return {(azimuth_deg - box.azimuth_min_deg) / (box.azimuth_max_deg - box.azimuth_min_deg),
          (velocity_mps - box.velocity_min_mps) / (box.velocity_max_mps - box.velocity_min_mps)};
}

Estimate predict(const CnnModel& model, const HeatmapTensor& t) {
  const auto out = forward(model, t);
  const RegionBox& b = model.box;
  Estimate e;
  e.method = Method::kCNN;
  e.azimuth_deg = std::clamp(b.azimuth_min_deg + out[0] * (b.azimuth_max_deg - b.azimuth_min_deg),
                             b.azimuth_min_deg, b.azimuth_max_deg);
  e.velocity_mps = std::clamp(b.velocity_min_mps + out[1] * (b.velocity_max_mps - b.velocity_min_mps),
                              b.velocity_min_mps, b.velocity_max_mps);
  return e;
}

double example_loss_gradient(const CnnModel& m, std::span<const double> input,
                             const std::array<double, 2>& target, std::span<double> grad) {
  const Forward f = run_forward(m, input);
  const Eigen::Vector2d d_out{f.out[0] - target[0], f.out[1] - target[1]};
  const double loss = 0.5 * d_out.squaredNorm();
  if (grad.empty()) return loss;

  const CnnArchitecture& a = m.arch;
  const Offsets o = offsets_of(a);
  if (grad.size() != o.total) throw ConfigError("gradient buffer has the wrong size");
  const double* p = m.params.data();
  double* g = grad.data();

  RowMap(g + o.w4, 2, a.dense_units) += d_out * f.hidden.transpose();
  VecMap(g + o.b4, 2) += d_out;
  Eigen::VectorXd d_hidden = ConstRowMap(p + o.w4, 2, a.dense_units).transpose() * d_out;
  for (Eigen::Index i = 0; i < d_hidden.size(); ++i) {
    if (!(f.hidden(i) > 0.0)) d_hidden(i) = 0.0;
  }

  RowMap(g + o.w3, a.dense_units, a.flat_size()) += d_hidden * f.flat.transpose();
  VecMap(g + o.b3, a.dense_units) += d_hidden;
  const Eigen::VectorXd d_flat = ConstRowMap(p + o.w3, a.dense_units, a.flat_size()).transpose() * d_hidden;

  const Eigen::Index positions = f.p2.values.cols();
  Mat d_p2(f.p2.values.rows(), positions);
  for (Eigen::Index c = 0; c < d_p2.rows(); ++c) {
    for (Eigen::Index q = 0; q < positions; ++q) d_p2(c, q) = d_flat(c * positions + q);
  }
  const Mat d_a2 = unpool(d_p2, f.p2, f.a2);
  RowMap(g + o.w2, a.conv2_channels, a.conv1_channels * 9) += d_a2 * f.col2.transpose();
  VecMap(g + o.b2, a.conv2_channels) += d_a2.rowwise().sum();
  const Mat d_col2 = ConstRowMap(p + o.w2, a.conv2_channels, a.conv1_channels * 9).transpose() * d_a2;
  const Mat d_p1 = col2im(d_col2, a.conv1_channels, a.pool1_height(), a.pool1_width());

  const Mat d_a1 = unpool(d_p1, f.p1, f.a1);
  RowMap(g + o.w1, a.conv1_channels, a.in_channels * 9) += d_a1 * f.col1.transpose();
  VecMap(g + o.b1, a.conv1_channels) += d_a1.rowwise().sum();
  return loss;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(step_size > 0.0)) throw ConfigError("step_size must be positive");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("validation_fraction must lie in (0, 1)");
  }
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be non-negative");
}

TrainResult train(std::span<const HeatmapTensor> dataset, const TrainConfig& cfg,
                  const CnnArchitecture& arch, const RegionBox& box) {
  cfg.validate();
  if (dataset.empty()) throw DegenerateInputError("training on an empty dataset");

  TrainResult result;
  result.model = init_model(arch, box, cfg.input_norm, derive_seed(cfg.seed, StreamTag::kTraining, {0}));
  CnnModel& model = result.model;

  const std::size_t n = dataset.size();
  std::vector<std::vector<double>> inputs(n);
  std::vector<std::array<double, 2>> targets(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!dataset[i].truth) throw ConfigError("training tensor without ground truth");
    inputs[i] = prepare_input(model, dataset[i]);
    targets[i] = normalize_target(box, dataset[i].truth->azimuth_deg, dataset[i].truth->velocity_mps);
  }

  RandomStream rng(derive_seed(cfg.seed, StreamTag::kTraining, {1}));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng.engine());
  std::size_t n_val = n >= 2 ? std::max<std::size_t>(1, static_cast<std::size_t>(
                                                            std::lround(cfg.validation_fraction * n)))
                             : 0;
  n_val = std::min(n_val, n - 1);
  std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<long>(n_val));
  std::vector<std::size_t> tr(order.begin() + static_cast<long>(n_val), order.end());
  if (val.empty()) val = tr;

  const std::size_t np = model.params.size();
  std::vector<double> m1(np, 0.0), m2(np, 0.0), grad(np);
  const std::size_t max_batch = std::min<std::size_t>(cfg.batch_size, tr.size());
  std::vector<std::vector<double>> per_example(max_batch, std::vector<double>(np));
  std::vector<double> losses(std::max(max_batch, val.size()));
  const std::size_t plane = static_cast<std::size_t>(arch.height) * arch.width;
  std::vector<std::vector<int>> bin_order;
  std::vector<std::vector<double>> permuted;
  std::vector<int> shift(max_batch, 0);
  const bool augment = cfg.permute_bins || cfg.shift_azimuth;
  {
    std::vector<int> identity(static_cast<std::size_t>(arch.in_channels));
    std::iota(identity.begin(), identity.end(), 0);
    bin_order.assign(max_batch, identity);
    if (augment) permuted.assign(max_batch, std::vector<double>(plane * identity.size()));
  }
  // Azimuth cell width in normalized target units.
  double az_cell = 0.0;
  if (cfg.shift_azimuth) {
    if (dataset[0].azimuth_deg.size() < 2) throw ConfigError("azimuth shift needs at least two azimuth cells");
    az_cell = (dataset[0].azimuth_deg[1] - dataset[0].azimuth_deg[0]) /
              (box.azimuth_max_deg - box.azimuth_min_deg);
  }

  auto validation_loss = [&]() {
    parallel_for(val.size(), cfg.workers, [&](std::size_t i) {
      losses[i] = example_loss_gradient(model, inputs[val[i]], targets[val[i]], {});
    });
    return pairwise_sum(std::span<const double>(losses.data(), val.size())) /
           static_cast<double>(val.size());
  };

  double best = validation_loss();
  std::vector<double> best_params = model.params;
  int since_best = 0;
  int step = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(tr.begin(), tr.end(), rng.engine());
    double epoch_loss = 0.0;
    int batch_index = 0;
    for (std::size_t start = 0; start < tr.size(); start += max_batch, ++batch_index) {
      const std::size_t count = std::min(max_batch, tr.size() - start);
      for (std::size_t i = 0; i < count; ++i) {
        if (cfg.permute_bins) std::shuffle(bin_order[i].begin(), bin_order[i].end(), rng.engine());
        if (cfg.shift_azimuth) {
          const double t0 = targets[tr[start + i]][0];
          const int lo = static_cast<int>(std::ceil(-t0 / az_cell - 1e-9));
          const int hi = static_cast<int>(std::floor((1.0 - t0) / az_cell + 1e-9));
          shift[i] = std::uniform_int_distribution<int>(lo, hi)(rng.engine());
        }
      }
      parallel_for(count, cfg.workers, [&](std::size_t i) {
        std::fill(per_example[i].begin(), per_example[i].end(), 0.0);
        const std::size_t idx = tr[start + i];
        std::span<const double> x = inputs[idx];
        std::array<double, 2> target = targets[idx];
        if (augment) {
          // Cyclic roll by shift[i] rows along azimuth.
          const long h = arch.height;
          const long w = arch.width;
          const long r = ((shift[i] % h) + h) % h;
          for (std::size_t c = 0; c < bin_order[i].size(); ++c) {
            const auto src = inputs[idx].begin() + static_cast<long>(bin_order[i][c] * plane);
            const auto dst = permuted[i].begin() + static_cast<long>(c * plane);
            std::copy(src, src + (h - r) * w, dst + r * w);
            std::copy(src + (h - r) * w, src + h * w, dst);
          }
          x = permuted[i];
          target[0] += shift[i] * az_cell;
        }
        losses[i] = example_loss_gradient(model, x, target, per_example[i]);
      });
      // Sequential reduction in example order.
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t i = 0; i < count; ++i) {
        batch_loss += losses[i];
        for (std::size_t k = 0; k < np; ++k) grad[k] += per_example[i][k];
      }
      batch_loss /= static_cast<double>(count);
      if (!std::isfinite(batch_loss)) {
        std::ostringstream msg;
        msg << "non-finite training loss at epoch " << epoch << ", batch " << batch_index;
        throw NumericalError(msg.str());
      }
      epoch_loss += batch_loss * static_cast<double>(count);

      ++step;
      const double c1 = 1.0 - std::pow(cfg.beta1, step);
      const double c2 = 1.0 - std::pow(cfg.beta2, step);
      const double inv = 1.0 / static_cast<double>(count);
      for (std::size_t k = 0; k < np; ++k) {
        const double gk = grad[k] * inv;
        m1[k] = cfg.beta1 * m1[k] + (1.0 - cfg.beta1) * gk;
        m2[k] = cfg.beta2 * m2[k] + (1.0 - cfg.beta2) * gk * gk;
        model.params[k] -= cfg.step_size * (m1[k] / c1) / (std::sqrt(m2[k] / c2) + cfg.epsilon);
      }
      if (cfg.weight_decay > 0.0) {
        const Offsets o = offsets_of(arch);
        const double shrink = 1.0 - cfg.step_size * cfg.weight_decay;
        for (auto [from, to] : {std::pair{o.w1, o.b1}, std::pair{o.w2, o.b2}, std::pair{o.w3, o.b3},
                                std::pair{o.w4, o.b4}}) {
          for (std::size_t k = from; k < to; ++k) model.params[k] *= shrink;
        }
      }
    }
    const double vl = validation_loss();
    if (!std::isfinite(vl)) {
      std::ostringstream msg;
      msg << "non-finite validation loss at epoch " << epoch;
      throw NumericalError(msg.str());
    }
    result.log.push_back({epoch, epoch_loss / static_cast<double>(tr.size()), vl});
    if (vl < best) {
      best = vl;
      best_params = model.params;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  result.steps = step;
  model.params = std::move(best_params);
  return result;
}

namespace {

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw ConfigError("truncated checkpoint");
  return v;
}

constexpr char kCheckpointMagic[4] = {'S', 'T', 'C', 'N'};

}  // namespace

void save_checkpoint(const CnnModel& model, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write checkpoint " + path);
  os.write(kCheckpointMagic, 4);
  put<std::uint32_t>(os, 1);
  const CnnArchitecture& a = model.arch;
  for (int v : {a.in_channels, a.height, a.width, a.conv1_channels, a.conv2_channels, a.dense_units}) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(v));
  }
  put<std::uint32_t>(os, model.input_norm == InputNormalization::kMaxNormalized ? 0 : 1);
  for (double v : {model.box.azimuth_min_deg, model.box.azimuth_max_deg, model.box.velocity_min_mps,
                   model.box.velocity_max_mps}) {
    put<double>(os, v);
  }
  const auto shapes = model.layer_shapes();
  put<std::uint32_t>(os, static_cast<std::uint32_t>(shapes.size()));
  for (const auto& s : shapes) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
    for (int d : s) put<std::uint32_t>(os, static_cast<std::uint32_t>(d));
  }
  os.write(reinterpret_cast<const char*>(model.params.data()),
           static_cast<std::streamsize>(model.params.size() * sizeof(double)));
  if (!os) throw ConfigError("failed writing checkpoint " + path);
}

CnnModel load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open checkpoint " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kCheckpointMagic, 4) != 0) throw ConfigError("not a CNN checkpoint: " + path);
  if (get<std::uint32_t>(is) != 1) throw ConfigError("unsupported checkpoint version");
  CnnModel m;
  m.arch.in_channels = static_cast<int>(get<std::uint32_t>(is));
  m.arch.height = static_cast<int>(get<std::uint32_t>(is));
  m.arch.width = static_cast<int>(get<std::uint32_t>(is));
  m.arch.conv1_channels = static_cast<int>(get<std::uint32_t>(is));
  m.arch.conv2_channels = static_cast<int>(get<std::uint32_t>(is));
  m.arch.dense_units = static_cast<int>(get<std::uint32_t>(is));
  m.arch.validate();
  m.input_norm = get<std::uint32_t>(is) == 0 ? InputNormalization::kMaxNormalized : InputNormalization::kRaw;
  m.box.azimuth_min_deg = get<double>(is);
  m.box.azimuth_max_deg = get<double>(is);
  m.box.velocity_min_mps = get<double>(is);
  m.box.velocity_max_mps = get<double>(is);
  const auto expected = m.layer_shapes();
  if (get<std::uint32_t>(is) != expected.size()) throw ConfigError("checkpoint layer count mismatch");
  for (const auto& s : expected) {
    if (get<std::uint32_t>(is) != s.size()) throw ConfigError("checkpoint layer rank mismatch");
    for (int d : s) {
      if (get<std::uint32_t>(is) != static_cast<std::uint32_t>(d)) throw ConfigError("checkpoint shape mismatch");
    }
  }
  m.params.resize(m.arch.parameter_count());
  is.read(reinterpret_cast<char*>(m.params.data()), static_cast<std::streamsize>(m.params.size() * sizeof(double)));
  if (!is) throw ConfigError("truncated checkpoint parameters");
  return m;
}

void write_training_log(const std::vector<TrainLogEntry>& log, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write training log " + path);
  os << "epoch,train_loss,val_loss\n";
  os.precision(17);
  for (const auto& e : log) os << e.epoch << ',' << e.train_loss << ',' << e.val_loss << '\n';
}

BiasVariance bias_variance_decomposition(std::span<const Estimate> estimates,
                                         std::span<const TargetTruth> truths) {
  if (estimates.size() != truths.size()) throw ConfigError("estimate and truth counts differ");
  if (estimates.empty()) throw DegenerateInputError("bias/variance of an empty set");
  const double n = static_cast<double>(estimates.size());
  double sum_t = 0.0, sum_v = 0.0, sq_t = 0.0, sq_v = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const double et = estimates[i].azimuth_deg - truths[i].azimuth_deg;
    const double ev = estimates[i].velocity_mps - truths[i].velocity_mps;
    sum_t += et;
    sum_v += ev;
    sq_t += et * et;
    sq_v += ev * ev;
  }
  BiasVariance bv;
  bv.count = static_cast<int>(estimates.size());
  bv.mse_theta = sq_t / n;
  bv.mse_velocity = sq_v / n;
  const double mean_t = sum_t / n;
  const double mean_v = sum_v / n;
  bv.bias2_theta = mean_t * mean_t;
  bv.bias2_velocity = mean_v * mean_v;
  double var_t = 0.0, var_v = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const double dt = estimates[i].azimuth_deg - truths[i].azimuth_deg - mean_t;
    const double dv = estimates[i].velocity_mps - truths[i].velocity_mps - mean_v;
    var_t += dt * dt;
    var_v += dv * dv;
  }
  bv.var_theta = var_t / n;
  bv.var_velocity = var_v / n;
  return bv;
}

}  // namespace stapcrb
