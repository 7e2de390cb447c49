#ifndef STAPCRB_LEARNED_HPP
#define STAPCRB_LEARNED_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "stapcrb/estimators.hpp"
#include "stapcrb/heatmap.hpp"
#include "stapcrb/scene.hpp"

namespace stapcrb {

/// conv3x3(same) → ReLU → maxpool2 → conv3x3(same) → ReLU → maxpool2 →
/// dense → ReLU → dense(2). Range bins are the input channels.
struct CnnArchitecture {
  int in_channels = 5;
  int height = 26;  // azimuth cells
  int width = 21;   // velocity cells
  int conv1_channels = 16;
  int conv2_channels = 32;
  int dense_units = 64;

  int pool1_height() const { return height / 2; }
  int pool1_width() const { return width / 2; }
  int pool2_height() const { return pool1_height() / 2; }
  int pool2_width() const { return pool1_width() / 2; }
  int flat_size() const { return conv2_channels * pool2_height() * pool2_width(); }
  std::size_t parameter_count() const;
  void validate() const;
};

enum class InputNormalization { kMaxNormalized, kRaw };

std::string to_string(InputNormalization n);

/// Target box used for [0, 1] normalization and output clamping.
struct RegionBox {
  double azimuth_min_deg = 0.0;
  double azimuth_max_deg = 1.0;
  double velocity_min_mps = 0.0;
  double velocity_max_mps = 1.0;

  static RegionBox from_scene(const SceneConfig& cfg);
};

struct CnnModel {
  CnnArchitecture arch;
  InputNormalization input_norm = InputNormalization::kMaxNormalized;
  RegionBox box;
  std::vector<double> params;  // w1 b1 w2 b2 w3 b3 w4 b4, row-major weights

  /// Shapes of the parameter arrays in storage order.
  std::vector<std::vector<int>> layer_shapes() const;
};

/// He-normal weights, zero biases.
CnnModel init_model(const CnnArchitecture& arch, const RegionBox& box, InputNormalization norm,
                    std::uint64_t seed);

/// Flattened network input (channel-major) after the model's normalization.
std::vector<double> prepare_input(const CnnModel& model, const HeatmapTensor& t);

/// Normalized (θ, v) outputs.
std::array<double, 2> forward(const CnnModel& model, const HeatmapTensor& t);
std::array<double, 2> forward_prepared(const CnnModel& model, std::span<const double> input);

/// De-normalized estimate clamped to the region box.
Estimate predict(const CnnModel& model, const HeatmapTensor& t);

std::array<double, 2> normalize_target(const RegionBox& box, double azimuth_deg, double velocity_mps);

/// Loss ½[(o₀−t₀)² + (o₁−t₁)²] for one example; gradient accumulated into `grad`
/// (size parameter_count) when non-empty.
double example_loss_gradient(const CnnModel& model, std::span<const double> input,
                             const std::array<double, 2>& target, std::span<double> grad);

struct TrainConfig {
  int epochs = 100;
  int batch_size = 64;
  double step_size = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double validation_fraction = 0.1;
  int patience = 10;
  std::uint64_t seed = 1;
  InputNormalization input_norm = InputNormalization::kMaxNormalized;
  double weight_decay = 0.0;  // decoupled, weights only
  bool permute_bins = false;  // random range-bin order per example and step
  bool shift_azimuth = false;  // random cyclic azimuth roll, truth shifted to match
  int workers = 1;

  void validate() const;
};

struct TrainLogEntry {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  CnnModel model;  // parameters with the lowest validation loss
  std::vector<TrainLogEntry> log;
  int best_epoch = 0;
  int steps = 0;
};

/// Mini-batch Adam on normalized (θ, v). Every tensor must carry its truth.
TrainResult train(std::span<const HeatmapTensor> dataset, const TrainConfig& cfg,
                  const CnnArchitecture& arch, const RegionBox& box);

void save_checkpoint(const CnnModel& model, const std::string& path);
CnnModel load_checkpoint(const std::string& path);
void write_training_log(const std::vector<TrainLogEntry>& log, const std::string& path);

struct BiasVariance {
  int count = 0;
  double mse_theta = 0.0;
  double bias2_theta = 0.0;
  double var_theta = 0.0;
  double mse_velocity = 0.0;
  double bias2_velocity = 0.0;
  double var_velocity = 0.0;
};

/// bias² = (mean error)², var = population variance of the error.
BiasVariance bias_variance_decomposition(std::span<const Estimate> estimates,
                                         std::span<const TargetTruth> truths);

}  // namespace stapcrb

#endif  // STAPCRB_LEARNED_HPP
