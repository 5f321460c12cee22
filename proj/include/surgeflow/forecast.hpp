#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "surgeflow/rng.hpp"
#include "surgeflow/series.hpp"

namespace surgeflow::forecast {

// 24 hours in, next 24 hours out.
inline constexpr int kInputHours = 24;
inline constexpr int kOutputHours = 24;
inline constexpr int kWindowSpan = kInputHours + kOutputHours;

struct ScalerParams {
  double min = 0.0;
  double max = 0.0;
};

ScalerParams fit_scaler(const ArrivalSeries& series);
// (x - min) / (max - min); a degenerate scaler (max == min) maps to 0.
double transform(const ScalerParams& params, double x);
double inverse_transform(const ScalerParams& params, double y);

// One training sample: 24 normalized hours and the 24 that follow them.
struct WindowPair {
  std::array<double, kInputHours> input{};
  std::array<double, kOutputHours> target{};
};

// Stride-1 windows over the normalized series; needs at least 48 values.
std::vector<WindowPair> make_windows(const ArrivalSeries& series,
                                     const ScalerParams& params);

// Gate order used everywhere: input, forget, cell candidate, output.
inline constexpr int kGateCount = 4;

// Single-layer LSTM over a scalar input sequence plus a linear head read
// from the final hidden state. Sigmoid on the three gates; the cell
// candidate and the cell-state squashing both use ReLU. All parameters are
// column-major Eigen matrices (vectors stored as n x 1).
struct LstmModel {
  int hidden_size = 50;
  int output_size = kOutputHours;
  std::array<Eigen::MatrixXd, kGateCount> input_weights;      // hidden x 1
  std::array<Eigen::MatrixXd, kGateCount> recurrent_weights;  // hidden x hidden
  std::array<Eigen::MatrixXd, kGateCount> gate_biases;        // hidden x 1
  Eigen::MatrixXd dense_weights;                              // hidden x output
  Eigen::MatrixXd dense_bias;                                 // output x 1
  ScalerParams scaler;

  // Zero-valued parameters of consistent shape.
  static LstmModel zeros(int hidden_size, int output_size = kOutputHours);
  // Uniform [-k, k] weights with k = 1/sqrt(fan_in), zero biases.
  static LstmModel random_init(int hidden_size, int output_size, RngStream& rng);

  bool shapes_consistent() const;
  bool all_finite() const;
};

// Parameter tensors in a fixed order (per gate: input, recurrent, bias;
// then dense weights, dense bias). Gradients, optimizer state and the
// finite-difference harness all walk this same list.
std::vector<Eigen::MatrixXd*> parameter_list(LstmModel& model);
std::vector<const Eigen::MatrixXd*> parameter_list(const LstmModel& model);

// Gradients aligned with parameter_list order.
struct GradientSet {
  std::vector<Eigen::MatrixXd> tensors;
  double global_norm() const;
};

// Mean squared error averaged over every output of every column.
double mse_loss(const Eigen::MatrixXd& outputs, const Eigen::MatrixXd& targets);

// Runs the recurrence over a batch (inputs is time x batch) and returns the
// dense outputs (output x batch).
Eigen::MatrixXd lstm_batch_forward(const LstmModel& model,
                                   const Eigen::MatrixXd& inputs);

// MSE loss plus analytic gradients via backpropagation through time.
std::pair<double, GradientSet> loss_and_gradients(const LstmModel& model,
                                                  const Eigen::MatrixXd& inputs,
                                                  const Eigen::MatrixXd& targets);

// Deterministic 24-step forward pass in normalized units.
std::array<double, kOutputHours> lstm_forward(const LstmModel& model,
                                              std::span<const double> input);

struct TrainConfig {
  int epochs = 100;
  double learning_rate = 0.001;
  int batch_size = 16;
  double train_fraction = 0.8;
  std::uint64_t seed = 42;
  double grad_clip_norm = 1.0;
  int hidden_size = 50;
};

struct TrainReport {
  std::vector<double> train_loss;  // one entry per epoch, normalized units^2
  std::vector<double> val_loss;
};

struct TrainResult {
  LstmModel model;
  TrainReport report;
};

// Fits the scaler on the leading train_fraction of the raw series, windows
// and shuffles with the seeded stream, then runs mini-batch Adam on MSE
// with global-norm gradient clipping.
TrainResult train(const ArrivalSeries& series, const TrainConfig& config);

// transform -> lstm_forward -> inverse_transform, clamped at zero.
std::array<double, kOutputHours> predict_next_24(const LstmModel& model,
                                                 std::span<const double> recent_raw);

}  // namespace surgeflow::forecast
