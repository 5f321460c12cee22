#include "surgeflow/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "surgeflow/errors.hpp"

namespace surgeflow::forecast {

namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& m) {
  return m.unaryExpr([](double x) { return stable_sigmoid(x); });
}

Eigen::MatrixXd relu(const Eigen::MatrixXd& m) { return m.cwiseMax(0.0); }

// Subgradient 0 at the kink.
Eigen::MatrixXd relu_mask(const Eigen::MatrixXd& m) {
  return m.unaryExpr([](double x) { return x > 0.0 ? 1.0 : 0.0; });
}

struct ForwardTrace {
  // One H x B matrix per time step.
  std::vector<Eigen::MatrixXd> i, f, g, o, c, h;
  Eigen::MatrixXd outputs;  // output x B
};

ForwardTrace run_forward(const LstmModel& model, const Eigen::MatrixXd& inputs,
                         bool keep_trace) {
  const int steps = static_cast<int>(inputs.rows());
  const int batch = static_cast<int>(inputs.cols());
  const int hidden = model.hidden_size;

  ForwardTrace trace;
  if (keep_trace) {
    trace.i.reserve(steps);
    trace.f.reserve(steps);
    trace.g.reserve(steps);
    trace.o.reserve(steps);
    trace.c.reserve(steps);
    trace.h.reserve(steps);
  }

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(hidden, batch);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(hidden, batch);

  for (int t = 0; t < steps; ++t) {
    const Eigen::RowVectorXd x_t = inputs.row(t);
    auto preact = [&](int gate) -> Eigen::MatrixXd {
      return model.input_weights[gate] * x_t + model.recurrent_weights[gate] * h +
             model.gate_biases[gate].replicate(1, batch);
    };
    Eigen::MatrixXd i_t = sigmoid(preact(0));
    Eigen::MatrixXd f_t = sigmoid(preact(1));
    Eigen::MatrixXd g_t = relu(preact(2));
    Eigen::MatrixXd o_t = sigmoid(preact(3));

    c = f_t.cwiseProduct(c) + i_t.cwiseProduct(g_t);
    h = o_t.cwiseProduct(relu(c));

    if (keep_trace) {
      trace.i.push_back(std::move(i_t));
      trace.f.push_back(std::move(f_t));
      trace.g.push_back(std::move(g_t));
      trace.o.push_back(std::move(o_t));
      trace.c.push_back(c);
      trace.h.push_back(h);
    }
  }

  trace.outputs = model.dense_weights.transpose() * h +
                  model.dense_bias.replicate(1, batch);
  return trace;
}

GradientSet zero_gradients(const LstmModel& model) {
  GradientSet grads;
  for (const Eigen::MatrixXd* p : parameter_list(model))
    grads.tensors.emplace_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
  return grads;
}

struct AdamState {
  std::vector<Eigen::MatrixXd> m, v;
  long step = 0;
  double beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8;

  explicit AdamState(const LstmModel& model) {
    for (const Eigen::MatrixXd* p : parameter_list(model)) {
      m.emplace_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
      v.emplace_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
    }
  }

  void apply(LstmModel& model, const GradientSet& grads, double lr) {
    ++step;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    auto params = parameter_list(model);
    for (std::size_t k = 0; k < params.size(); ++k) {
      const Eigen::MatrixXd& g = grads.tensors[k];
      m[k] = beta1 * m[k] + (1.0 - beta1) * g;
      v[k] = beta2 * v[k] + (1.0 - beta2) * g.cwiseProduct(g);
      *params[k] -= lr * (m[k] / bc1).cwiseQuotient(
                             ((v[k] / bc2).cwiseSqrt().array() + epsilon).matrix());
    }
  }
};

void clip_gradients(GradientSet& grads, double max_norm) {
  if (max_norm <= 0.0) return;
  double norm = grads.global_norm();
  if (norm > max_norm) {
    double scale = max_norm / norm;
    for (Eigen::MatrixXd& g : grads.tensors) g *= scale;
  }
}

}  // namespace

ScalerParams fit_scaler(const ArrivalSeries& series) {
  if (series.values.empty()) throw ValidationError("empty input");
  double lo = series.values.front();
  double hi = series.values.front();
  for (double v : series.values) {
    if (!std::isfinite(v)) throw ValidationError("non-finite input");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

double transform(const ScalerParams& params, double x) {
  if (params.max == params.min) return 0.0;
  return (x - params.min) / (params.max - params.min);
}

double inverse_transform(const ScalerParams& params, double y) {
  return y * (params.max - params.min) + params.min;
}

std::vector<WindowPair> make_windows(const ArrivalSeries& series,
                                     const ScalerParams& params) {
  const std::size_t n = series.values.size();
  if (n < static_cast<std::size_t>(kWindowSpan))
    throw ValidationError("insufficient history");
  std::vector<WindowPair> pairs(n - kWindowSpan + 1);
  for (std::size_t w = 0; w < pairs.size(); ++w) {
    for (int k = 0; k < kInputHours; ++k)
      pairs[w].input[k] = transform(params, series.values[w + k]);
    for (int k = 0; k < kOutputHours; ++k)
      pairs[w].target[k] = transform(params, series.values[w + kInputHours + k]);
  }
  return pairs;
}

LstmModel LstmModel::zeros(int hidden_size, int output_size) {
  LstmModel m;
  m.hidden_size = hidden_size;
  m.output_size = output_size;
  for (int g = 0; g < kGateCount; ++g) {
    m.input_weights[g] = Eigen::MatrixXd::Zero(hidden_size, 1);
    m.recurrent_weights[g] = Eigen::MatrixXd::Zero(hidden_size, hidden_size);
    m.gate_biases[g] = Eigen::MatrixXd::Zero(hidden_size, 1);
  }
  m.dense_weights = Eigen::MatrixXd::Zero(hidden_size, output_size);
  m.dense_bias = Eigen::MatrixXd::Zero(output_size, 1);
  return m;
}

LstmModel LstmModel::random_init(int hidden_size, int output_size, RngStream& rng) {
  LstmModel m = zeros(hidden_size, output_size);
  auto uniform = [&rng](double k) { return (rng.next_double() * 2.0 - 1.0) * k; };
  const double k_input = 1.0;  // scalar input, fan_in = 1
  const double k_hidden = 1.0 / std::sqrt(static_cast<double>(hidden_size));
  for (int g = 0; g < kGateCount; ++g) {
    for (int r = 0; r < hidden_size; ++r) m.input_weights[g](r, 0) = uniform(k_input);
    for (int r = 0; r < hidden_size; ++r)
      for (int c = 0; c < hidden_size; ++c)
        m.recurrent_weights[g](r, c) = uniform(k_hidden);
  }
  for (int r = 0; r < hidden_size; ++r)
    for (int c = 0; c < output_size; ++c) m.dense_weights(r, c) = uniform(k_hidden);
  return m;
}

bool LstmModel::shapes_consistent() const {
  if (hidden_size < 1 || output_size < 1) return false;
  for (int g = 0; g < kGateCount; ++g) {
    if (input_weights[g].rows() != hidden_size || input_weights[g].cols() != 1)
      return false;
    if (recurrent_weights[g].rows() != hidden_size ||
        recurrent_weights[g].cols() != hidden_size)
      return false;
    if (gate_biases[g].rows() != hidden_size || gate_biases[g].cols() != 1)
      return false;
  }
  return dense_weights.rows() == hidden_size && dense_weights.cols() == output_size &&
         dense_bias.rows() == output_size && dense_bias.cols() == 1;
}

bool LstmModel::all_finite() const {
  for (const Eigen::MatrixXd* p : parameter_list(*this))
    if (!p->allFinite()) return false;
  return true;
}

std::vector<Eigen::MatrixXd*> parameter_list(LstmModel& model) {
  std::vector<Eigen::MatrixXd*> out;
  for (int g = 0; g < kGateCount; ++g) {
    out.push_back(&model.input_weights[g]);
    out.push_back(&model.recurrent_weights[g]);
    out.push_back(&model.gate_biases[g]);
  }
  out.push_back(&model.dense_weights);
  out.push_back(&model.dense_bias);
  return out;
}

std::vector<const Eigen::MatrixXd*> parameter_list(const LstmModel& model) {
  std::vector<const Eigen::MatrixXd*> out;
  for (const Eigen::MatrixXd* p : parameter_list(const_cast<LstmModel&>(model)))
    out.push_back(p);
  return out;
}

double GradientSet::global_norm() const {
  double sum = 0.0;
  for (const Eigen::MatrixXd& g : tensors) sum += g.squaredNorm();
  return std::sqrt(sum);
}

double mse_loss(const Eigen::MatrixXd& outputs, const Eigen::MatrixXd& targets) {
  return (outputs - targets).squaredNorm() /
         static_cast<double>(outputs.rows() * outputs.cols());
}

Eigen::MatrixXd lstm_batch_forward(const LstmModel& model,
                                   const Eigen::MatrixXd& inputs) {
  return run_forward(model, inputs, /*keep_trace=*/false).outputs;
}

std::pair<double, GradientSet> loss_and_gradients(const LstmModel& model,
                                                  const Eigen::MatrixXd& inputs,
                                                  const Eigen::MatrixXd& targets) {
  const int steps = static_cast<int>(inputs.rows());
  const int batch = static_cast<int>(inputs.cols());
  const int hidden = model.hidden_size;

  ForwardTrace trace = run_forward(model, inputs, /*keep_trace=*/true);
  const double loss = mse_loss(trace.outputs, targets);

  GradientSet grads = zero_gradients(model);
  // parameter_list order: per gate {input, recurrent, bias}, then dense.
  auto g_input = [&grads](int gate) -> Eigen::MatrixXd& { return grads.tensors[gate * 3]; };
  auto g_recur = [&grads](int gate) -> Eigen::MatrixXd& { return grads.tensors[gate * 3 + 1]; };
  auto g_bias = [&grads](int gate) -> Eigen::MatrixXd& { return grads.tensors[gate * 3 + 2]; };
  Eigen::MatrixXd& g_dense_w = grads.tensors[kGateCount * 3];
  Eigen::MatrixXd& g_dense_b = grads.tensors[kGateCount * 3 + 1];

  const double denom = static_cast<double>(targets.rows() * targets.cols());
  Eigen::MatrixXd d_out = 2.0 * (trace.outputs - targets) / denom;

  const Eigen::MatrixXd& h_last = trace.h[steps - 1];
  g_dense_w = h_last * d_out.transpose();
  g_dense_b = d_out.rowwise().sum();

  Eigen::MatrixXd dh = model.dense_weights * d_out;
  Eigen::MatrixXd dc = Eigen::MatrixXd::Zero(hidden, batch);
  const Eigen::MatrixXd zero_state = Eigen::MatrixXd::Zero(hidden, batch);

  for (int t = steps - 1; t >= 0; --t) {
    const Eigen::MatrixXd& i_t = trace.i[t];
    const Eigen::MatrixXd& f_t = trace.f[t];
    const Eigen::MatrixXd& g_t = trace.g[t];
    const Eigen::MatrixXd& o_t = trace.o[t];
    const Eigen::MatrixXd& c_t = trace.c[t];
    const Eigen::MatrixXd& c_prev = t > 0 ? trace.c[t - 1] : zero_state;
    const Eigen::MatrixXd& h_prev = t > 0 ? trace.h[t - 1] : zero_state;

    Eigen::MatrixXd d_o =
        dh.cwiseProduct(relu(c_t)).cwiseProduct(o_t).cwiseProduct(
            (1.0 - o_t.array()).matrix());
    dc += dh.cwiseProduct(o_t).cwiseProduct(relu_mask(c_t));

    Eigen::MatrixXd d_i = dc.cwiseProduct(g_t).cwiseProduct(i_t).cwiseProduct(
        (1.0 - i_t.array()).matrix());
    Eigen::MatrixXd d_f = dc.cwiseProduct(c_prev).cwiseProduct(f_t).cwiseProduct(
        (1.0 - f_t.array()).matrix());
    Eigen::MatrixXd d_g = dc.cwiseProduct(i_t).cwiseProduct(relu_mask(g_t));

    const Eigen::RowVectorXd x_t = inputs.row(t);
    const std::array<const Eigen::MatrixXd*, kGateCount> dz{&d_i, &d_f, &d_g, &d_o};
    Eigen::MatrixXd dh_prev = Eigen::MatrixXd::Zero(hidden, batch);
    for (int gate = 0; gate < kGateCount; ++gate) {
      g_input(gate) += *dz[gate] * x_t.transpose();
      g_recur(gate) += *dz[gate] * h_prev.transpose();
      g_bias(gate) += dz[gate]->rowwise().sum();
      dh_prev += model.recurrent_weights[gate].transpose() * *dz[gate];
    }

    dh = std::move(dh_prev);
    dc = dc.cwiseProduct(f_t);
  }

  return {loss, std::move(grads)};
}

std::array<double, kOutputHours> lstm_forward(const LstmModel& model,
                                              std::span<const double> input) {
  if (!model.shapes_consistent()) throw ValidationError("inconsistent model shapes");
  if (input.size() != static_cast<std::size_t>(kInputHours))
    throw ValidationError("expected 24 input values");
  Eigen::MatrixXd in(kInputHours, 1);
  for (int t = 0; t < kInputHours; ++t) {
    if (!std::isfinite(input[t])) throw ValidationError("non-finite input");
    in(t, 0) = input[t];
  }
  Eigen::MatrixXd out = lstm_batch_forward(model, in);
  std::array<double, kOutputHours> result{};
  for (int k = 0; k < model.output_size && k < kOutputHours; ++k) result[k] = out(k, 0);
  return result;
}

TrainResult train(const ArrivalSeries& series, const TrainConfig& config) {
  if (config.epochs < 1) throw ValidationError("epochs must be at least 1");
  if (config.batch_size < 1) throw ValidationError("batch_size must be at least 1");
  if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0))
    throw ValidationError("train_fraction must be in (0, 1)");
  if (!(config.learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (config.hidden_size < 1) throw ValidationError("hidden_size must be at least 1");

  const std::size_t n = series.values.size();
  if (n < static_cast<std::size_t>(kWindowSpan))
    throw ValidationError("insufficient history");

  // Scaler comes from the leading training share of the raw series so the
  // validation windows never leak into normalization.
  std::size_t fit_count = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * config.train_fraction));
  fit_count = std::clamp<std::size_t>(fit_count, 1, n);
  ArrivalSeries prefix{{series.values.begin(),
                        series.values.begin() + static_cast<long>(fit_count)},
                       series.start_hour};
  const ScalerParams scaler = fit_scaler(prefix);

  const std::vector<WindowPair> windows = make_windows(series, scaler);
  const std::size_t pair_count = windows.size();

  std::vector<std::size_t> perm(pair_count);
  std::iota(perm.begin(), perm.end(), 0);
  RngStream shuffle_rng(config.seed, Stream::TrainShuffle);
  shuffle_rng.shuffle(perm);

  std::size_t n_train = pair_count;
  if (pair_count >= 2) {
    n_train = static_cast<std::size_t>(std::llround(
        static_cast<double>(pair_count) * config.train_fraction));
    n_train = std::clamp<std::size_t>(n_train, 1, pair_count - 1);
  }
  std::vector<std::size_t> train_idx(perm.begin(), perm.begin() + static_cast<long>(n_train));
  // A single window pair cannot be split; it then doubles as validation.
  std::vector<std::size_t> val_idx(perm.begin() + static_cast<long>(n_train), perm.end());
  if (val_idx.empty()) val_idx = train_idx;

  // All samples as columns, sliced per batch by shuffled index.
  Eigen::MatrixXd all_inputs(kInputHours, pair_count);
  Eigen::MatrixXd all_targets(kOutputHours, pair_count);
  for (std::size_t w = 0; w < pair_count; ++w) {
    for (int t = 0; t < kInputHours; ++t) all_inputs(t, w) = windows[w].input[t];
    for (int k = 0; k < kOutputHours; ++k) all_targets(k, w) = windows[w].target[k];
  }
  auto gather = [](const Eigen::MatrixXd& src, std::span<const std::size_t> cols) {
    Eigen::MatrixXd out(src.rows(), cols.size());
    for (std::size_t k = 0; k < cols.size(); ++k) out.col(k) = src.col(cols[k]);
    return out;
  };
  const Eigen::MatrixXd val_inputs = gather(all_inputs, val_idx);
  const Eigen::MatrixXd val_targets = gather(all_targets, val_idx);

  RngStream init_rng(config.seed, Stream::WeightInit);
  LstmModel model = LstmModel::random_init(config.hidden_size, kOutputHours, init_rng);
  model.scaler = scaler;

  AdamState adam(model);
  TrainReport report;
  report.train_loss.reserve(config.epochs);
  report.val_loss.reserve(config.epochs);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_rng.shuffle(train_idx);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < train_idx.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(train_idx.size(), start + static_cast<std::size_t>(config.batch_size));
      std::span<const std::size_t> batch_cols(train_idx.data() + start, stop - start);
      Eigen::MatrixXd inputs = gather(all_inputs, batch_cols);
      Eigen::MatrixXd targets = gather(all_targets, batch_cols);

      auto [loss, grads] = loss_and_gradients(model, inputs, targets);
      if (!std::isfinite(loss))
        throw std::runtime_error("non-finite loss at epoch " + std::to_string(epoch));
      clip_gradients(grads, config.grad_clip_norm);
      adam.apply(model, grads, config.learning_rate);
      loss_sum += loss * static_cast<double>(batch_cols.size());
    }
    if (!model.all_finite())
      throw std::runtime_error("non-finite weights at epoch " + std::to_string(epoch));

    report.train_loss.push_back(loss_sum / static_cast<double>(train_idx.size()));
    report.val_loss.push_back(
        mse_loss(lstm_batch_forward(model, val_inputs), val_targets));
  }

  return {std::move(model), std::move(report)};
}

std::array<double, kOutputHours> predict_next_24(const LstmModel& model,
                                                 std::span<const double> recent_raw) {
  if (recent_raw.size() != static_cast<std::size_t>(kInputHours))
    throw ValidationError("expected 24 input values");
  std::array<double, kInputHours> normalized{};
  for (int t = 0; t < kInputHours; ++t) {
    if (!std::isfinite(recent_raw[t])) throw ValidationError("non-finite input");
    normalized[t] = transform(model.scaler, recent_raw[t]);
  }
  std::array<double, kOutputHours> out = lstm_forward(model, normalized);
  for (double& v : out) v = std::max(0.0, inverse_transform(model.scaler, v));
  return out;
}

}  // namespace surgeflow::forecast
