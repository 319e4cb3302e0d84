#include "ntd/lnn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "ntd/common.hpp"
#include "ntd/io_util.hpp"
#include "ntd/rng.hpp"

namespace ntd {

namespace {

double sgn(double w) { return (w > 0.0) ? 1.0 : (w < 0.0 ? -1.0 : 0.0); }

bool all_finite(const NetworkParams& p) {
  for (const Mat& w : p.weights)
    for (double v : w.data)
      if (!std::isfinite(v)) return false;
  for (const auto& b : p.biases)
    for (double v : b)
      if (!std::isfinite(v)) return false;
  return true;
}

/// Scratch buffers reused across sgd steps.
struct Workspace {
  std::vector<std::vector<double>> acts;    // acts[d]: layer d+1
  std::vector<std::vector<double>> deltas;  // deltas[d]: layer d+1, d >= 1

  explicit Workspace(const NetworkParams& p) {
    acts.resize(p.depth());
    deltas.resize(p.depth());
    for (std::size_t d = 0; d < p.depth(); ++d) {
      acts[d].resize(p.layer_sizes[d]);
      deltas[d].resize(p.layer_sizes[d]);
    }
  }
};

void forward_ws(const NetworkParams& p, std::span<const double> x, Workspace& ws) {
  std::copy(x.begin(), x.end(), ws.acts[0].begin());
  for (std::size_t d = 1; d < p.depth(); ++d) {
    const Mat& w = p.weights[d - 1];
    const std::vector<double>& prev = ws.acts[d - 1];
    std::vector<double>& cur = ws.acts[d];
    cur = p.biases[d - 1];
    for (std::size_t i = 0; i < w.rows; ++i) {
      const double a = prev[i];
      if (a == 0.0) continue;
      const double* wrow = w.row(i);
      for (std::size_t j = 0; j < w.cols; ++j) cur[j] += a * wrow[j];
    }
    for (double& z : cur) z = sigmoid(z);
  }
}

void sgd_step_ws(NetworkParams& p, std::span<const double> x,
                 std::span<const double> y, const TrainConfig& cfg, double eta,
                 Workspace& ws) {
  const std::size_t D = p.depth();
  forward_ws(p, x, ws);

  // Output-layer delta.
  {
    const std::vector<double>& o = ws.acts[D - 1];
    std::vector<double>& del = ws.deltas[D - 1];
    for (std::size_t j = 0; j < o.size(); ++j)
      del[j] = (o[j] - y[j]) * (o[j] * (1.0 - o[j]) + cfg.epsilon1);
  }
  // Hidden deltas, all computed against the pre-update weights.
  for (std::size_t d = D - 2; d >= 1; --d) {
    const Mat& w = p.weights[d];  // layer d+1 -> d+2
    const std::vector<double>& up = ws.deltas[d + 1];
    const std::vector<double>& o = ws.acts[d];
    std::vector<double>& del = ws.deltas[d];
    for (std::size_t j = 0; j < del.size(); ++j) {
      double s = 0.0;
      const double* wrow = w.row(j);
      for (std::size_t k = 0; k < w.cols; ++k) s += up[k] * wrow[k];
      del[j] = s * (o[j] * (1.0 - o[j]) + cfg.epsilon1);
    }
  }
  // Parameter updates.
  for (std::size_t d = 0; d + 1 < D; ++d) {
    Mat& w = p.weights[d];
    const std::vector<double>& prev = ws.acts[d];
    const std::vector<double>& del = ws.deltas[d + 1];
    for (std::size_t i = 0; i < w.rows; ++i) {
      double* wrow = w.row(i);
      const double oi = prev[i];
      for (std::size_t j = 0; j < w.cols; ++j)
        wrow[j] -= eta * (del[j] * oi + cfg.lambda * sgn(wrow[j]));
    }
    std::vector<double>& b = p.biases[d];
    for (std::size_t j = 0; j < b.size(); ++j) b[j] -= eta * del[j];
  }
}

}  // namespace

std::size_t NetworkParams::hidden_count() const {
  std::size_t k = 0;
  for (std::size_t d = 1; d + 1 < layer_sizes.size(); ++d) k += layer_sizes[d];
  return k;
}

void NetworkParams::validate() const {
  if (layer_sizes.size() < 3)
    throw shape_error("network needs at least one hidden layer (D >= 3)");
  for (std::size_t l : layer_sizes)
    if (l == 0) throw shape_error("layer size must be >= 1");
  if (weights.size() != layer_sizes.size() - 1 ||
      biases.size() != layer_sizes.size() - 1)
    throw shape_error("weights/biases count must be D-1");
  for (std::size_t d = 0; d + 1 < layer_sizes.size(); ++d) {
    if (weights[d].rows != layer_sizes[d] || weights[d].cols != layer_sizes[d + 1])
      throw shape_error("weight matrix " + std::to_string(d + 1) +
                        " has inconsistent shape");
    if (biases[d].size() != layer_sizes[d + 1])
      throw shape_error("bias vector for layer " + std::to_string(d + 2) +
                        " has inconsistent length");
  }
  if (!all_finite(*this)) throw shape_error("network parameters must be finite");
}

Activations forward(const NetworkParams& params, std::span<const double> x) {
  if (x.size() != params.input_dim())
    throw shape_error("forward: input length " + std::to_string(x.size()) +
                      " != input dim " + std::to_string(params.input_dim()));
  Workspace ws(params);
  forward_ws(params, x, ws);
  Activations out;
  out.layers = std::move(ws.acts);
  return out;
}

Mat apply_layer(const Mat& prev, const Mat& weights, const std::vector<double>& bias) {
  Mat z = matmul(prev, weights);
  for (std::size_t n = 0; n < z.rows; ++n) {
    double* row = z.row(n);
    for (std::size_t j = 0; j < z.cols; ++j) row[j] = sigmoid(row[j] + bias[j]);
  }
  return z;
}

std::vector<Mat> forward_dataset(const NetworkParams& params, const Mat& X) {
  if (X.cols != params.input_dim())
    throw shape_error("forward_dataset: X has " + std::to_string(X.cols) +
                      " columns, expected " + std::to_string(params.input_dim()));
  std::vector<Mat> acts;
  acts.reserve(params.depth());
  acts.push_back(X);
  for (std::size_t d = 1; d < params.depth(); ++d)
    acts.push_back(apply_layer(acts.back(), params.weights[d - 1], params.biases[d - 1]));
  return acts;
}

double training_error(const NetworkParams& params, const Dataset& data) {
  if (data.n() == 0) throw shape_error("training_error: empty dataset");
  if (data.Y.cols != params.output_dim())
    throw shape_error("training_error: Y has " + std::to_string(data.Y.cols) +
                      " columns, expected " + std::to_string(params.output_dim()));
  const Mat out = forward_dataset(params, data.X).back();
  double total = 0.0;
  for (std::size_t n = 0; n < out.rows; ++n) {
    const double* o = out.row(n);
    const double* y = data.Y.row(n);
    for (std::size_t j = 0; j < out.cols; ++j) {
      const double e = y[j] - o[j];
      total += e * e;
    }
  }
  return total / static_cast<double>(data.n());
}

void sgd_step(NetworkParams& params, std::span<const double> x,
              std::span<const double> y, const TrainConfig& config, double eta) {
  if (x.size() != params.input_dim() || y.size() != params.output_dim())
    throw shape_error("sgd_step: sample dims do not match network");
  Workspace ws(params);
  sgd_step_ws(params, x, y, config, eta, ws);
}

std::pair<NetworkParams, TrainReport> train(const NetworkParams& init,
                                            const Dataset& data,
                                            const TrainConfig& config,
                                            const Dataset* test) {
  init.validate();
  if (data.n() == 0) throw shape_error("train: empty dataset");
  if (data.X.cols != init.input_dim() || data.Y.cols != init.output_dim())
    throw shape_error("train: dataset dims do not match network layers");
  if (config.epochs < 1 || !(config.eta0 > 0.0))
    throw shape_error("train: epochs >= 1 and eta0 > 0 required");
  for (double v : data.Y.data) {
    if (v < 0.0 || v > 1.0) {
      warn("targets outside [0,1]; sigmoid outputs cannot reach them");
      break;
    }
  }

  NetworkParams params = init;
  TrainReport report;
  report.initial_error = training_error(params, data);

  Rng rng(config.seed);
  Workspace ws(params);
  const std::size_t n = data.n();
  const double total_steps = static_cast<double>(config.epochs) * static_cast<double>(n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::size_t t = 0;  // global step, 1-based in the schedule
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.shuffle) {
      // Fisher-Yates with our own rng to keep the stream portable.
      for (std::size_t i = n - 1; i > 0; --i)
        std::swap(order[i], order[rng.index(i + 1)]);
    }
    for (std::size_t s = 0; s < n; ++s) {
      ++t;
      const double eta = config.eta0 * total_steps /
                         (total_steps + 5.0 * static_cast<double>(t));
      const std::size_t idx = config.shuffle ? order[s] : rng.index(n);
      sgd_step_ws(params,
                  std::span<const double>(data.X.row(idx), data.X.cols),
                  std::span<const double>(data.Y.row(idx), data.Y.cols),
                  config, eta, ws);
    }
    if (!all_finite(params)) {
      report.diverged = true;
      report.diverged_epoch = epoch;
      throw diverged_error(epoch, report);
    }
    report.epoch_errors.push_back(training_error(params, data));
  }

  if (test != nullptr) report.test_error = training_error(params, *test);
  for (const Mat& w : params.weights)
    for (double v : w.data)
      if (std::abs(v) < report.near_zero_threshold) ++report.near_zero_weights;
  return {std::move(params), std::move(report)};
}

NetworkParams init_params(const std::vector<std::size_t>& layer_sizes,
                          std::uint64_t seed, double weight_sigma,
                          double bias_sigma) {
  NetworkParams p;
  p.layer_sizes = layer_sizes;
  if (layer_sizes.size() < 3)
    throw shape_error("init_params: need at least 3 layers");
  Rng rng(seed);
  for (std::size_t d = 0; d + 1 < layer_sizes.size(); ++d) {
    Mat w(layer_sizes[d], layer_sizes[d + 1]);
    for (double& v : w.data) v = rng.normal(0.0, weight_sigma);
    p.weights.push_back(std::move(w));
  }
  for (std::size_t d = 0; d + 1 < layer_sizes.size(); ++d) {
    std::vector<double> b(layer_sizes[d + 1]);
    for (double& v : b) v = rng.normal(0.0, bias_sigma);
    p.biases.push_back(std::move(b));
  }
  return p;
}

std::string params_to_json(const NetworkParams& params) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["layer_sizes"] = params.layer_sizes;
  nlohmann::ordered_json ws = nlohmann::ordered_json::array();
  for (const Mat& w : params.weights) ws.push_back(w.data);
  j["weights"] = std::move(ws);
  j["biases"] = params.biases;
  return j.dump();
}

NetworkParams params_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  NetworkParams p;
  p.layer_sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
  const auto& ws = j.at("weights");
  for (std::size_t d = 0; d + 1 < p.layer_sizes.size(); ++d) {
    Mat w(p.layer_sizes[d], p.layer_sizes[d + 1]);
    w.data = ws.at(d).get<std::vector<double>>();
    if (w.data.size() != w.rows * w.cols)
      throw shape_error("model json: weight matrix " + std::to_string(d + 1) +
                        " has wrong element count");
    p.weights.push_back(std::move(w));
  }
  p.biases = j.at("biases").get<std::vector<std::vector<double>>>();
  p.validate();
  return p;
}

void save_params(const NetworkParams& params, const std::string& path) {
  write_text_file(path, params_to_json(params) + "\n");
}

NetworkParams load_params(const std::string& path) {
  return params_from_json(read_text_file(path));
}

std::string train_report_to_json(const TrainReport& r) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["initial_error"] = r.initial_error;
  j["epoch_errors"] = r.epoch_errors;
  if (r.test_error) j["test_error"] = *r.test_error;
  j["near_zero_weights"] = r.near_zero_weights;
  j["near_zero_threshold"] = r.near_zero_threshold;
  j["diverged"] = r.diverged;
  if (r.diverged) j["diverged_epoch"] = r.diverged_epoch;
  return j.dump();
}

}  // namespace ntd
