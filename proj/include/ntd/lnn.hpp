#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ntd/matrix.hpp"

namespace ntd {

/// Sigmoid feedforward network. Layer 1 is the input, layer D the output;
/// every layer including the output applies sigma(z) = 1/(1+exp(-z)).
struct NetworkParams {
  std::vector<std::size_t> layer_sizes;     // l_1..l_D, D >= 3
  std::vector<Mat> weights;                 // weights[d]: layer_sizes[d] x layer_sizes[d+1]
  std::vector<std::vector<double>> biases;  // biases[d]: units of layer d+2

  std::size_t depth() const { return layer_sizes.size(); }
  std::size_t input_dim() const { return layer_sizes.front(); }
  std::size_t output_dim() const { return layer_sizes.back(); }

  /// Units in layers 2..D-1, the objects attribution cares about.
  std::size_t hidden_count() const;

  /// Shape consistency, D >= 3, finiteness. Throws shape_error.
  void validate() const;
};

struct Dataset {
  Mat X;  // n x i0
  Mat Y;  // n x j0
  std::size_t n() const { return X.rows; }
};

struct TrainConfig {
  double lambda = 1e-5;     // L1 coefficient
  double epsilon1 = 0.001;  // delta regularizer added to sigma'
  std::size_t epochs = 200; // a1, mean iterations per dataset
  double eta0 = 0.7;
  std::uint64_t seed = 1;
  bool shuffle = false;  // false: uniform with replacement; true: per-epoch permutation
};

struct TrainReport {
  double initial_error = 0.0;
  std::vector<double> epoch_errors;  // E(w) after each epoch
  std::optional<double> test_error;
  std::size_t near_zero_weights = 0;  // |w| < near_zero_threshold at the end
  double near_zero_threshold = 1e-3;
  bool diverged = false;
  std::size_t diverged_epoch = 0;  // 1-based when diverged
};

/// Training blew up to non-finite parameters. Carries the partial report.
class diverged_error : public std::runtime_error {
 public:
  diverged_error(std::size_t epoch, TrainReport partial)
      : std::runtime_error("training diverged at epoch " + std::to_string(epoch)),
        epoch_(epoch),
        report_(std::move(partial)) {}
  std::size_t epoch() const { return epoch_; }
  const TrainReport& report() const { return report_; }

 private:
  std::size_t epoch_;
  TrainReport report_;
};

/// Per-layer activations of one sample; layers[0] is the input, layers[d]
/// the activations of layer d+1, layers.back() the network output.
struct Activations {
  std::vector<std::vector<double>> layers;
  const std::vector<double>& output() const { return layers.back(); }
};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Activations forward(const NetworkParams& params, std::span<const double> x);

/// sigma(prev * W + bias), one dataset-sized layer step.
Mat apply_layer(const Mat& prev, const Mat& weights, const std::vector<double>& bias);

/// Activations of every layer over a whole dataset; acts[0] is X itself,
/// acts[d] is n x layer_sizes[d].
std::vector<Mat> forward_dataset(const NetworkParams& params, const Mat& X);

/// E(w) = mean over samples of the squared output error.
double training_error(const NetworkParams& params, const Dataset& data);

/// One stochastic steepest-descent update on a single sample, in place.
/// Deltas are computed with the pre-update weights, then all parameters move:
///   dw = -eta * (delta_j * o_i + lambda * sgn(w)),  dtheta = -eta * delta
/// with sgn(0) = 0 and delta carrying the epsilon1 regularizer.
void sgd_step(NetworkParams& params, std::span<const double> x,
              std::span<const double> y, const TrainConfig& config, double eta);

/// Runs epochs * n sgd_step calls on randomly chosen samples with the
/// 1/t learning-rate schedule eta(t) = eta0 * a1*n / (a1*n + 5t).
/// Throws diverged_error if parameters go non-finite (checked per epoch).
std::pair<NetworkParams, TrainReport> train(const NetworkParams& init,
                                            const Dataset& data,
                                            const TrainConfig& config,
                                            const Dataset* test = nullptr);

NetworkParams init_params(const std::vector<std::size_t>& layer_sizes,
                          std::uint64_t seed, double weight_sigma = 0.5,
                          double bias_sigma = 0.5);

/// Versioned JSON with exact float round-trip.
std::string params_to_json(const NetworkParams& params);
NetworkParams params_from_json(const std::string& text);
void save_params(const NetworkParams& params, const std::string& path);
NetworkParams load_params(const std::string& path);

std::string train_report_to_json(const TrainReport& report);

}  // namespace ntd
