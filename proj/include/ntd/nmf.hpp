#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ntd/matrix.hpp"

namespace ntd {

struct NmfConfig {
  std::size_t c0 = 3;     // number of tasks / communities
  std::size_t a0 = 2000;  // iterations
  double mu1 = 0.5, sigma1 = 0.5;  // T init: N(mu1, sigma1^2)
  double mu2 = 0.5, sigma2 = 0.5;  // U init: N(mu2, sigma2^2)
  std::uint64_t seed = 1;
  double denom_floor = 1e-12;
  std::size_t restarts = 1;  // best-of-r by final objective; seeds seed..seed+r-1
};

struct Decomposition {
  Mat T;  // k0 x c0, unit weights
  Mat U;  // c0 x (i0 + j0), task vectors
  std::vector<double> objective_trace;  // ||V - TU||_F after each iteration
  NmfConfig config;
  std::uint64_t restart_seed = 0;  // the seed the kept run used
};

/// Called after every iteration; lets tests watch intermediate factors.
using NmfObserver =
    std::function<void(std::size_t iter, const Mat& T, const Mat& U, double objective)>;

/// Multiplicative-update factorization V ~= TU.
///   T <- T .* (V U^T) ./ (T U U^T),  clamp at 0
///   U <- U .* (T^T V) ./ (T^T T U),  clamp at 0
/// Denominators are floored at denom_floor; initial Gaussian draws are
/// clamped up to denom_floor so every entry stays reachable by the
/// multiplicative dynamics. Throws std::domain_error on a negative V entry
/// and numeric_error if a non-finite value appears.
Decomposition factorize(const Mat& V, const NmfConfig& config,
                        const NmfObserver& observer = {});

/// Same updates from caller-supplied initial factors (restarts ignored).
Decomposition factorize_from(const Mat& V, Mat T0, Mat U0,
                             const NmfConfig& config,
                             const NmfObserver& observer = {});

/// ||V - TU||_F / max(||V||_F, denom_floor).
double reconstruction_error(const Mat& V, const Decomposition& dec);

/// JSON with factors, trace, config and a content hash of V for provenance.
std::string decomposition_to_json(const Decomposition& dec, const Mat& V);
Decomposition decomposition_from_json(const std::string& text);
void save_decomposition(const Decomposition& dec, const Mat& V, const std::string& path);
Decomposition load_decomposition(const std::string& path);

/// Hash over the dimensions and raw entry bytes of a matrix.
std::string matrix_content_hash(const Mat& m);

}  // namespace ntd
