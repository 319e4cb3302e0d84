#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ntd/lnn.hpp"
#include "ntd/matrix.hpp"

namespace ntd {

/// Position of a hidden unit: layer is the network depth d (2..D-1),
/// index the unit's position within that layer.
struct UnitRef {
  std::size_t layer = 0;
  std::size_t index = 0;
  bool operator==(const UnitRef&) const = default;
};

/// Rows 0..k0-1 in concatenated order: layer 2 units first, then layer 3, ...
std::vector<UnitRef> hidden_unit_index(const NetworkParams& params);
std::size_t hidden_unit_row(const NetworkParams& params, UnitRef ref);

/// Non-negative per-unit role matrix V = [v_in | v_out], min-max normalized
/// per block over all units jointly. Raw blocks are kept so the scaling can
/// be undone or redone differently.
struct FeatureMatrix {
  Mat V;                            // k0 x (i0 + j0)
  std::size_t input_block_width = 0;  // i0
  std::vector<UnitRef> unit_index;  // row -> (layer, unit)
  Mat v_in_raw;                     // k0 x i0, pre-normalization
  Mat v_out_raw;                    // k0 x j0, pre-normalization
  double in_min = 0.0, in_max = 0.0;    // raw extrema of the v_in block
  double out_min = 0.0, out_max = 0.0;  // raw extrema of the v_out block
};

/// RMS change of hidden unit k's activation when input dimension i is
/// replaced by its training-set mean on every sample.
double input_effect(const NetworkParams& params, const Dataset& data,
                    std::size_t unit_row, std::size_t input_dim);

/// RMS change of output dimension j when hidden unit k's activation is
/// replaced by its training-set mean and only downstream layers are rerun.
double output_effect(const NetworkParams& params, const Dataset& data,
                     std::size_t unit_row, std::size_t output_dim);

/// All effects, assembled and normalized. threads = 0 uses NTD_THREADS or
/// the machine parallelism; results are identical for any thread count.
FeatureMatrix build_feature_matrix(const NetworkParams& params,
                                   const Dataset& data, unsigned threads = 0);

/// CSV (9 significant digits) plus a JSON sidecar carrying the raw blocks
/// and normalization constants; load restores exact doubles.
void save_feature_matrix(const FeatureMatrix& fm, const std::string& csv_path,
                         const std::string& sidecar_path);
FeatureMatrix load_feature_matrix(const std::string& csv_path,
                                  const std::string& sidecar_path);

}  // namespace ntd
