#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ntd/lnn.hpp"

namespace ntd {

/// Generator knobs for the planted-block synthetic problem: independent
/// teacher subnetworks assembled block-diagonally.
struct SyntheticSpec {
  std::size_t blocks = 3;
  std::size_t hidden_layers_per_block = 2;
  std::size_t units_per_hidden_layer = 15;
  std::size_t inputs_per_block = 5;
  std::size_t outputs_per_block = 5;
  double prune_threshold = 1.0;  // teacher weights with |w| <= this are deleted
  double input_sigma = 3.0;
  double noise_sigma = 0.05;
  std::size_t n_train = 3000;
  std::size_t n_test = 1000;
  std::uint64_t seed = 1;
};

/// Planted block label of every input dim, hidden unit (concatenated row
/// order) and output dim.
struct GroundTruth {
  std::vector<int> input_labels;
  std::vector<int> hidden_labels;
  std::vector<int> output_labels;
};

struct SyntheticProblem {
  NetworkParams teacher;
  Dataset train;
  Dataset test;
  GroundTruth truth;
  std::uint64_t seed_used = 0;  // differs from spec.seed after retries
};

/// Builds the teacher, prunes small weights, regenerates with seed+1 (up to
/// 10 attempts) if some output unit ends up unreachable from every input,
/// then samples train/test data with Gaussian inputs and output noise.
SyntheticProblem gen_synthetic(const SyntheticSpec& spec);

struct ColumnScaler {
  double min = 0.0;
  double max = 0.0;  // max == min marks a degenerate (constant) column
};

struct WindowedDataset {
  Dataset data;
  std::vector<std::string> input_columns;
  std::vector<std::string> target_columns;
  std::size_t window = 0;
  std::size_t horizon = 0;
  std::vector<ColumnScaler> input_scalers;   // per input column
  std::vector<ColumnScaler> target_scalers;  // per target column
};

/// Sliding-window samples from a headered CSV: sample ending at row r has,
/// for each input column, the `window` consecutive scaled values up to r
/// (oldest lag first, columns concatenated), and the scaled target columns
/// at row r+horizon. Rows with unparsable cells in used columns are skipped
/// with a warning.
WindowedDataset window_csv(const std::string& path,
                           const std::vector<std::string>& input_columns,
                           const std::vector<std::string>& target_columns,
                           std::size_t window, std::size_t horizon);

enum class DiagramClass {
  rectangle, cross, line, two_lines, triangle, diamond, arrow, ribbon, heart, face
};

const std::vector<DiagramClass>& all_diagram_classes();
std::string diagram_class_name(DiagramClass c);
DiagramClass diagram_class_from_name(const std::string& name);

struct DiagramDataset {
  Dataset data;  // X: per_class*|classes| x size*size, Y: one-hot
  std::vector<DiagramClass> classes;
  std::size_t size = 20;
};

/// Parametric stroke drawings with position/scale jitter, rasterized to a
/// size x size grayscale grid in [0,1], row-major.
DiagramDataset gen_diagrams(const std::vector<DiagramClass>& classes,
                            std::size_t per_class, std::size_t size,
                            std::uint64_t seed);

/// P2 (ascii) PGM, maxval 255.
void write_pgm(const std::string& path, const std::vector<double>& pixels,
               std::size_t width, std::size_t height);

/// X.csv / Y.csv with d0.. headers plus dataset.json built from the given
/// manifest body (shapes are filled in).
void save_dataset_dir(const std::string& dir, const Dataset& data,
                      const std::string& manifest_json);

struct LoadedDataset {
  Dataset data;
  std::string manifest_json;
};
LoadedDataset load_dataset_dir(const std::string& dir);

}  // namespace ntd
