#include "ntd/attribution.hpp"

#include <cmath>
#include <functional>
#include <thread>

#include "json.hpp"
#include "ntd/common.hpp"
#include "ntd/io_util.hpp"

namespace ntd {

namespace {

/// Column mean with a constant-column fast path so that mean-replacement of
/// a constant column is an exact identity.
double column_mean(const Mat& m, std::size_t col) {
  const double first = m(0, col);
  bool constant = true;
  double sum = 0.0;
  for (std::size_t n = 0; n < m.rows; ++n) {
    const double v = m(n, col);
    constant = constant && (v == first);
    sum += v;
  }
  return constant ? first : sum / static_cast<double>(m.rows);
}

void replace_column(Mat& m, std::size_t col, double value) {
  for (std::size_t n = 0; n < m.rows; ++n) m(n, col) = value;
}

/// sqrt(mean over rows of (a - b)^2) for one column pair.
double rms_column_diff(const Mat& a, std::size_t ca, const Mat& b, std::size_t cb) {
  double acc = 0.0;
  for (std::size_t n = 0; n < a.rows; ++n) {
    const double d = a(n, ca) - b(n, cb);
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(a.rows));
}

/// Effects of one input dimension on every hidden unit (one column of v_in).
std::vector<double> input_effect_column(const NetworkParams& params,
                                        const std::vector<Mat>& clean,
                                        std::size_t input_dim) {
  const std::size_t D = params.depth();
  Mat xp = clean[0];
  replace_column(xp, input_dim, column_mean(clean[0], input_dim));
  std::vector<double> out;
  out.reserve(params.hidden_count());
  Mat prev = std::move(xp);
  for (std::size_t d = 1; d + 1 < D; ++d) {
    Mat cur = apply_layer(prev, params.weights[d - 1], params.biases[d - 1]);
    for (std::size_t u = 0; u < cur.cols; ++u)
      out.push_back(rms_column_diff(cur, u, clean[d], u));
    prev = std::move(cur);
  }
  return out;
}

/// Effects of one hidden unit on every output dimension (one row of v_out).
std::vector<double> output_effect_row(const NetworkParams& params,
                                      const std::vector<Mat>& clean,
                                      UnitRef unit) {
  const std::size_t D = params.depth();
  const std::size_t d0 = unit.layer - 1;  // activation index of the unit's layer
  Mat pert = clean[d0];
  replace_column(pert, unit.index, column_mean(clean[d0], unit.index));
  for (std::size_t d = d0 + 1; d < D; ++d)
    pert = apply_layer(pert, params.weights[d - 1], params.biases[d - 1]);
  const Mat& clean_out = clean[D - 1];
  std::vector<double> out(params.output_dim());
  for (std::size_t j = 0; j < out.size(); ++j)
    out[j] = rms_column_diff(clean_out, j, pert, j);
  return out;
}

/// Static index partition; each job writes its own slots, so the result is
/// independent of the thread count.
void parallel_for(std::size_t jobs, unsigned threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = env_threads();
  threads = static_cast<unsigned>(
      std::min<std::size_t>(threads, jobs > 0 ? jobs : 1));
  if (threads <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned tid = 0; tid < threads; ++tid) {
    pool.emplace_back([&, tid] {
      for (std::size_t i = tid; i < jobs; i += threads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

/// (x - min) / (max - min); a constant block maps to all zeros.
void apply_minmax(Mat& block, double mn, double mx) {
  if (!(mx > mn)) {
    for (double& v : block.data) v = 0.0;
    return;
  }
  const double scale = mx - mn;
  for (double& v : block.data) v = (v - mn) / scale;
}

void block_extrema(const Mat& block, double& mn, double& mx) {
  mn = block.data[0];
  mx = block.data[0];
  for (double v : block.data) {
    if (v < mn) mn = v;
    if (v > mx) mx = v;
  }
}

Mat mat_from_flat(std::size_t rows, std::size_t cols, std::vector<double> flat) {
  if (flat.size() != rows * cols)
    throw shape_error("feature sidecar: flat matrix has wrong element count");
  Mat m(rows, cols);
  m.data = std::move(flat);
  return m;
}

/// Normalize the raw blocks and assemble V. Shared by build and load so a
/// round trip reproduces bit-identical values.
void assemble(FeatureMatrix& fm) {
  const std::size_t k0 = fm.v_in_raw.rows;
  const std::size_t i0 = fm.v_in_raw.cols;
  const std::size_t j0 = fm.v_out_raw.cols;
  Mat vin = fm.v_in_raw;
  Mat vout = fm.v_out_raw;
  if (!(fm.in_max > fm.in_min))
    warn("v_in block is constant; mapping it to zeros");
  if (!(fm.out_max > fm.out_min))
    warn("v_out block is constant; mapping it to zeros");
  apply_minmax(vin, fm.in_min, fm.in_max);
  apply_minmax(vout, fm.out_min, fm.out_max);
  fm.V = Mat(k0, i0 + j0);
  for (std::size_t k = 0; k < k0; ++k) {
    double* row = fm.V.row(k);
    const double* in = vin.row(k);
    const double* out = vout.row(k);
    for (std::size_t i = 0; i < i0; ++i) row[i] = in[i];
    for (std::size_t j = 0; j < j0; ++j) row[i0 + j] = out[j];
  }
  fm.input_block_width = i0;
}

}  // namespace

std::vector<UnitRef> hidden_unit_index(const NetworkParams& params) {
  std::vector<UnitRef> refs;
  refs.reserve(params.hidden_count());
  for (std::size_t d = 1; d + 1 < params.depth(); ++d)
    for (std::size_t u = 0; u < params.layer_sizes[d]; ++u)
      refs.push_back({d + 1, u});  // depth is 1-based
  return refs;
}

std::size_t hidden_unit_row(const NetworkParams& params, UnitRef ref) {
  if (ref.layer < 2 || ref.layer + 1 > params.depth())
    throw shape_error("unit layer out of hidden range");
  std::size_t row = 0;
  for (std::size_t d = 1; d + 1 < ref.layer; ++d) row += params.layer_sizes[d];
  if (ref.index >= params.layer_sizes[ref.layer - 1])
    throw shape_error("unit index out of range for its layer");
  return row + ref.index;
}

double input_effect(const NetworkParams& params, const Dataset& data,
                    std::size_t unit_row, std::size_t input_dim) {
  if (unit_row >= params.hidden_count() || input_dim >= params.input_dim())
    throw shape_error("input_effect: unit or input index out of range");
  const auto clean = forward_dataset(params, data.X);
  return input_effect_column(params, clean, input_dim)[unit_row];
}

double output_effect(const NetworkParams& params, const Dataset& data,
                     std::size_t unit_row, std::size_t output_dim) {
  if (unit_row >= params.hidden_count() || output_dim >= params.output_dim())
    throw shape_error("output_effect: unit or output index out of range");
  const auto clean = forward_dataset(params, data.X);
  const auto refs = hidden_unit_index(params);
  return output_effect_row(params, clean, refs[unit_row])[output_dim];
}

FeatureMatrix build_feature_matrix(const NetworkParams& params,
                                   const Dataset& data, unsigned threads) {
  params.validate();
  if (data.n() == 0) throw shape_error("build_feature_matrix: empty dataset");
  const std::size_t i0 = params.input_dim();
  const std::size_t j0 = params.output_dim();
  const std::size_t k0 = params.hidden_count();

  const auto clean = forward_dataset(params, data.X);
  FeatureMatrix fm;
  fm.unit_index = hidden_unit_index(params);
  fm.v_in_raw = Mat(k0, i0);
  fm.v_out_raw = Mat(k0, j0);

  parallel_for(i0, threads, [&](std::size_t i) {
    const auto col = input_effect_column(params, clean, i);
    for (std::size_t k = 0; k < k0; ++k) fm.v_in_raw(k, i) = col[k];
  });
  parallel_for(k0, threads, [&](std::size_t k) {
    const auto row = output_effect_row(params, clean, fm.unit_index[k]);
    for (std::size_t j = 0; j < j0; ++j) fm.v_out_raw(k, j) = row[j];
  });

  block_extrema(fm.v_in_raw, fm.in_min, fm.in_max);
  block_extrema(fm.v_out_raw, fm.out_min, fm.out_max);
  assemble(fm);
  return fm;
}

void save_feature_matrix(const FeatureMatrix& fm, const std::string& csv_path,
                         const std::string& sidecar_path) {
  const std::size_t i0 = fm.input_block_width;
  const std::size_t j0 = fm.V.cols - i0;
  std::string csv = "unit,layer";
  for (std::size_t i = 0; i < i0; ++i) csv += ",in_" + std::to_string(i);
  for (std::size_t j = 0; j < j0; ++j) csv += ",out_" + std::to_string(j);
  csv += "\n";
  for (std::size_t k = 0; k < fm.V.rows; ++k) {
    csv += std::to_string(fm.unit_index[k].index) + "," +
           std::to_string(fm.unit_index[k].layer);
    const double* row = fm.V.row(k);
    for (std::size_t c = 0; c < fm.V.cols; ++c) {
      csv += ",";
      csv += fmt_double_sig9(row[c]);
    }
    csv += "\n";
  }
  write_text_file(csv_path, csv);

  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["i0"] = i0;
  j["j0"] = j0;
  j["k0"] = fm.V.rows;
  j["in_min"] = fm.in_min;
  j["in_max"] = fm.in_max;
  j["out_min"] = fm.out_min;
  j["out_max"] = fm.out_max;
  j["v_in_raw"] = fm.v_in_raw.data;
  j["v_out_raw"] = fm.v_out_raw.data;
  write_text_file(sidecar_path, j.dump() + "\n");
}

FeatureMatrix load_feature_matrix(const std::string& csv_path,
                                  const std::string& sidecar_path) {
  const auto j = nlohmann::json::parse(read_text_file(sidecar_path));
  FeatureMatrix fm;
  const std::size_t i0 = j.at("i0").get<std::size_t>();
  const std::size_t j0 = j.at("j0").get<std::size_t>();
  const std::size_t k0 = j.at("k0").get<std::size_t>();
  fm.in_min = j.at("in_min").get<double>();
  fm.in_max = j.at("in_max").get<double>();
  fm.out_min = j.at("out_min").get<double>();
  fm.out_max = j.at("out_max").get<double>();
  fm.v_in_raw = mat_from_flat(k0, i0, j.at("v_in_raw").get<std::vector<double>>());
  fm.v_out_raw = mat_from_flat(k0, j0, j.at("v_out_raw").get<std::vector<double>>());

  const std::string csv = read_text_file(csv_path);
  std::vector<std::vector<std::string>> rows;
  std::size_t pos = 0;
  bool header = true;
  while (pos < csv.size()) {
    std::size_t eol = csv.find('\n', pos);
    if (eol == std::string::npos) eol = csv.size();
    const std::string line = csv.substr(pos, eol - pos);
    pos = eol + 1;
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    auto fields = split_csv_line(line);
    if (fields.size() != 2 + i0 + j0)
      throw shape_error("feature csv: wrong column count");
    fm.unit_index.push_back({std::stoul(fields[1]), std::stoul(fields[0])});
    rows.push_back(std::move(fields));
  }
  if (fm.unit_index.size() != k0)
    throw shape_error("feature csv: row count does not match sidecar k0");

  assemble(fm);
  // The sidecar is authoritative for exact values; the csv must agree with it.
  for (std::size_t k = 0; k < k0; ++k)
    for (std::size_t c = 0; c < fm.V.cols; ++c)
      if (rows[k][2 + c] != fmt_double_sig9(fm.V(k, c)))
        throw shape_error("feature csv disagrees with sidecar at row " +
                          std::to_string(k));
  return fm;
}

}  // namespace ntd
