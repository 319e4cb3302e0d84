#include "ntd/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <stdexcept>

#include "json.hpp"
#include "ntd/common.hpp"
#include "ntd/io_util.hpp"
#include "ntd/rng.hpp"

namespace ntd {

namespace {

NetworkParams draw_subnet(const std::vector<std::size_t>& sizes, Rng& rng,
                          double weight_sigma, double bias_sigma) {
  NetworkParams p;
  p.layer_sizes = sizes;
  for (std::size_t d = 0; d + 1 < sizes.size(); ++d) {
    Mat w(sizes[d], sizes[d + 1]);
    for (double& v : w.data) v = rng.normal(0.0, weight_sigma);
    p.weights.push_back(std::move(w));
  }
  for (std::size_t d = 0; d + 1 < sizes.size(); ++d) {
    std::vector<double> b(sizes[d + 1]);
    for (double& v : b) v = rng.normal(0.0, bias_sigma);
    p.biases.push_back(std::move(b));
  }
  return p;
}

void prune_weights(NetworkParams& p, double threshold) {
  for (Mat& w : p.weights)
    for (double& v : w.data)
      if (std::abs(v) <= threshold) v = 0.0;
}

/// Block-diagonal assembly of per-block subnets with identical depths.
NetworkParams assemble_blockdiag(const std::vector<NetworkParams>& subs) {
  const std::size_t D = subs[0].layer_sizes.size();
  NetworkParams p;
  p.layer_sizes.assign(D, 0);
  for (const auto& s : subs)
    for (std::size_t d = 0; d < D; ++d) p.layer_sizes[d] += s.layer_sizes[d];
  for (std::size_t d = 0; d + 1 < D; ++d) {
    Mat w(p.layer_sizes[d], p.layer_sizes[d + 1], 0.0);
    std::size_t roff = 0, coff = 0;
    for (const auto& s : subs) {
      const Mat& sw = s.weights[d];
      for (std::size_t i = 0; i < sw.rows; ++i)
        for (std::size_t j = 0; j < sw.cols; ++j)
          w(roff + i, coff + j) = sw(i, j);
      roff += sw.rows;
      coff += sw.cols;
    }
    p.weights.push_back(std::move(w));
    std::vector<double> b;
    for (const auto& s : subs)
      b.insert(b.end(), s.biases[d].begin(), s.biases[d].end());
    p.biases.push_back(std::move(b));
  }
  return p;
}

/// True when every output unit is reachable from some input through
/// nonzero weights.
bool outputs_reachable(const NetworkParams& p) {
  std::vector<char> reach(p.layer_sizes[0], 1);
  for (const Mat& w : p.weights) {
    std::vector<char> next(w.cols, 0);
    for (std::size_t i = 0; i < w.rows; ++i) {
      if (!reach[i]) continue;
      for (std::size_t j = 0; j < w.cols; ++j)
        if (w(i, j) != 0.0) next[j] = 1;
    }
    reach = std::move(next);
  }
  return std::all_of(reach.begin(), reach.end(), [](char c) { return c != 0; });
}

Mat gaussian_matrix(std::size_t rows, std::size_t cols, double sigma, Rng& rng) {
  Mat m(rows, cols);
  for (double& v : m.data) v = rng.normal(0.0, sigma);
  return m;
}

Dataset sample_dataset(const NetworkParams& teacher, std::size_t n,
                       double input_sigma, double noise_sigma, Rng& rng) {
  Dataset d;
  d.X = gaussian_matrix(n, teacher.input_dim(), input_sigma, rng);
  d.Y = forward_dataset(teacher, d.X).back();
  if (noise_sigma > 0.0)
    for (double& v : d.Y.data) v += rng.normal(0.0, noise_sigma);
  return d;
}

}  // namespace

SyntheticProblem gen_synthetic(const SyntheticSpec& spec) {
  if (spec.blocks < 1 || spec.hidden_layers_per_block < 1 ||
      spec.units_per_hidden_layer < 1 || spec.inputs_per_block < 1 ||
      spec.outputs_per_block < 1 || spec.n_train < 1)
    throw std::invalid_argument("gen_synthetic: all counts must be >= 1");

  std::vector<std::size_t> sub_sizes;
  sub_sizes.push_back(spec.inputs_per_block);
  for (std::size_t h = 0; h < spec.hidden_layers_per_block; ++h)
    sub_sizes.push_back(spec.units_per_hidden_layer);
  sub_sizes.push_back(spec.outputs_per_block);

  constexpr int kMaxAttempts = 10;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const std::uint64_t seed = spec.seed + static_cast<std::uint64_t>(attempt);
    Rng rng(seed);
    std::vector<NetworkParams> subs;
    for (std::size_t b = 0; b < spec.blocks; ++b) {
      NetworkParams sub = draw_subnet(sub_sizes, rng, 1.0, 0.5);
      prune_weights(sub, spec.prune_threshold);
      subs.push_back(std::move(sub));
    }
    NetworkParams teacher = assemble_blockdiag(subs);
    if (!outputs_reachable(teacher)) continue;

    SyntheticProblem prob;
    prob.teacher = std::move(teacher);
    prob.seed_used = seed;
    prob.train = sample_dataset(prob.teacher, spec.n_train, spec.input_sigma,
                                spec.noise_sigma, rng);
    if (spec.n_test > 0)
      prob.test = sample_dataset(prob.teacher, spec.n_test, spec.input_sigma,
                                 spec.noise_sigma, rng);

    for (std::size_t b = 0; b < spec.blocks; ++b)
      for (std::size_t i = 0; i < spec.inputs_per_block; ++i)
        prob.truth.input_labels.push_back(static_cast<int>(b));
    for (std::size_t h = 0; h < spec.hidden_layers_per_block; ++h)
      for (std::size_t b = 0; b < spec.blocks; ++b)
        for (std::size_t u = 0; u < spec.units_per_hidden_layer; ++u)
          prob.truth.hidden_labels.push_back(static_cast<int>(b));
    for (std::size_t b = 0; b < spec.blocks; ++b)
      for (std::size_t o = 0; o < spec.outputs_per_block; ++o)
        prob.truth.output_labels.push_back(static_cast<int>(b));
    return prob;
  }
  throw std::runtime_error(
      "gen_synthetic: teacher had unreachable outputs after " +
      std::to_string(kMaxAttempts) + " seeds starting at " +
      std::to_string(spec.seed) + "; lower prune_threshold or widen blocks");
}

WindowedDataset window_csv(const std::string& path,
                           const std::vector<std::string>& input_columns,
                           const std::vector<std::string>& target_columns,
                           std::size_t window, std::size_t horizon) {
  if (window < 1) throw std::invalid_argument("window_csv: window must be >= 1");
  if (input_columns.empty() || target_columns.empty())
    throw std::invalid_argument("window_csv: need input and target columns");

  const std::string text = read_text_file(path);
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    if (eol > pos) lines.push_back(text.substr(pos, eol - pos));
    pos = eol + 1;
  }
  if (lines.size() < 2) throw std::runtime_error("window_csv: no data rows");

  const auto header = split_csv_line(lines[0]);
  auto col_of = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw std::runtime_error("window_csv: no column named '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  std::vector<std::size_t> in_idx, tg_idx;
  for (const auto& c : input_columns) in_idx.push_back(col_of(c));
  for (const auto& c : target_columns) tg_idx.push_back(col_of(c));

  // Series values for the used columns, rows with bad cells skipped.
  std::vector<std::vector<double>> in_series(in_idx.size());
  std::vector<std::vector<double>> tg_series(tg_idx.size());
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = split_csv_line(lines[r]);
    std::vector<double> in_vals, tg_vals;
    bool ok = true;
    try {
      for (std::size_t c : in_idx) {
        if (c >= fields.size()) throw std::runtime_error("short row");
        in_vals.push_back(parse_double(fields[c]));
      }
      for (std::size_t c : tg_idx) {
        if (c >= fields.size()) throw std::runtime_error("short row");
        tg_vals.push_back(parse_double(fields[c]));
      }
    } catch (const std::exception&) {
      ok = false;
    }
    if (!ok) {
      warn("window_csv: skipping row " + std::to_string(r) + " of " + path);
      continue;
    }
    for (std::size_t s = 0; s < in_idx.size(); ++s)
      in_series[s].push_back(in_vals[s]);
    for (std::size_t s = 0; s < tg_idx.size(); ++s)
      tg_series[s].push_back(tg_vals[s]);
  }

  const std::size_t rows = in_series[0].size();
  if (rows < window + horizon)
    throw std::runtime_error("window_csv: fewer than one sample after skips");
  const std::size_t n = rows - window + 1 - horizon;

  WindowedDataset out;
  out.input_columns = input_columns;
  out.target_columns = target_columns;
  out.window = window;
  out.horizon = horizon;

  auto scale_series = [](std::vector<double>& v, ColumnScaler& sc) {
    sc.min = *std::min_element(v.begin(), v.end());
    sc.max = *std::max_element(v.begin(), v.end());
    if (!(sc.max > sc.min)) {
      std::fill(v.begin(), v.end(), 0.0);  // degenerate column rule
      return;
    }
    const double scale = sc.max - sc.min;
    for (double& x : v) x = (x - sc.min) / scale;
  };
  out.input_scalers.resize(in_series.size());
  out.target_scalers.resize(tg_series.size());
  for (std::size_t s = 0; s < in_series.size(); ++s)
    scale_series(in_series[s], out.input_scalers[s]);
  for (std::size_t s = 0; s < tg_series.size(); ++s)
    scale_series(tg_series[s], out.target_scalers[s]);

  out.data.X = Mat(n, window * in_series.size());
  out.data.Y = Mat(n, tg_series.size());
  for (std::size_t sidx = 0; sidx < n; ++sidx) {
    const std::size_t r = sidx + window - 1;  // last input row of the sample
    double* xrow = out.data.X.row(sidx);
    for (std::size_t s = 0; s < in_series.size(); ++s)
      for (std::size_t lag = 0; lag < window; ++lag)
        xrow[s * window + lag] = in_series[s][r - window + 1 + lag];
    for (std::size_t s = 0; s < tg_series.size(); ++s)
      out.data.Y(sidx, s) = tg_series[s][r + horizon];
  }
  return out;
}

// --- diagram corpus ---

namespace {

struct Pt {
  double x, y;
};

double dist_to_segment(Pt p, Pt a, Pt b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double ex = a.x + t * dx - p.x, ey = a.y + t * dy - p.y;
  return std::sqrt(ex * ex + ey * ey);
}

/// Soft stroke: full intensity within ~half a pixel of the segment,
/// fading to 0 at ~1.2 px.
void stroke(std::vector<double>& img, std::size_t size, Pt a, Pt b) {
  for (std::size_t py = 0; py < size; ++py) {
    for (std::size_t px = 0; px < size; ++px) {
      const Pt c{static_cast<double>(px) + 0.5, static_cast<double>(py) + 0.5};
      const double d = dist_to_segment(c, a, b);
      const double v = std::clamp(1.7 - 1.4 * d, 0.0, 1.0);
      double& cell = img[py * size + px];
      cell = std::max(cell, v);
    }
  }
}

void polyline(std::vector<double>& img, std::size_t size,
              const std::vector<Pt>& pts, bool close) {
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    stroke(img, size, pts[i], pts[i + 1]);
  if (close && pts.size() > 2) stroke(img, size, pts.back(), pts.front());
}

void disk(std::vector<double>& img, std::size_t size, Pt c, double r) {
  for (std::size_t py = 0; py < size; ++py) {
    for (std::size_t px = 0; px < size; ++px) {
      const Pt p{static_cast<double>(px) + 0.5, static_cast<double>(py) + 0.5};
      const double d = std::hypot(p.x - c.x, p.y - c.y);
      const double v = std::clamp(1.5 * (r + 0.5 - d), 0.0, 1.0);
      double& cell = img[py * size + px];
      cell = std::max(cell, v);
    }
  }
}

void circle_outline(std::vector<double>& img, std::size_t size, Pt c, double r) {
  std::vector<Pt> pts;
  for (int i = 0; i <= 36; ++i) {
    const double a = 2.0 * std::numbers::pi * i / 36.0;
    pts.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
  }
  polyline(img, size, pts, false);
}

Pt rot(Pt p, Pt c, double ang) {
  const double ca = std::cos(ang), sa = std::sin(ang);
  return {c.x + (p.x - c.x) * ca - (p.y - c.y) * sa,
          c.y + (p.x - c.x) * sa + (p.y - c.y) * ca};
}

void draw_diagram(std::vector<double>& img, std::size_t size, DiagramClass cls,
                  Rng& rng) {
  const double half = static_cast<double>(size) / 2.0;
  const Pt c{half + (rng.uniform01() * 4.0 - 2.0),
             half + (rng.uniform01() * 4.0 - 2.0)};
  const double s = half * (0.55 + 0.35 * rng.uniform01());
  const double ang = rng.uniform01() * std::numbers::pi;  // only some shapes use it

  switch (cls) {
    case DiagramClass::rectangle: {
      const double h = 0.7 * s;
      polyline(img, size,
               {{c.x - s, c.y - h}, {c.x + s, c.y - h}, {c.x + s, c.y + h}, {c.x - s, c.y + h}},
               true);
      break;
    }
    case DiagramClass::cross:
      stroke(img, size, {c.x - s, c.y}, {c.x + s, c.y});
      stroke(img, size, {c.x, c.y - s}, {c.x, c.y + s});
      break;
    case DiagramClass::line:
      stroke(img, size, rot({c.x - s, c.y}, c, ang), rot({c.x + s, c.y}, c, ang));
      break;
    case DiagramClass::two_lines: {
      const double off = 0.45 * s;
      stroke(img, size, rot({c.x - s, c.y - off}, c, ang), rot({c.x + s, c.y - off}, c, ang));
      stroke(img, size, rot({c.x - s, c.y + off}, c, ang), rot({c.x + s, c.y + off}, c, ang));
      break;
    }
    case DiagramClass::triangle:
      polyline(img, size, {{c.x, c.y - s}, {c.x + s, c.y + 0.8 * s}, {c.x - s, c.y + 0.8 * s}},
               true);
      break;
    case DiagramClass::diamond:
      polyline(img, size, {{c.x, c.y - s}, {c.x + s, c.y}, {c.x, c.y + s}, {c.x - s, c.y}},
               true);
      break;
    case DiagramClass::arrow: {
      const Pt tail = rot({c.x - s, c.y}, c, ang);
      const Pt head = rot({c.x + s, c.y}, c, ang);
      stroke(img, size, tail, head);
      stroke(img, size, head, rot({c.x + 0.35 * s, c.y - 0.4 * s}, c, ang));
      stroke(img, size, head, rot({c.x + 0.35 * s, c.y + 0.4 * s}, c, ang));
      break;
    }
    case DiagramClass::ribbon: {
      const double h = 0.6 * s;
      stroke(img, size, {c.x - s, c.y - h}, {c.x - s, c.y + h});
      stroke(img, size, {c.x + s, c.y - h}, {c.x + s, c.y + h});
      stroke(img, size, {c.x - s, c.y - h}, {c.x + s, c.y + h});
      stroke(img, size, {c.x - s, c.y + h}, {c.x + s, c.y - h});
      break;
    }
    case DiagramClass::heart: {
      std::vector<Pt> pts;
      for (int i = 0; i <= 40; ++i) {
        const double t = 2.0 * std::numbers::pi * i / 40.0;
        const double hx = 16.0 * std::pow(std::sin(t), 3.0);
        const double hy = 13.0 * std::cos(t) - 5.0 * std::cos(2 * t) -
                          2.0 * std::cos(3 * t) - std::cos(4 * t);
        pts.push_back({c.x + s * hx / 17.0, c.y - s * hy / 17.0});
      }
      polyline(img, size, pts, true);
      break;
    }
    case DiagramClass::face: {
      circle_outline(img, size, c, s);
      disk(img, size, {c.x - 0.35 * s, c.y - 0.3 * s}, 0.13 * s);
      disk(img, size, {c.x + 0.35 * s, c.y - 0.3 * s}, 0.13 * s);
      std::vector<Pt> mouth;
      for (int i = 0; i <= 12; ++i) {
        const double a = std::numbers::pi * (0.25 + 0.5 * i / 12.0);
        mouth.push_back({c.x + 0.55 * s * std::cos(a), c.y + 0.55 * s * std::sin(a)});
      }
      polyline(img, size, mouth, false);
      break;
    }
  }
}

}  // namespace

const std::vector<DiagramClass>& all_diagram_classes() {
  static const std::vector<DiagramClass> all = {
      DiagramClass::rectangle, DiagramClass::cross,   DiagramClass::line,
      DiagramClass::two_lines, DiagramClass::triangle, DiagramClass::diamond,
      DiagramClass::arrow,     DiagramClass::ribbon,  DiagramClass::heart,
      DiagramClass::face};
  return all;
}

std::string diagram_class_name(DiagramClass c) {
  switch (c) {
    case DiagramClass::rectangle: return "rectangle";
    case DiagramClass::cross: return "cross";
    case DiagramClass::line: return "line";
    case DiagramClass::two_lines: return "two_lines";
    case DiagramClass::triangle: return "triangle";
    case DiagramClass::diamond: return "diamond";
    case DiagramClass::arrow: return "arrow";
    case DiagramClass::ribbon: return "ribbon";
    case DiagramClass::heart: return "heart";
    case DiagramClass::face: return "face";
  }
  return "?";
}

DiagramClass diagram_class_from_name(const std::string& name) {
  for (DiagramClass c : all_diagram_classes())
    if (diagram_class_name(c) == name) return c;
  throw std::invalid_argument("unknown diagram class: " + name);
}

DiagramDataset gen_diagrams(const std::vector<DiagramClass>& classes,
                            std::size_t per_class, std::size_t size,
                            std::uint64_t seed) {
  if (classes.empty() || per_class < 1 || size < 4)
    throw std::invalid_argument("gen_diagrams: need classes, per_class >= 1, size >= 4");
  DiagramDataset out;
  out.classes = classes;
  out.size = size;
  const std::size_t n = classes.size() * per_class;
  out.data.X = Mat(n, size * size);
  out.data.Y = Mat(n, classes.size(), 0.0);
  Rng rng(seed);
  std::size_t row = 0;
  for (std::size_t ci = 0; ci < classes.size(); ++ci) {
    for (std::size_t k = 0; k < per_class; ++k, ++row) {
      std::vector<double> img(size * size, 0.0);
      draw_diagram(img, size, classes[ci], rng);
      std::copy(img.begin(), img.end(), out.data.X.row(row));
      out.data.Y(row, ci) = 1.0;
    }
  }
  return out;
}

void write_pgm(const std::string& path, const std::vector<double>& pixels,
               std::size_t width, std::size_t height) {
  if (pixels.size() != width * height)
    throw shape_error("write_pgm: pixel count mismatch");
  std::string s = "P2\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const int v = static_cast<int>(std::lround(
          std::clamp(pixels[y * width + x], 0.0, 1.0) * 255.0));
      s += std::to_string(v);
      s += (x + 1 == width) ? '\n' : ' ';
    }
  }
  write_text_file(path, s);
}

void save_dataset_dir(const std::string& dir, const Dataset& data,
                      const std::string& manifest_json) {
  std::filesystem::create_directories(dir);
  auto write_mat_csv = [&](const Mat& m, const std::string& name) {
    std::string csv;
    for (std::size_t c = 0; c < m.cols; ++c) {
      if (c) csv += ",";
      csv += "d" + std::to_string(c);
    }
    csv += "\n";
    for (std::size_t r = 0; r < m.rows; ++r) {
      const double* row = m.row(r);
      for (std::size_t c = 0; c < m.cols; ++c) {
        if (c) csv += ",";
        csv += fmt_double(row[c]);
      }
      csv += "\n";
    }
    write_text_file(dir + "/" + name, csv);
  };
  write_mat_csv(data.X, "X.csv");
  write_mat_csv(data.Y, "Y.csv");

  auto j = nlohmann::ordered_json::parse(manifest_json);
  j["n"] = data.n();
  j["i0"] = data.X.cols;
  j["j0"] = data.Y.cols;
  write_text_file(dir + "/dataset.json", j.dump(2) + "\n");
}

LoadedDataset load_dataset_dir(const std::string& dir) {
  auto read_mat_csv = [&](const std::string& name) {
    const std::string text = read_text_file(dir + "/" + name);
    std::vector<std::vector<double>> rows;
    std::size_t pos = 0;
    bool header = true;
    std::size_t cols = 0;
    while (pos < text.size()) {
      std::size_t eol = text.find('\n', pos);
      if (eol == std::string::npos) eol = text.size();
      const std::string line = text.substr(pos, eol - pos);
      pos = eol + 1;
      if (line.empty()) continue;
      if (header) {
        header = false;
        cols = split_csv_line(line).size();
        continue;
      }
      const auto fields = split_csv_line(line);
      if (fields.size() != cols)
        throw std::runtime_error(name + ": ragged csv row");
      std::vector<double> vals;
      vals.reserve(fields.size());
      for (const auto& f : fields) vals.push_back(parse_double(f));
      rows.push_back(std::move(vals));
    }
    if (rows.empty()) throw std::runtime_error(name + ": no data rows");
    Mat m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r)
      std::copy(rows[r].begin(), rows[r].end(), m.row(r));
    return m;
  };
  LoadedDataset out;
  out.data.X = read_mat_csv("X.csv");
  out.data.Y = read_mat_csv("Y.csv");
  if (out.data.X.rows != out.data.Y.rows)
    throw std::runtime_error("dataset dir: X and Y row counts differ");
  out.manifest_json = read_text_file(dir + "/dataset.json");
  return out;
}

}  // namespace ntd
