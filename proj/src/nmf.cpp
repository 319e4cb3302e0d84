#include "ntd/nmf.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "json.hpp"
#include "ntd/common.hpp"
#include "ntd/io_util.hpp"
#include "ntd/rng.hpp"

namespace ntd {

namespace {

void clamp_nonnegative(Mat& m) {
  for (double& v : m.data) v = std::max(v, 0.0);
}

bool all_finite(const Mat& m) {
  for (double v : m.data)
    if (!std::isfinite(v)) return false;
  return true;
}

double objective(const Mat& V, const Mat& T, const Mat& U) {
  const Mat TU = matmul(T, U);
  double acc = 0.0;
  for (std::size_t i = 0; i < V.data.size(); ++i) {
    const double d = V.data[i] - TU.data[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

Mat gaussian_init(std::size_t rows, std::size_t cols, double mu, double sigma,
                  Rng& rng, double floor) {
  Mat m(rows, cols);
  for (double& v : m.data) v = std::max(rng.normal(mu, sigma), floor);
  return m;
}

void check_input(const Mat& V, const NmfConfig& cfg) {
  for (double v : V.data)
    if (v < 0.0)
      throw std::domain_error("nmf: V has a negative entry");
  if (cfg.c0 < 1 || cfg.a0 < 1 || !(cfg.denom_floor > 0.0))
    throw std::invalid_argument("nmf: c0 >= 1, a0 >= 1, denom_floor > 0 required");
  if (cfg.c0 > std::min(V.rows, V.cols))
    warn("nmf: c0 exceeds min(V dims); factorization is overcomplete");
}

}  // namespace

Decomposition factorize_from(const Mat& V, Mat T0, Mat U0,
                             const NmfConfig& config, const NmfObserver& observer) {
  check_input(V, config);
  if (T0.rows != V.rows || T0.cols != config.c0 || U0.rows != config.c0 ||
      U0.cols != V.cols)
    throw shape_error("nmf: initial factor shapes do not match V and c0");

  Decomposition dec;
  dec.config = config;
  dec.T = std::move(T0);
  dec.U = std::move(U0);
  dec.objective_trace.reserve(config.a0);

  const double floor = config.denom_floor;
  for (std::size_t it = 1; it <= config.a0; ++it) {
    const Mat UUt = matmul(dec.U, transpose(dec.U));
    dec.T = hadamard(dec.T, elementwise_div(matmul(V, transpose(dec.U)),
                                            matmul(dec.T, UUt), floor));
    clamp_nonnegative(dec.T);

    const Mat TtT = matmul(transpose(dec.T), dec.T);
    dec.U = hadamard(dec.U, elementwise_div(matmul(transpose(dec.T), V),
                                            matmul(TtT, dec.U), floor));
    clamp_nonnegative(dec.U);

    const double obj = objective(V, dec.T, dec.U);
    if (!std::isfinite(obj) || !all_finite(dec.T) || !all_finite(dec.U))
      throw numeric_error("nmf: non-finite value at iteration " + std::to_string(it), it);
    dec.objective_trace.push_back(obj);
    if (observer) observer(it, dec.T, dec.U, obj);
  }
  return dec;
}

Decomposition factorize(const Mat& V, const NmfConfig& config,
                        const NmfObserver& observer) {
  check_input(V, config);
  const std::size_t restarts = std::max<std::size_t>(config.restarts, 1);
  Decomposition best;
  bool have = false;
  for (std::size_t r = 0; r < restarts; ++r) {
    const std::uint64_t seed = config.seed + r;
    Rng rng(seed);
    Mat T0 = gaussian_init(V.rows, config.c0, config.mu1, config.sigma1, rng,
                           config.denom_floor);
    Mat U0 = gaussian_init(config.c0, V.cols, config.mu2, config.sigma2, rng,
                           config.denom_floor);
    Decomposition dec = factorize_from(V, std::move(T0), std::move(U0), config,
                                       restarts == 1 ? observer : NmfObserver{});
    dec.restart_seed = seed;
    if (!have || dec.objective_trace.back() < best.objective_trace.back()) {
      best = std::move(dec);
      have = true;
    }
  }
  return best;
}

double reconstruction_error(const Mat& V, const Decomposition& dec) {
  if (dec.T.rows != V.rows || dec.U.cols != V.cols)
    throw shape_error("reconstruction_error: factor shapes do not match V");
  const Mat TU = matmul(dec.T, dec.U);
  double num = 0.0;
  for (std::size_t i = 0; i < V.data.size(); ++i) {
    const double d = V.data[i] - TU.data[i];
    num += d * d;
  }
  return std::sqrt(num) / std::max(frobenius_norm(V), dec.config.denom_floor);
}

std::string matrix_content_hash(const Mat& m) {
  std::string bytes;
  bytes.reserve(16 + m.data.size() * sizeof(double));
  const std::uint64_t dims[2] = {m.rows, m.cols};
  bytes.append(reinterpret_cast<const char*>(dims), sizeof(dims));
  bytes.append(reinterpret_cast<const char*>(m.data.data()),
               m.data.size() * sizeof(double));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

namespace {

nlohmann::ordered_json mat_to_json(const Mat& m) {
  nlohmann::ordered_json j;
  j["rows"] = m.rows;
  j["cols"] = m.cols;
  j["data"] = m.data;
  return j;
}

Mat mat_from_json(const nlohmann::json& j) {
  Mat m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  m.data = j.at("data").get<std::vector<double>>();
  if (m.data.size() != m.rows * m.cols)
    throw shape_error("decomposition json: matrix element count mismatch");
  return m;
}

}  // namespace

std::string decomposition_to_json(const Decomposition& dec, const Mat& V) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["T"] = mat_to_json(dec.T);
  j["U"] = mat_to_json(dec.U);
  j["objective_trace"] = dec.objective_trace;
  j["config"] = {{"c0", dec.config.c0},
                 {"a0", dec.config.a0},
                 {"mu1", dec.config.mu1},
                 {"sigma1", dec.config.sigma1},
                 {"mu2", dec.config.mu2},
                 {"sigma2", dec.config.sigma2},
                 {"seed", dec.config.seed},
                 {"denom_floor", dec.config.denom_floor},
                 {"restarts", dec.config.restarts}};
  j["restart_seed"] = dec.restart_seed;
  j["v_hash"] = matrix_content_hash(V);
  return j.dump();
}

Decomposition decomposition_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  Decomposition dec;
  dec.T = mat_from_json(j.at("T"));
  dec.U = mat_from_json(j.at("U"));
  dec.objective_trace = j.at("objective_trace").get<std::vector<double>>();
  const auto& c = j.at("config");
  dec.config.c0 = c.at("c0").get<std::size_t>();
  dec.config.a0 = c.at("a0").get<std::size_t>();
  dec.config.mu1 = c.at("mu1").get<double>();
  dec.config.sigma1 = c.at("sigma1").get<double>();
  dec.config.mu2 = c.at("mu2").get<double>();
  dec.config.sigma2 = c.at("sigma2").get<double>();
  dec.config.seed = c.at("seed").get<std::uint64_t>();
  dec.config.denom_floor = c.at("denom_floor").get<double>();
  dec.config.restarts = c.at("restarts").get<std::size_t>();
  dec.restart_seed = j.at("restart_seed").get<std::uint64_t>();
  return dec;
}

void save_decomposition(const Decomposition& dec, const Mat& V, const std::string& path) {
  write_text_file(path, decomposition_to_json(dec, V) + "\n");
}

Decomposition load_decomposition(const std::string& path) {
  return decomposition_from_json(read_text_file(path));
}

}  // namespace ntd
