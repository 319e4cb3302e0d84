#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ntd/analysis.hpp"
#include "ntd/attribution.hpp"
#include "ntd/common.hpp"
#include "ntd/datasets.hpp"
#include "ntd/io_util.hpp"
#include "ntd/lnn.hpp"
#include "ntd/manifest.hpp"
#include "ntd/nmf.hpp"
#include "ntd/report_svg.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

class Stopwatch {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::vector<std::size_t> parse_layers(const std::string& text) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    const std::string tok = text.substr(pos, comma - pos);
    if (tok.empty()) throw std::invalid_argument("bad --layers value: '" + text + "'");
    out.push_back(std::stoul(tok));
    pos = comma + 1;
    if (comma == text.size()) break;
  }
  return out;
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    out.push_back(text.substr(pos, comma - pos));
    pos = comma + 1;
    if (comma == text.size()) break;
  }
  return out;
}

ordered_json scalers_json(const std::vector<ntd::ColumnScaler>& scalers) {
  auto arr = ordered_json::array();
  for (const auto& s : scalers) arr.push_back({{"min", s.min}, {"max", s.max}});
  return arr;
}

// --- gen ---

struct GenSyntheticArgs {
  std::string out;
  ntd::SyntheticSpec spec;
};

int run_gen_synthetic(const GenSyntheticArgs& a) {
  Stopwatch watch;
  const ntd::SyntheticProblem prob = ntd::gen_synthetic(a.spec);

  fs::create_directories(a.out);
  ntd::save_params(prob.teacher, a.out + "/teacher.json");

  ordered_json manifest;
  manifest["schema_version"] = 1;
  manifest["kind"] = "synthetic";
  manifest["seed"] = a.spec.seed;
  manifest["seed_used"] = prob.seed_used;
  manifest["blocks"] = a.spec.blocks;
  manifest["hidden_layers_per_block"] = a.spec.hidden_layers_per_block;
  manifest["units_per_hidden_layer"] = a.spec.units_per_hidden_layer;
  manifest["inputs_per_block"] = a.spec.inputs_per_block;
  manifest["outputs_per_block"] = a.spec.outputs_per_block;
  manifest["prune_threshold"] = a.spec.prune_threshold;
  manifest["input_sigma"] = a.spec.input_sigma;
  manifest["noise_sigma"] = a.spec.noise_sigma;
  manifest["teacher"] = "teacher.json";
  manifest["ground_truth"] = {{"inputs", prob.truth.input_labels},
                              {"hidden", prob.truth.hidden_labels},
                              {"outputs", prob.truth.output_labels}};
  ntd::save_dataset_dir(a.out, prob.train, manifest.dump());

  std::map<std::string, std::string> outputs = {
      {"X.csv", a.out + "/X.csv"},
      {"Y.csv", a.out + "/Y.csv"},
      {"dataset.json", a.out + "/dataset.json"},
      {"teacher.json", a.out + "/teacher.json"}};
  if (a.spec.n_test > 0) {
    ordered_json tmanifest;
    tmanifest["schema_version"] = 1;
    tmanifest["kind"] = "synthetic-test";
    tmanifest["seed"] = a.spec.seed;
    ntd::save_dataset_dir(a.out + "/test", prob.test, tmanifest.dump());
    outputs["test/X.csv"] = a.out + "/test/X.csv";
    outputs["test/Y.csv"] = a.out + "/test/Y.csv";
  }

  ordered_json cfg;
  cfg["seed"] = a.spec.seed;
  cfg["blocks"] = a.spec.blocks;
  cfg["n_train"] = a.spec.n_train;
  cfg["n_test"] = a.spec.n_test;
  ntd::RunManifest rm = ntd::RunManifest::load_or_new(a.out);
  rm.record_stage("gen-synthetic", cfg.dump(), {}, outputs, watch.ms());
  rm.save();
  std::printf("gen synthetic: %zu train / %zu test samples, i0=%zu j0=%zu k0=%zu -> %s\n",
              prob.train.n(), prob.test.n(), prob.teacher.input_dim(),
              prob.teacher.output_dim(), prob.teacher.hidden_count(), a.out.c_str());
  return 0;
}

struct GenDiagramsArgs {
  std::string out;
  std::string classes = "";
  std::size_t per_class = 50;
  std::size_t size = 20;
  std::uint64_t seed = 1;
  std::size_t pgm = 0;
};

int run_gen_diagrams(const GenDiagramsArgs& a) {
  Stopwatch watch;
  std::vector<ntd::DiagramClass> classes;
  if (a.classes.empty()) {
    classes = ntd::all_diagram_classes();
  } else {
    for (const auto& name : split_commas(a.classes))
      classes.push_back(ntd::diagram_class_from_name(name));
  }
  const ntd::DiagramDataset ds = ntd::gen_diagrams(classes, a.per_class, a.size, a.seed);

  fs::create_directories(a.out);
  ordered_json manifest;
  manifest["schema_version"] = 1;
  manifest["kind"] = "diagrams";
  manifest["seed"] = a.seed;
  manifest["size"] = a.size;
  manifest["per_class"] = a.per_class;
  auto names = ordered_json::array();
  for (auto c : classes) names.push_back(ntd::diagram_class_name(c));
  manifest["classes"] = std::move(names);
  ntd::save_dataset_dir(a.out, ds.data, manifest.dump());

  if (a.pgm > 0) {
    fs::create_directories(a.out + "/pgm");
    for (std::size_t ci = 0; ci < classes.size(); ++ci) {
      for (std::size_t k = 0; k < std::min(a.pgm, a.per_class); ++k) {
        const std::size_t row = ci * a.per_class + k;
        std::vector<double> img(ds.data.X.row(row), ds.data.X.row(row) + a.size * a.size);
        ntd::write_pgm(a.out + "/pgm/" + ntd::diagram_class_name(classes[ci]) + "_" +
                           std::to_string(k) + ".pgm",
                       img, a.size, a.size);
      }
    }
  }

  ordered_json cfg;
  cfg["seed"] = a.seed;
  cfg["per_class"] = a.per_class;
  cfg["size"] = a.size;
  ntd::RunManifest rm = ntd::RunManifest::load_or_new(a.out);
  rm.record_stage("gen-diagrams", cfg.dump(), {},
                  {{"X.csv", a.out + "/X.csv"},
                   {"Y.csv", a.out + "/Y.csv"},
                   {"dataset.json", a.out + "/dataset.json"}},
                  watch.ms());
  rm.save();
  std::printf("gen diagrams: %zu samples of %zu classes, i0=%zu -> %s\n",
              ds.data.n(), classes.size(), ds.data.X.cols, a.out.c_str());
  return 0;
}

struct GenWindowArgs {
  std::string out, csv, inputs, targets;
  std::size_t window = 0;
  std::size_t horizon = 1;
};

int run_gen_window(const GenWindowArgs& a) {
  Stopwatch watch;
  const ntd::WindowedDataset ds = ntd::window_csv(
      a.csv, split_commas(a.inputs), split_commas(a.targets), a.window, a.horizon);

  ordered_json manifest;
  manifest["schema_version"] = 1;
  manifest["kind"] = "window";
  manifest["source_csv"] = a.csv;
  manifest["input_columns"] = ds.input_columns;
  manifest["target_columns"] = ds.target_columns;
  manifest["window"] = ds.window;
  manifest["horizon"] = ds.horizon;
  manifest["input_scalers"] = scalers_json(ds.input_scalers);
  manifest["target_scalers"] = scalers_json(ds.target_scalers);
  ntd::save_dataset_dir(a.out, ds.data, manifest.dump());

  ordered_json cfg;
  cfg["window"] = a.window;
  cfg["horizon"] = a.horizon;
  ntd::RunManifest rm = ntd::RunManifest::load_or_new(a.out);
  rm.record_stage("gen-window", cfg.dump(), {{"source", a.csv}},
                  {{"X.csv", a.out + "/X.csv"},
                   {"Y.csv", a.out + "/Y.csv"},
                   {"dataset.json", a.out + "/dataset.json"}},
                  watch.ms());
  rm.save();
  std::printf("gen window: %zu samples, i0=%zu j0=%zu -> %s\n", ds.data.n(),
              ds.data.X.cols, ds.data.Y.cols, a.out.c_str());
  return 0;
}

// --- train ---

struct TrainArgs {
  std::string data, out, layers, init;
  ntd::TrainConfig config;
  double weight_sigma = 0.5;
  double bias_sigma = 0.5;
};

int run_train(const TrainArgs& a) {
  Stopwatch watch;
  ntd::check_against_manifest(a.data + "/X.csv");
  ntd::check_against_manifest(a.data + "/Y.csv");
  const ntd::LoadedDataset loaded = ntd::load_dataset_dir(a.data);

  if (a.layers.empty() == a.init.empty())
    throw std::invalid_argument("train: give exactly one of --layers or --init");
  ntd::NetworkParams init;
  if (!a.layers.empty()) {
    const auto sizes = parse_layers(a.layers);
    if (sizes.size() < 3)
      throw std::invalid_argument("train: --layers needs at least 3 layers");
    if (sizes.front() != loaded.data.X.cols || sizes.back() != loaded.data.Y.cols)
      throw std::invalid_argument(
          "train: --layers ends " + std::to_string(sizes.front()) + ".." +
          std::to_string(sizes.back()) + " but dataset has i0=" +
          std::to_string(loaded.data.X.cols) + " j0=" +
          std::to_string(loaded.data.Y.cols));
    init = ntd::init_params(sizes, a.config.seed, a.weight_sigma, a.bias_sigma);
  } else {
    ntd::check_against_manifest(a.init);
    init = ntd::load_params(a.init);
    if (init.input_dim() != loaded.data.X.cols || init.output_dim() != loaded.data.Y.cols)
      throw std::invalid_argument("train: --init network dims do not match dataset");
  }

  ntd::Dataset test;
  bool have_test = fs::exists(a.data + "/test/X.csv");
  if (have_test) test = ntd::load_dataset_dir(a.data + "/test").data;

  fs::create_directories(a.out);
  ntd::TrainReport report;
  ntd::NetworkParams trained;
  int code = 0;
  try {
    auto [params, rep] =
        ntd::train(init, loaded.data, a.config, have_test ? &test : nullptr);
    trained = std::move(params);
    report = std::move(rep);
  } catch (const ntd::diverged_error& e) {
    report = e.report();
    ntd::write_text_file(a.out + "/train_report.json",
                         ntd::train_report_to_json(report) + "\n");
    std::fprintf(stderr, "error: %s (partial report written)\n", e.what());
    return 1;
  }
  ntd::save_params(trained, a.out + "/model.json");
  ntd::write_text_file(a.out + "/train_report.json",
                       ntd::train_report_to_json(report) + "\n");

  ordered_json cfg;
  cfg["lambda"] = a.config.lambda;
  cfg["epsilon1"] = a.config.epsilon1;
  cfg["epochs"] = a.config.epochs;
  cfg["eta0"] = a.config.eta0;
  cfg["seed"] = a.config.seed;
  cfg["shuffle"] = a.config.shuffle;
  if (!a.layers.empty()) cfg["layers"] = a.layers;
  std::map<std::string, std::string> inputs = {{"X.csv", a.data + "/X.csv"},
                                               {"Y.csv", a.data + "/Y.csv"}};
  if (!a.init.empty()) inputs["init"] = a.init;
  ntd::RunManifest rm = ntd::RunManifest::load_or_new(a.out);
  rm.record_stage("train", cfg.dump(), inputs,
                  {{"model.json", a.out + "/model.json"},
                   {"train_report.json", a.out + "/train_report.json"}},
                  watch.ms());
  rm.save();
  std::string test_note;
  if (report.test_error)
    test_note = " (test " + std::to_string(*report.test_error) + ")";
  std::printf("train: E %.6f -> %.6f over %zu epochs%s -> %s\n",
              report.initial_error,
              report.epoch_errors.empty() ? report.initial_error
                                          : report.epoch_errors.back(),
              a.config.epochs, test_note.c_str(), a.out.c_str());
  return code;
}

// --- decompose ---

struct DecomposeArgs {
  std::string model, data, out;
  ntd::NmfConfig config;
  unsigned threads = 0;
};

int run_decompose(const DecomposeArgs& a) {
  Stopwatch watch;
  ntd::check_against_manifest(a.model);
  ntd::check_against_manifest(a.data + "/X.csv");
  const ntd::NetworkParams params = ntd::load_params(a.model);
  const ntd::LoadedDataset loaded = ntd::load_dataset_dir(a.data);
  if (params.input_dim() != loaded.data.X.cols ||
      params.output_dim() != loaded.data.Y.cols)
    throw std::invalid_argument("decompose: model dims do not match dataset");

  const ntd::FeatureMatrix fm =
      ntd::build_feature_matrix(params, loaded.data, a.threads);
  for (std::size_t k = 0; k < fm.V.rows; ++k) {
    for (std::size_t c = 0; c < fm.V.cols; ++c) {
      if (!std::isfinite(fm.V(k, c))) {
        std::fprintf(stderr,
                     "error: non-finite feature value at unit %zu (layer %zu)\n",
                     fm.unit_index[k].index, fm.unit_index[k].layer);
        return 1;
      }
    }
  }

  fs::create_directories(a.out);
  ntd::save_feature_matrix(fm, a.out + "/V.csv", a.out + "/V.json");

  const ntd::Decomposition dec = ntd::factorize(fm.V, a.config);
  ntd::save_decomposition(dec, fm.V, a.out + "/decomposition.json");

  const ntd::CommunityAssignment assign = ntd::assign_communities(dec, fm.unit_index);
  ntd::write_text_file(a.out + "/assignment.json",
                       ntd::assignment_to_json(assign) + "\n");
  ntd::write_text_file(a.out + "/assignment.csv",
                       ntd::assignment_to_csv(assign, fm.unit_index));

  ordered_json cfg;
  cfg["tasks"] = a.config.c0;
  cfg["iters"] = a.config.a0;
  cfg["seed"] = a.config.seed;
  cfg["restarts"] = a.config.restarts;
  cfg["denom_floor"] = a.config.denom_floor;
  ntd::RunManifest rm = ntd::RunManifest::load_or_new(a.out);
  rm.record_stage("decompose", cfg.dump(),
                  {{"model", a.model},
                   {"X.csv", a.data + "/X.csv"},
                   {"Y.csv", a.data + "/Y.csv"}},
                  {{"V.csv", a.out + "/V.csv"},
                   {"V.json", a.out + "/V.json"},
                   {"decomposition.json", a.out + "/decomposition.json"},
                   {"assignment.json", a.out + "/assignment.json"},
                   {"assignment.csv", a.out + "/assignment.csv"}},
                  watch.ms());
  rm.save();
  std::printf("decompose: V %zux%zu, c0=%zu, final objective %.6g -> %s\n",
              fm.V.rows, fm.V.cols, a.config.c0, dec.objective_trace.back(),
              a.out.c_str());
  return 0;
}

// --- report ---

struct ReportArgs {
  std::string decomposition, layout = "bar", out;
  std::size_t input_width = 0;
};

int run_report(const ReportArgs& a) {
  Stopwatch watch;
  ntd::check_against_manifest(a.decomposition);
  const ntd::Decomposition dec = ntd::load_decomposition(a.decomposition);

  std::size_t i0 = a.input_width;
  if (i0 == 0) {
    const auto sidecar = fs::path(a.decomposition).parent_path() / "V.json";
    if (!fs::exists(sidecar))
      throw std::invalid_argument(
          "report: no V.json next to the decomposition; pass --input-width");
    const auto j = nlohmann::json::parse(ntd::read_text_file(sidecar.string()));
    i0 = j.at("i0").get<std::size_t>();
  }
  if (i0 >= dec.U.cols)
    throw std::invalid_argument("report: input width covers all of U");

  const ntd::ReportSpec spec = ntd::parse_report_layout(a.layout);
  const std::string svg = ntd::render_report_svg(dec.U, i0, spec);
  const std::string json = ntd::report_to_json(dec.U, i0, spec);
  fs::create_directories(a.out);
  ntd::write_text_file(a.out + "/report.svg", svg);
  ntd::write_text_file(a.out + "/report.json", json + "\n");

  ordered_json cfg;
  cfg["layout"] = a.layout;
  ntd::RunManifest rm = ntd::RunManifest::load_or_new(a.out);
  rm.record_stage("report", cfg.dump(), {{"decomposition", a.decomposition}},
                  {{"report.svg", a.out + "/report.svg"},
                   {"report.json", a.out + "/report.json"}},
                  watch.ms());
  rm.save();
  std::printf("report: %zu tasks, layout %s -> %s\n", dec.U.rows, a.layout.c_str(),
              a.out.c_str());
  return 0;
}

// --- eval ---

struct EvalArgs {
  std::string decomposition, data, out;
};

int run_eval(const EvalArgs& a) {
  Stopwatch watch;
  ntd::check_against_manifest(a.decomposition);
  const ntd::Decomposition dec = ntd::load_decomposition(a.decomposition);
  const auto manifest =
      nlohmann::json::parse(ntd::read_text_file(a.data + "/dataset.json"));
  if (!manifest.contains("ground_truth"))
    throw std::invalid_argument(
        "eval: dataset has no ground_truth (generate with `ntd gen synthetic`)");
  ntd::GroundTruth truth;
  truth.input_labels = manifest["ground_truth"]["inputs"].get<std::vector<int>>();
  truth.hidden_labels = manifest["ground_truth"]["hidden"].get<std::vector<int>>();
  truth.output_labels = manifest["ground_truth"]["outputs"].get<std::vector<int>>();

  const std::size_t i0 = truth.input_labels.size();
  const ntd::CommunityAssignment assign = ntd::assign_communities(dec);
  const ntd::RecoveryScore score = ntd::score_recovery(assign, truth, dec.U, i0);
  const auto importances = ntd::task_importance(dec, i0);

  fs::create_directories(a.out);
  ntd::write_text_file(a.out + "/score.json",
                       ntd::score_to_json(score, importances) + "\n");

  ordered_json cfg = ordered_json::object();
  ntd::RunManifest rm = ntd::RunManifest::load_or_new(a.out);
  rm.record_stage("eval", cfg.dump(),
                  {{"decomposition", a.decomposition},
                   {"dataset.json", a.data + "/dataset.json"}},
                  {{"score.json", a.out + "/score.json"}}, watch.ms());
  rm.save();
  std::printf("eval: purity %.4f, concentrations", score.purity);
  for (double c : score.concentrations) std::printf(" %.4f", c);
  std::printf(" -> %s\n", a.out.c_str());
  return 0;
}

// --- verify ---

struct VerifyArgs {
  std::string run;
};

int run_verify(const VerifyArgs& a) {
  bool ok = true;
  if (fs::exists(a.run + "/manifest.json")) {
    ntd::RunManifest rm = ntd::RunManifest::load_or_new(a.run);
    const auto problems = rm.verify_hashes();
    for (const auto& p : problems) std::printf("[FAIL] %s\n", p.c_str());
    if (problems.empty()) std::printf("[ OK ] manifest hashes\n");
    ok = ok && problems.empty();
  }
  const std::string dpath = a.run + "/decomposition.json";
  if (fs::exists(dpath)) {
    const ntd::Decomposition dec = ntd::load_decomposition(dpath);
    bool nonneg = true;
    for (double v : dec.T.data) nonneg = nonneg && v >= 0.0;
    for (double v : dec.U.data) nonneg = nonneg && v >= 0.0;
    std::printf("[%s] factors non-negative\n", nonneg ? " OK " : "FAIL");
    bool mono = true;
    for (std::size_t i = 1; i < dec.objective_trace.size(); ++i)
      mono = mono && dec.objective_trace[i] <= dec.objective_trace[i - 1] + 1e-9;
    std::printf("[%s] objective trace non-increasing (tol 1e-9)\n",
                mono ? " OK " : "FAIL");
    ok = ok && nonneg && mono;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"non-negative task decomposition of sigmoid feedforward networks"};
  app.set_version_flag("--version", ntd::kToolVersion);
  app.require_subcommand(1);

  std::function<int()> run;

  // gen
  auto* gen = app.add_subcommand("gen", "generate datasets");
  gen->require_subcommand(1);

  GenSyntheticArgs gs;
  auto* gen_syn = gen->add_subcommand("synthetic", "planted-block teacher data");
  gen_syn->add_option("--out", gs.out, "output directory")->required();
  gen_syn->add_option("--seed", gs.spec.seed, "rng seed");
  gen_syn->add_option("--blocks", gs.spec.blocks, "independent blocks");
  gen_syn->add_option("--hidden-layers", gs.spec.hidden_layers_per_block,
                      "hidden layers per block");
  gen_syn->add_option("--units", gs.spec.units_per_hidden_layer,
                      "units per hidden layer per block");
  gen_syn->add_option("--inputs-per-block", gs.spec.inputs_per_block, "");
  gen_syn->add_option("--outputs-per-block", gs.spec.outputs_per_block, "");
  gen_syn->add_option("--prune-threshold", gs.spec.prune_threshold,
                      "teacher weights at or below this are deleted");
  gen_syn->add_option("--input-sigma", gs.spec.input_sigma, "");
  gen_syn->add_option("--noise-sigma", gs.spec.noise_sigma, "");
  gen_syn->add_option("--n-train", gs.spec.n_train, "");
  gen_syn->add_option("--n-test", gs.spec.n_test, "");
  gen_syn->callback([&] { run = [&] { return run_gen_synthetic(gs); }; });

  GenDiagramsArgs gd;
  auto* gen_dia = gen->add_subcommand("diagrams", "parametric stroke images");
  gen_dia->add_option("--out", gd.out, "output directory")->required();
  gen_dia->add_option("--classes", gd.classes, "comma list (default: all 10)");
  gen_dia->add_option("--per-class", gd.per_class, "");
  gen_dia->add_option("--size", gd.size, "image side length");
  gen_dia->add_option("--seed", gd.seed, "");
  gen_dia->add_option("--pgm", gd.pgm, "dump first N images per class as PGM");
  gen_dia->callback([&] { run = [&] { return run_gen_diagrams(gd); }; });

  GenWindowArgs gw;
  auto* gen_win = gen->add_subcommand("window", "sliding windows over a csv");
  gen_win->add_option("--out", gw.out, "output directory")->required();
  gen_win->add_option("--csv", gw.csv, "source csv with header")->required();
  gen_win->add_option("--inputs", gw.inputs, "comma list of input columns")->required();
  gen_win->add_option("--targets", gw.targets, "comma list of target columns")->required();
  gen_win->add_option("--window", gw.window, "lags per input column")->required();
  gen_win->add_option("--horizon", gw.horizon, "rows ahead for the target");
  gen_win->callback([&] { run = [&] { return run_gen_window(gw); }; });

  // train
  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "train a sigmoid network with L1");
  train_cmd->add_option("--data", ta.data, "dataset directory")->required();
  train_cmd->add_option("--out", ta.out, "output directory")->required();
  train_cmd->add_option("--layers", ta.layers, "layer sizes, e.g. 108,40,40,3");
  train_cmd->add_option("--init", ta.init, "warm-start model.json");
  train_cmd->add_option("--lambda", ta.config.lambda, "L1 coefficient");
  train_cmd->add_option("--epsilon1", ta.config.epsilon1, "delta regularizer");
  train_cmd->add_option("--epochs", ta.config.epochs, "mean passes over the data");
  train_cmd->add_option("--eta0", ta.config.eta0, "base learning rate");
  train_cmd->add_option("--seed", ta.config.seed, "");
  train_cmd->add_flag("--shuffle", ta.config.shuffle,
                      "per-epoch permutation instead of sampling with replacement");
  train_cmd->add_option("--weight-sigma", ta.weight_sigma, "init stddev (with --layers)");
  train_cmd->add_option("--bias-sigma", ta.bias_sigma, "init stddev (with --layers)");
  train_cmd->callback([&] { run = [&] { return run_train(ta); }; });

  // decompose
  DecomposeArgs da;
  auto* dec_cmd = app.add_subcommand("decompose",
                                     "feature matrix + NMF + communities");
  dec_cmd->add_option("--model", da.model, "trained model.json")->required();
  dec_cmd->add_option("--data", da.data, "dataset directory")->required();
  dec_cmd->add_option("--out", da.out, "output directory")->required();
  dec_cmd->add_option("--tasks", da.config.c0, "number of tasks c0");
  dec_cmd->add_option("--iters", da.config.a0, "NMF iterations");
  dec_cmd->add_option("--seed", da.config.seed, "");
  dec_cmd->add_option("--mu1", da.config.mu1, "");
  dec_cmd->add_option("--sigma1", da.config.sigma1, "");
  dec_cmd->add_option("--mu2", da.config.mu2, "");
  dec_cmd->add_option("--sigma2", da.config.sigma2, "");
  dec_cmd->add_option("--denom-floor", da.config.denom_floor, "");
  dec_cmd->add_option("--restarts", da.config.restarts, "best-of-r seeds");
  dec_cmd->add_option("--threads", da.threads, "attribution threads (0 = auto)");
  dec_cmd->callback([&] { run = [&] { return run_decompose(da); }; });

  // report
  ReportArgs ra;
  auto* rep_cmd = app.add_subcommand("report", "render task vectors as SVG");
  rep_cmd->add_option("--decomposition", ra.decomposition, "decomposition.json")->required();
  rep_cmd->add_option("--layout", ra.layout, "bar | grid:WxH | series:S:W");
  rep_cmd->add_option("--out", ra.out, "output directory")->required();
  rep_cmd->add_option("--input-width", ra.input_width,
                      "input block width (default: from V.json sidecar)");
  rep_cmd->callback([&] { run = [&] { return run_report(ra); }; });

  // eval
  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "score recovery against ground truth");
  eval_cmd->add_option("--decomposition", ea.decomposition, "decomposition.json")->required();
  eval_cmd->add_option("--data", ea.data, "dataset directory with ground truth")->required();
  eval_cmd->add_option("--out", ea.out, "output directory")->required();
  eval_cmd->callback([&] { run = [&] { return run_eval(ea); }; });

  // verify
  VerifyArgs va;
  auto* ver_cmd = app.add_subcommand("verify", "recheck manifest hashes and invariants");
  ver_cmd->add_option("--run", va.run, "run directory")->required();
  ver_cmd->callback([&] { run = [&] { return run_verify(va); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    return run ? run() : 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
