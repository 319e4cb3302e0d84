#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ntd/analysis.hpp"
#include "ntd/attribution.hpp"
#include "ntd/common.hpp"
#include "ntd/datasets.hpp"
#include "ntd/lnn.hpp"
#include "ntd/matrix.hpp"
#include "ntd/nmf.hpp"
#include "ntd/report_svg.hpp"

namespace py = pybind11;
using namespace ntd;

namespace {

Mat mat_from_buffer(py::buffer buf) {
  const py::buffer_info info = buf.request();
  if (info.ndim != 2) throw std::invalid_argument("expected a 2-d array");
  if (info.format != py::format_descriptor<double>::format())
    throw std::invalid_argument("expected a float64 array");
  Mat m(static_cast<std::size_t>(info.shape[0]),
        static_cast<std::size_t>(info.shape[1]));
  const auto* base = static_cast<const char*>(info.ptr);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j)
      m(i, j) = *reinterpret_cast<const double*>(
          base + i * info.strides[0] + j * info.strides[1]);
  return m;
}

}  // namespace

PYBIND11_MODULE(_ntd, m) {
  m.doc() = "Task decomposition of sigmoid feedforward networks via "
            "perturbation attribution and non-negative matrix factorization";
  m.attr("__version__") = kToolVersion;

  py::class_<Mat>(m, "Mat", py::buffer_protocol())
      .def(py::init<std::size_t, std::size_t, double>(), py::arg("rows"),
           py::arg("cols"), py::arg("fill") = 0.0)
      .def(py::init(&mat_from_buffer))
      .def_readonly("rows", &Mat::rows)
      .def_readonly("cols", &Mat::cols)
      .def("__getitem__",
           [](const Mat& mat, std::pair<std::size_t, std::size_t> ij) {
             if (ij.first >= mat.rows || ij.second >= mat.cols)
               throw py::index_error();
             return mat(ij.first, ij.second);
           })
      .def_buffer([](Mat& mat) {
        return py::buffer_info(
            mat.data.data(), sizeof(double),
            py::format_descriptor<double>::format(), 2,
            {mat.rows, mat.cols}, {sizeof(double) * mat.cols, sizeof(double)});
      });

  m.def("matmul", &matmul);
  m.def("transpose", &transpose);
  m.def("hadamard", &hadamard);
  m.def("elementwise_div", &elementwise_div, py::arg("a"), py::arg("b"),
        py::arg("floor") = 1e-12);
  m.def("frobenius_norm", &frobenius_norm);

  py::class_<NetworkParams>(m, "NetworkParams")
      .def(py::init<>())
      .def_readwrite("layer_sizes", &NetworkParams::layer_sizes)
      .def_readwrite("weights", &NetworkParams::weights)
      .def_readwrite("biases", &NetworkParams::biases)
      .def_property_readonly("depth", &NetworkParams::depth)
      .def_property_readonly("input_dim", &NetworkParams::input_dim)
      .def_property_readonly("output_dim", &NetworkParams::output_dim)
      .def_property_readonly("hidden_count", &NetworkParams::hidden_count)
      .def("validate", &NetworkParams::validate)
      .def("to_json", &params_to_json)
      .def_static("from_json", &params_from_json);
  m.def("save_params", &save_params);
  m.def("load_params", &load_params);

  py::class_<Dataset>(m, "Dataset")
      .def(py::init<>())
      .def(py::init([](const Mat& X, const Mat& Y) {
             return Dataset{X, Y};
           }),
           py::arg("X"), py::arg("Y"))
      .def_readwrite("X", &Dataset::X)
      .def_readwrite("Y", &Dataset::Y)
      .def_property_readonly("n", &Dataset::n);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("lambda_", &TrainConfig::lambda)
      .def_readwrite("epsilon1", &TrainConfig::epsilon1)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("eta0", &TrainConfig::eta0)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("shuffle", &TrainConfig::shuffle);

  py::class_<TrainReport>(m, "TrainReport")
      .def_readonly("initial_error", &TrainReport::initial_error)
      .def_readonly("epoch_errors", &TrainReport::epoch_errors)
      .def_readonly("test_error", &TrainReport::test_error)
      .def_readonly("near_zero_weights", &TrainReport::near_zero_weights)
      .def_readonly("diverged", &TrainReport::diverged)
      .def("to_json", &train_report_to_json);

  py::class_<Activations>(m, "Activations")
      .def_readonly("layers", &Activations::layers)
      .def_property_readonly("output", &Activations::output);

  m.def("forward", [](const NetworkParams& p, const std::vector<double>& x) {
    return forward(p, x);
  });
  m.def("forward_dataset", &forward_dataset);
  m.def("training_error", &training_error);
  m.def("sgd_step",
        [](NetworkParams& p, const std::vector<double>& x,
           const std::vector<double>& y, const TrainConfig& cfg, double eta) {
          sgd_step(p, x, y, cfg, eta);
        });
  m.def(
      "train",
      [](const NetworkParams& init, const Dataset& data, const TrainConfig& cfg,
         const Dataset* test) { return train(init, data, cfg, test); },
      py::arg("init"), py::arg("data"), py::arg("config"),
      py::arg("test") = nullptr);
  m.def("init_params", &init_params, py::arg("layer_sizes"), py::arg("seed"),
        py::arg("weight_sigma") = 0.5, py::arg("bias_sigma") = 0.5);

  py::class_<UnitRef>(m, "UnitRef")
      .def_readonly("layer", &UnitRef::layer)
      .def_readonly("index", &UnitRef::index)
      .def("__repr__", [](const UnitRef& u) {
        return "UnitRef(layer=" + std::to_string(u.layer) +
               ", index=" + std::to_string(u.index) + ")";
      });

  py::class_<FeatureMatrix>(m, "FeatureMatrix")
      .def_readonly("V", &FeatureMatrix::V)
      .def_readonly("input_block_width", &FeatureMatrix::input_block_width)
      .def_readonly("unit_index", &FeatureMatrix::unit_index)
      .def_readonly("v_in_raw", &FeatureMatrix::v_in_raw)
      .def_readonly("v_out_raw", &FeatureMatrix::v_out_raw);

  m.def("input_effect", &input_effect);
  m.def("output_effect", &output_effect);
  m.def("build_feature_matrix", &build_feature_matrix, py::arg("params"),
        py::arg("data"), py::arg("threads") = 0);
  m.def("save_feature_matrix", &save_feature_matrix);
  m.def("load_feature_matrix", &load_feature_matrix);

  py::class_<NmfConfig>(m, "NmfConfig")
      .def(py::init<>())
      .def_readwrite("c0", &NmfConfig::c0)
      .def_readwrite("a0", &NmfConfig::a0)
      .def_readwrite("mu1", &NmfConfig::mu1)
      .def_readwrite("sigma1", &NmfConfig::sigma1)
      .def_readwrite("mu2", &NmfConfig::mu2)
      .def_readwrite("sigma2", &NmfConfig::sigma2)
      .def_readwrite("seed", &NmfConfig::seed)
      .def_readwrite("denom_floor", &NmfConfig::denom_floor)
      .def_readwrite("restarts", &NmfConfig::restarts);

  py::class_<Decomposition>(m, "Decomposition")
      .def_readonly("T", &Decomposition::T)
      .def_readonly("U", &Decomposition::U)
      .def_readonly("objective_trace", &Decomposition::objective_trace)
      .def_readonly("config", &Decomposition::config)
      .def_readonly("restart_seed", &Decomposition::restart_seed);

  m.def("factorize",
        [](const Mat& V, const NmfConfig& cfg) { return factorize(V, cfg); });
  m.def("factorize_from", [](const Mat& V, const Mat& T0, const Mat& U0,
                             const NmfConfig& cfg) {
    return factorize_from(V, T0, U0, cfg);
  });
  m.def("reconstruction_error", &reconstruction_error);

  py::class_<SyntheticSpec>(m, "SyntheticSpec")
      .def(py::init<>())
      .def_readwrite("blocks", &SyntheticSpec::blocks)
      .def_readwrite("hidden_layers_per_block", &SyntheticSpec::hidden_layers_per_block)
      .def_readwrite("units_per_hidden_layer", &SyntheticSpec::units_per_hidden_layer)
      .def_readwrite("inputs_per_block", &SyntheticSpec::inputs_per_block)
      .def_readwrite("outputs_per_block", &SyntheticSpec::outputs_per_block)
      .def_readwrite("prune_threshold", &SyntheticSpec::prune_threshold)
      .def_readwrite("input_sigma", &SyntheticSpec::input_sigma)
      .def_readwrite("noise_sigma", &SyntheticSpec::noise_sigma)
      .def_readwrite("n_train", &SyntheticSpec::n_train)
      .def_readwrite("n_test", &SyntheticSpec::n_test)
      .def_readwrite("seed", &SyntheticSpec::seed);

  py::class_<GroundTruth>(m, "GroundTruth")
      .def_readonly("input_labels", &GroundTruth::input_labels)
      .def_readonly("hidden_labels", &GroundTruth::hidden_labels)
      .def_readonly("output_labels", &GroundTruth::output_labels);

  py::class_<SyntheticProblem>(m, "SyntheticProblem")
      .def_readonly("teacher", &SyntheticProblem::teacher)
      .def_readonly("train", &SyntheticProblem::train)
      .def_readonly("test", &SyntheticProblem::test)
      .def_readonly("truth", &SyntheticProblem::truth)
      .def_readonly("seed_used", &SyntheticProblem::seed_used);

  m.def("gen_synthetic", &gen_synthetic);
  m.def("window_csv", &window_csv, py::arg("path"), py::arg("input_columns"),
        py::arg("target_columns"), py::arg("window"), py::arg("horizon") = 1);

  py::enum_<DiagramClass>(m, "DiagramClass")
      .value("rectangle", DiagramClass::rectangle)
      .value("cross", DiagramClass::cross)
      .value("line", DiagramClass::line)
      .value("two_lines", DiagramClass::two_lines)
      .value("triangle", DiagramClass::triangle)
      .value("diamond", DiagramClass::diamond)
      .value("arrow", DiagramClass::arrow)
      .value("ribbon", DiagramClass::ribbon)
      .value("heart", DiagramClass::heart)
      .value("face", DiagramClass::face);

  py::class_<DiagramDataset>(m, "DiagramDataset")
      .def_readonly("data", &DiagramDataset::data)
      .def_readonly("classes", &DiagramDataset::classes)
      .def_readonly("size", &DiagramDataset::size);

  m.def("gen_diagrams", &gen_diagrams, py::arg("classes"),
        py::arg("per_class"), py::arg("size") = 20, py::arg("seed") = 1);

  py::class_<WindowedDataset>(m, "WindowedDataset")
      .def_readonly("data", &WindowedDataset::data)
      .def_readonly("window", &WindowedDataset::window)
      .def_readonly("horizon", &WindowedDataset::horizon);

  py::class_<CommunityAssignment>(m, "CommunityAssignment")
      .def_readonly("labels", &CommunityAssignment::labels)
      .def_readonly("soft", &CommunityAssignment::soft)
      .def_readonly("members", &CommunityAssignment::members);

  m.def("assign_communities",
        [](const Decomposition& dec) { return assign_communities(dec); });
  m.def("assign_communities_with_units",
        [](const Decomposition& dec, const std::vector<UnitRef>& units) {
          return assign_communities(dec, units);
        });

  py::class_<RecoveryScore>(m, "RecoveryScore")
      .def_readonly("matching", &RecoveryScore::matching)
      .def_readonly("purity", &RecoveryScore::purity)
      .def_readonly("concentrations", &RecoveryScore::concentrations)
      .def_readonly("partial", &RecoveryScore::partial);

  m.def("score_recovery", &score_recovery);
  m.def("task_importance", &task_importance);

  m.def("render_report_svg", [](const Mat& U, std::size_t i0, const std::string& layout) {
    return render_report_svg(U, i0, parse_report_layout(layout));
  });
}
