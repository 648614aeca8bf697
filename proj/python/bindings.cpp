#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "gnnctrl/controllers.hpp"
#include "gnnctrl/errors.hpp"
#include "gnnctrl/experiments.hpp"
#include "gnnctrl/filters.hpp"
#include "gnnctrl/gnn.hpp"
#include "gnnctrl/graph.hpp"
#include "gnnctrl/matrix.hpp"
#include "gnnctrl/rng.hpp"
#include "gnnctrl/serialize.hpp"
#include "gnnctrl/simulate.hpp"
#include "gnnctrl/stability.hpp"
#include "gnnctrl/system.hpp"
#include "gnnctrl/train.hpp"
#include "gnnctrl/verify.hpp"

namespace py = pybind11;
using namespace gnnctrl;

namespace {

Matrix matrix_from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw InvalidArgumentError("matrix needs at least one row");
  std::size_t cols = rows.front().size();
  std::vector<double> data;
  data.reserve(rows.size() * cols);
  for (const auto& r : rows) {
    if (r.size() != cols)
      throw InvalidArgumentError("ragged rows in matrix literal");
    data.insert(data.end(), r.begin(), r.end());
  }
  return Matrix(rows.size(), cols, std::move(data));
}

Matrix matrix_from_buffer(const py::buffer& b) {
  py::buffer_info info = b.request();
  if (info.ndim != 2) throw InvalidArgumentError("matrix buffer must be 2-D");
  if (info.format != py::format_descriptor<double>::format())
    throw InvalidArgumentError("matrix buffer must hold float64");
  auto rows = static_cast<std::size_t>(info.shape[0]);
  auto cols = static_cast<std::size_t>(info.shape[1]);
  Matrix m(rows, cols);
  const char* src = static_cast<const char*>(info.ptr);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      double v;
      std::memcpy(&v,
                  src + static_cast<std::size_t>(info.strides[0]) * i +
                      static_cast<std::size_t>(info.strides[1]) * j,
                  sizeof(double));
      m(i, j) = v;
    }
  return m;
}

const GnnParams& require_filter_controller(const Controller& c) {
  const auto* g = dynamic_cast<const GnnController*>(&c);
  if (!g)
    throw InvalidArgumentError(
        "this analysis needs a filter-based controller (gnn or gf)");
  return g->params();
}

Nonlinearity nonlin_from_string(const std::string& name) {
  if (name == "tanh") return Nonlinearity::Tanh;
  if (name == "identity") return Nonlinearity::Identity;
  throw InvalidArgumentError("unknown nonlinearity: " + name);
}

std::vector<GnnLayerSpec> arch_from_tuples(
    const std::vector<std::tuple<std::size_t, std::size_t, std::size_t>>& a) {
  std::vector<GnnLayerSpec> arch;
  arch.reserve(a.size());
  for (const auto& [in, out, order] : a) arch.push_back({in, out, order});
  return arch;
}

}  // namespace

PYBIND11_MODULE(_gnnctrl, m) {
  m.doc() =
      "Distributed graph-filter and GNN controllers for networked "
      "linear-quadratic systems";
  m.attr("code_version") = kCodeVersion;

  py::register_exception<Error>(m, "GnnctrlError", PyExc_RuntimeError);

  py::class_<Matrix>(m, "Matrix", py::buffer_protocol())
      .def(py::init<std::size_t, std::size_t>(), py::arg("rows"),
           py::arg("cols"))
      .def(py::init(&matrix_from_rows), py::arg("rows"))
      .def(py::init(&matrix_from_buffer), py::arg("buffer"))
      .def_buffer([](Matrix& mat) {
        return py::buffer_info(
            mat.data().data(), sizeof(double),
            py::format_descriptor<double>::format(), 2,
            {mat.rows(), mat.cols()},
            {sizeof(double) * mat.cols(), sizeof(double)});
      })
      .def_static("identity", &Matrix::identity, py::arg("n"))
      .def_property_readonly("rows", &Matrix::rows)
      .def_property_readonly("cols", &Matrix::cols)
      .def("__getitem__",
           [](const Matrix& mat, std::pair<std::size_t, std::size_t> ij) {
             if (ij.first >= mat.rows() || ij.second >= mat.cols())
               throw py::index_error();
             return mat(ij.first, ij.second);
           })
      .def("__setitem__",
           [](Matrix& mat, std::pair<std::size_t, std::size_t> ij, double v) {
             if (ij.first >= mat.rows() || ij.second >= mat.cols())
               throw py::index_error();
             mat(ij.first, ij.second) = v;
           })
      .def("to_list",
           [](const Matrix& mat) {
             std::vector<std::vector<double>> out(mat.rows());
             for (std::size_t i = 0; i < mat.rows(); ++i) {
               out[i].resize(mat.cols());
               for (std::size_t j = 0; j < mat.cols(); ++j)
                 out[i][j] = mat(i, j);
             }
             return out;
           })
      .def("transpose", &Matrix::transpose)
      .def("frobenius_norm", &Matrix::frobenius_norm)
      .def("max_abs", &Matrix::max_abs)
      .def("__matmul__",
           [](const Matrix& a, const Matrix& b) { return a * b; })
      .def("__add__",
           [](const Matrix& a, const Matrix& b) { return a + b; })
      .def("__sub__",
           [](const Matrix& a, const Matrix& b) { return a - b; })
      .def("__mul__", [](const Matrix& a, double s) { return a * s; })
      .def("__rmul__", [](const Matrix& a, double s) { return a * s; })
      .def("__repr__", [](const Matrix& mat) {
        return "Matrix(" + std::to_string(mat.rows()) + "x" +
               std::to_string(mat.cols()) + ")";
      });

  m.def("spectral_norm", &spectral_norm, py::arg("m"));
  m.def("inf_norm", &inf_norm, py::arg("m"));
  m.def("l21_norm", &l21_norm, py::arg("m"));
  m.def("solve_linear", &solve_linear, py::arg("a"), py::arg("b"));
  m.def("sym_sqrt", &sym_sqrt, py::arg("m"));
  m.def(
      "sym_eig",
      [](const Matrix& mat) {
        Spectrum s = sym_eig(mat);
        return py::make_tuple(s.values, s.vectors);
      },
      py::arg("m"), "Returns (eigenvalues ascending, eigenvector columns).");

  py::class_<RngStream>(m, "RngStream")
      .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("seed"),
           py::arg("stream_id"))
      .def("substream", &RngStream::substream, py::arg("key"))
      .def("next_u64", &RngStream::next_u64)
      .def("uniform", py::overload_cast<>(&RngStream::uniform))
      .def("normal", &RngStream::normal);

  py::class_<Graph>(m, "Graph")
      .def_readonly("n", &Graph::n)
      .def_readonly("edges", &Graph::edges)
      .def_readonly("positions", &Graph::positions);
  m.def("generate_geometric_graph", &generate_geometric_graph, py::arg("n"),
        py::arg("k"), py::arg("rng"));
  m.def("is_connected", &is_connected, py::arg("g"));
  m.def("build_support", &build_support, py::arg("g"));

  py::class_<DistributedSystem>(m, "DistributedSystem")
      .def_readonly("support", &DistributedSystem::support)
      .def_readonly("sys_graph", &DistributedSystem::sys_graph)
      .def_readonly("sys_feat", &DistributedSystem::sys_feat)
      .def_readonly("ctrl_graph", &DistributedSystem::ctrl_graph)
      .def_readonly("ctrl_feat", &DistributedSystem::ctrl_feat)
      .def_readonly("f_dim", &DistributedSystem::f_dim)
      .def_readonly("g_dim", &DistributedSystem::g_dim)
      .def_property_readonly("n_nodes", &DistributedSystem::n_nodes);
  m.def("generate_system", &generate_system, py::arg("g"), py::arg("a_norm"),
        py::arg("b_norm"), py::arg("rng"), py::arg("f_dim") = 1,
        py::arg("g_dim") = 1);
  m.def("perturb_system", &perturb_system, py::arg("d"), py::arg("eps"),
        py::arg("rng"));
  m.def("system_distance", &system_distance, py::arg("a"), py::arg("b"));

  py::class_<CostSpec>(m, "CostSpec")
      .def_readonly("state_weight", &CostSpec::state_weight)
      .def_readonly("control_weight", &CostSpec::control_weight);
  m.def("make_cost_spec", &make_cost_spec, py::arg("state_weight"),
        py::arg("control_weight"));

  py::class_<RiccatiSolution>(m, "RiccatiSolution")
      .def_readonly("p_mat", &RiccatiSolution::p_mat)
      .def_readonly("gain", &RiccatiSolution::gain)
      .def_readonly("iterations", &RiccatiSolution::iterations)
      .def_readonly("residual", &RiccatiSolution::residual);
  m.def("solve_dare", &solve_dare, py::arg("a"), py::arg("b"), py::arg("q"),
        py::arg("r"));

  py::class_<FilterBank>(m, "FilterBank")
      .def(py::init([](const std::vector<Matrix>& taps, double lo, double hi) {
             FilterBank fb{taps, lo, hi};
             validate_filter_bank(fb);
             return fb;
           }),
           py::arg("taps"), py::arg("lambda_lo") = -1.0,
           py::arg("lambda_hi") = 1.0)
      .def_readonly("taps", &FilterBank::taps)
      .def_readonly("lambda_lo", &FilterBank::lambda_lo)
      .def_readonly("lambda_hi", &FilterBank::lambda_hi);
  m.def("apply_filter", &apply_filter, py::arg("fb"), py::arg("support"),
        py::arg("x"));
  m.def("filter_size", &filter_size, py::arg("fb"));
  m.def("filter_lipschitz", &filter_lipschitz, py::arg("fb"));
  m.def("freq_response", &freq_response, py::arg("fb"), py::arg("f"),
        py::arg("g"), py::arg("lam"));
  m.def("default_interval", &default_interval, py::arg("supports"));

  py::class_<Controller>(m, "Controller")
      .def("evaluate", &Controller::evaluate, py::arg("state"),
           py::arg("support"))
      .def("kind", &Controller::kind)
      .def("parameter_count", &Controller::parameter_count)
      .def("trainable", &Controller::trainable)
      .def("parameters", &Controller::parameters)
      .def("set_parameters",
           [](Controller& c, const std::vector<double>& flat) {
             c.set_parameters(flat);
           })
      .def("clone", &Controller::clone);

  m.def(
      "optimal_controller",
      [](const DistributedSystem& d, const CostSpec& cost) {
        return std::unique_ptr<Controller>(make_optimal_controller(d, cost));
      },
      py::arg("d"), py::arg("cost"));
  m.def(
      "open_loop_controller",
      [](std::size_t g_dim) {
        return std::unique_ptr<Controller>(make_open_loop_controller(g_dim));
      },
      py::arg("g_dim") = 1);
  m.def(
      "gnn_controller",
      [](const std::vector<std::tuple<std::size_t, std::size_t, std::size_t>>&
             arch,
         std::pair<double, double> interval, const std::string& nonlinearity,
         RngStream& rng) {
        return std::unique_ptr<Controller>(make_gnn_controller(
            make_gnn(arch_from_tuples(arch), interval,
                     nonlin_from_string(nonlinearity), rng)));
      },
      py::arg("arch"), py::arg("interval"), py::arg("nonlinearity"),
      py::arg("rng"),
      "arch is a list of (in, out, order); nonlinearity 'tanh' or "
      "'identity'.");
  m.def(
      "gf_controller",
      [](const std::vector<std::tuple<std::size_t, std::size_t, std::size_t>>&
             arch,
         std::pair<double, double> interval, RngStream& rng) {
        return std::unique_ptr<Controller>(
            make_gf_controller(arch_from_tuples(arch), interval, rng));
      },
      py::arg("arch"), py::arg("interval"), py::arg("rng"));
  m.def(
      "mlp_controller",
      [](std::size_t n_nodes, std::size_t hidden_factor, RngStream& rng) {
        return std::unique_ptr<Controller>(
            make_mlp_controller(n_nodes, hidden_factor, rng));
      },
      py::arg("n_nodes"), py::arg("hidden_factor"), py::arg("rng"));
  m.def(
      "dmlp_controller",
      [](std::size_t n_nodes, std::size_t hidden, RngStream& rng) {
        return std::unique_ptr<Controller>(
            make_dmlp_controller(n_nodes, hidden, rng));
      },
      py::arg("n_nodes"), py::arg("hidden"), py::arg("rng"));

  m.def("controller_to_json_string",
        [](const Controller& c) { return controller_to_json(c).dump(); });
  m.def("controller_from_json_string", [](const std::string& text) {
    return controller_from_json(nlohmann::json::parse(text));
  });

  py::class_<TrajectoryRecord>(m, "TrajectoryRecord")
      .def_readonly("states", &TrajectoryRecord::states)
      .def_readonly("controls", &TrajectoryRecord::controls)
      .def_readonly("step_costs", &TrajectoryRecord::step_costs)
      .def_readonly("state_sizes", &TrajectoryRecord::state_sizes)
      .def_readonly("total_cost", &TrajectoryRecord::total_cost)
      .def_readonly("stable", &TrajectoryRecord::stable)
      .def_readonly("diverged_at", &TrajectoryRecord::diverged_at);
  m.def(
      "rollout",
      [](const DistributedSystem& d, const Controller& ctrl, const Matrix& x0,
         std::size_t horizon, const CostSpec& cost) {
        return rollout(d, ctrl, x0, horizon, cost);
      },
      py::arg("d"), py::arg("ctrl"), py::arg("x0"), py::arg("horizon"),
      py::arg("cost"));
  m.def("classify_stable", &classify_stable, py::arg("record"));

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("train_size", &TrainConfig::train_size)
      .def_readwrite("valid_size", &TrainConfig::valid_size)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("validate_every", &TrainConfig::validate_every)
      .def_readwrite("horizon", &TrainConfig::horizon)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_property(
          "penalty",
          [](const TrainConfig& c) { return penalty_to_string(c.penalty); },
          [](TrainConfig& c, const std::string& name) {
            c.penalty = penalty_from_string(name);
          });

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("best_params", &TrainResult::best_params)
      .def_readonly("best_raw_cost", &TrainResult::best_raw_cost)
      .def_readonly("best_update", &TrainResult::best_update)
      .def_readonly("diverged_trajectories",
                    &TrainResult::diverged_trajectories)
      .def_property_readonly("n_updates", [](const TrainResult& r) {
        return r.batches.size();
      });
  m.def("train", &train, py::arg("ctrl"), py::arg("d"), py::arg("cost"),
        py::arg("config"));

  py::class_<EvalSummary>(m, "EvalSummary")
      .def_readonly("costs", &EvalSummary::costs)
      .def_readonly("stable", &EvalSummary::stable)
      .def_readonly("mean", &EvalSummary::mean)
      .def_readonly("median", &EvalSummary::median)
      .def_readonly("stddev", &EvalSummary::stddev)
      .def_readonly("stable_ratio", &EvalSummary::stable_ratio);
  m.def(
      "evaluate",
      [](const Controller& ctrl, const DistributedSystem& d,
         const CostSpec& cost, const std::vector<Matrix>& states,
         std::size_t horizon, const std::vector<double>& normalizers) {
        return evaluate(ctrl, d, cost, states, horizon,
                        normalizers.empty() ? nullptr : &normalizers);
      },
      py::arg("ctrl"), py::arg("d"), py::arg("cost"), py::arg("states"),
      py::arg("horizon"), py::arg("normalizers") = std::vector<double>{});
  m.def("sample_initial_states", &sample_initial_states, py::arg("count"),
        py::arg("n_nodes"), py::arg("f_dim"), py::arg("rng"));

  py::class_<StabilityReport>(m, "StabilityReport")
      .def_readonly("xi", &StabilityReport::xi)
      .def_readonly("c_phi", &StabilityReport::c_phi)
      .def_readonly("gamma_phi", &StabilityReport::gamma_phi)
      .def_readonly("is_sufficiently_stable",
                    &StabilityReport::is_sufficiently_stable)
      .def_readonly("beta0_per_unit_x0", &StabilityReport::beta0_per_unit_x0)
      .def_readonly("beta1", &StabilityReport::beta1);
  m.def(
      "stability_constant",
      [](const DistributedSystem& d, const Controller& c) {
        return stability_constant(d, require_filter_controller(c));
      },
      py::arg("d"), py::arg("ctrl"));

  py::class_<StabilityChangeReport>(m, "StabilityChangeReport")
      .def_readonly("xi", &StabilityChangeReport::xi)
      .def_readonly("xi_hat", &StabilityChangeReport::xi_hat)
      .def_readonly("distance", &StabilityChangeReport::distance)
      .def_readonly("c_xi_hat", &StabilityChangeReport::c_xi_hat)
      .def_readonly("lhs", &StabilityChangeReport::lhs)
      .def_readonly("rhs", &StabilityChangeReport::rhs)
      .def_readonly("holds", &StabilityChangeReport::holds);
  m.def(
      "stability_change_bound",
      [](const DistributedSystem& d, const DistributedSystem& d_hat,
         const Controller& c) {
        return stability_change_bound(d, d_hat, require_filter_controller(c));
      },
      py::arg("d"), py::arg("d_hat"), py::arg("ctrl"));

  py::class_<DeviationReport>(m, "DeviationReport")
      .def_readonly("xi", &DeviationReport::xi)
      .def_readonly("xi_hat", &DeviationReport::xi_hat)
      .def_readonly("distance", &DeviationReport::distance)
      .def_readonly("c_phi_hat", &DeviationReport::c_phi_hat)
      .def_readonly("empirical", &DeviationReport::empirical)
      .def_readonly("bound", &DeviationReport::bound)
      .def_readonly("max_ratio", &DeviationReport::max_ratio)
      .def_readonly("truncated", &DeviationReport::truncated)
      .def_readonly("uniform_constant", &DeviationReport::uniform_constant);
  m.def(
      "deviation_bound",
      [](const DistributedSystem& d, const DistributedSystem& d_hat,
         const Controller& c, const Matrix& x0, std::size_t horizon) {
        return deviation_bound(d, d_hat, require_filter_controller(c), x0,
                               horizon);
      },
      py::arg("d"), py::arg("d_hat"), py::arg("ctrl"), py::arg("x0"),
      py::arg("horizon"));

  py::class_<IssResult>(m, "IssResult")
      .def_readonly("xi", &IssResult::xi)
      .def_readonly("beta0", &IssResult::beta0)
      .def_readonly("beta1", &IssResult::beta1)
      .def_readonly("lhs", &IssResult::lhs)
      .def_readonly("rhs", &IssResult::rhs)
      .def_readonly("holds", &IssResult::holds);
  m.def(
      "iss_check",
      [](const DistributedSystem& d, const Controller& c, const Matrix& x0,
         const std::vector<Matrix>& disturbance, std::size_t horizon) {
        Disturbance dist{disturbance};
        return iss_check(d, require_filter_controller(c), x0, dist, horizon);
      },
      py::arg("d"), py::arg("ctrl"), py::arg("x0"), py::arg("disturbance"),
      py::arg("horizon"));

  py::class_<CampaignResult>(m, "CampaignResult")
      .def_readonly("name", &CampaignResult::name)
      .def_readonly("instances", &CampaignResult::instances)
      .def_readonly("failures", &CampaignResult::failures)
      .def_readonly("detail", &CampaignResult::detail)
      .def_property_readonly("passed", &CampaignResult::passed);
  m.def(
      "run_verify_campaigns",
      [](std::uint64_t seed) {
        VerifyOptions opt;
        opt.seed = seed;
        return run_verify_campaigns(opt);
      },
      py::arg("seed") = 7);

  m.def(
      "run_experiment",
      [](const std::vector<std::pair<std::string, std::string>>& pairs) {
        return run_experiment(config_from_pairs(pairs, desk_config()));
      },
      py::arg("pairs"),
      "Runs one experiment from key=value override pairs on the desk "
      "preset; returns the process exit code.");
  m.def(
      "config_hash",
      [](const std::vector<std::pair<std::string, std::string>>& pairs) {
        return config_hash_hex(config_from_pairs(pairs, desk_config()));
      },
      py::arg("pairs"));
}
