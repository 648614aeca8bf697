#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gnnctrl/controllers.hpp"
#include "gnnctrl/errors.hpp"
#include "gnnctrl/graph.hpp"
#include "gnnctrl/matrix.hpp"
#include "gnnctrl/rng.hpp"
#include "gnnctrl/serialize.hpp"
#include "gnnctrl/system.hpp"

using namespace gnnctrl;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const char* name) {
  fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Matrix random_matrix(std::size_t r, std::size_t c, RngStream& rng) {
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

void check_same(const Matrix& a, const Matrix& b) {
  REQUIRE(a.rows() == b.rows());
  REQUIRE(a.cols() == b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) CHECK(a(i, j) == b(i, j));
}

DistributedSystem sample_system(std::uint64_t key) {
  RngStream root(3131, key);
  for (std::uint64_t attempt = 0;; ++attempt) {
    RngStream r = root.substream(attempt);
    Graph g = generate_geometric_graph(8, 2, r);
    if (!is_connected(g)) continue;
    RngStream sys = root.substream(500 + attempt);
    return generate_system(g, 0.9, 1.1, sys);
  }
}

}  // namespace

TEST_CASE("format_double parses back to the identical bits") {
  const double values[] = {0.0,
                           1.0,
                           -1.0,
                           0.1,
                           1.0 / 3.0,
                           3.141592653589793,
                           1e-300,
                           -2.2250738585072014e-308,
                           4.9406564584124654e-324,
                           1.7976931348623157e308,
                           123456.789012345678,
                           -7.0 / 11.0};
  for (double v : values) {
    std::string s = format_double(v);
    double back = std::strtod(s.c_str(), nullptr);
    CHECK(back == v);
  }
  // Signed zero keeps its sign through the text form.
  CHECK(std::signbit(std::strtod(format_double(-0.0).c_str(), nullptr)));
  CHECK(std::strtod(format_double(
            std::numeric_limits<double>::infinity()).c_str(), nullptr) ==
        std::numeric_limits<double>::infinity());
  CHECK(std::isnan(std::strtod(
      format_double(std::nan("")).c_str(), nullptr)));
}

TEST_CASE("fnv1a matches the published reference vectors") {
  CHECK(fnv1a_hash("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a_hash("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a_hash("foobar") == 0x85944171f73967e8ULL);
  CHECK(fnv1a_hash("x") != fnv1a_hash("y"));
}

TEST_CASE("matrix json round trip is bitwise") {
  RngStream rng(41, 0);
  Matrix m = random_matrix(5, 3, rng);
  m(2, 1) = -0.0;
  m(0, 0) = 1e-300;
  Matrix back = matrix_from_json(matrix_to_json(m));
  check_same(m, back);
  CHECK(std::signbit(back(2, 1)));
}

TEST_CASE("graph json round trip keeps edges and positions") {
  RngStream rng(42, 1);
  Graph g = generate_geometric_graph(10, 3, rng);
  Graph back = graph_from_json(graph_to_json(g));
  CHECK(back.n == g.n);
  REQUIRE(back.edges == g.edges);
  check_same(back.positions, g.positions);

  Graph bare;
  bare.n = 3;
  bare.edges = {{0, 1}, {1, 2}};
  Graph bare_back = graph_from_json(graph_to_json(bare));
  CHECK(bare_back.n == 3);
  CHECK(bare_back.edges == bare.edges);
  CHECK(!bare_back.has_positions());
}

TEST_CASE("system json round trip keeps every component") {
  DistributedSystem d = sample_system(0);
  DistributedSystem back = system_from_json(system_to_json(d));
  check_same(back.support, d.support);
  check_same(back.sys_graph, d.sys_graph);
  check_same(back.ctrl_graph, d.ctrl_graph);
  check_same(back.sys_feat, d.sys_feat);
  check_same(back.ctrl_feat, d.ctrl_feat);
  CHECK(system_distance(d, back) == 0.0);
}

TEST_CASE("gnn json round trip keeps taps, interval and nonlinearity") {
  RngStream rng(43, 2);
  GnnParams p = make_gnn({{1, 4, 3}, {4, 1, 0}}, {-0.8, 1.0},
                         Nonlinearity::Tanh, rng);
  GnnParams back = gnn_from_json(gnn_to_json(p));
  REQUIRE(back.layers.size() == p.layers.size());
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    CHECK(back.layers[l].lambda_lo == p.layers[l].lambda_lo);
    CHECK(back.layers[l].lambda_hi == p.layers[l].lambda_hi);
    REQUIRE(back.layers[l].taps.size() == p.layers[l].taps.size());
    for (std::size_t k = 0; k < p.layers[l].taps.size(); ++k)
      check_same(back.layers[l].taps[k], p.layers[l].taps[k]);
  }
  CHECK(back.nonlinearity == p.nonlinearity);
  CHECK(back.apply_nonlin_on_last == p.apply_nonlin_on_last);

  GnnParams lin = p;
  lin.nonlinearity = Nonlinearity::Identity;
  CHECK(gnn_from_json(gnn_to_json(lin)).nonlinearity ==
        Nonlinearity::Identity);
}

TEST_CASE("controller json round trip reproduces the control law") {
  DistributedSystem d = sample_system(1);
  CostSpec cost = make_cost_spec(Matrix::identity(1), Matrix::identity(1));
  RngStream rng(44, 3);
  Matrix x = random_matrix(d.n_nodes(), 1, rng);
  auto interval = default_interval({d.support});

  std::vector<std::unique_ptr<Controller>> ctrls;
  ctrls.push_back(make_optimal_controller(d, cost));
  ctrls.push_back(make_open_loop_controller(1));
  {
    RngStream r = rng.substream(1);
    ctrls.push_back(make_gnn_controller(
        make_gnn({{1, 3, 2}, {3, 1, 0}}, interval, Nonlinearity::Tanh, r)));
  }
  {
    RngStream r = rng.substream(2);
    ctrls.push_back(make_gf_controller({{1, 1, 3}}, interval, r));
  }
  {
    RngStream r = rng.substream(3);
    ctrls.push_back(make_mlp_controller(d.n_nodes(), 2, r));
  }
  {
    RngStream r = rng.substream(4);
    ctrls.push_back(make_dmlp_controller(d.n_nodes(), 4, r));
  }

  for (const auto& ctrl : ctrls) {
    CAPTURE(ctrl->kind());
    auto back = controller_from_json(controller_to_json(*ctrl));
    CHECK(back->kind() == ctrl->kind());
    CHECK(back->parameter_count() == ctrl->parameter_count());
    CHECK(back->trainable() == ctrl->trainable());
    check_same(back->evaluate(x, d.support), ctrl->evaluate(x, d.support));
    if (ctrl->trainable()) {
      auto a = ctrl->parameters();
      auto b = back->parameters();
      REQUIRE(a.size() == b.size());
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    }
  }
}

TEST_CASE("controller json rejects unknown kinds") {
  nlohmann::json j;
  j["kind"] = "pid";
  CHECK_THROWS_AS(controller_from_json(j), InvalidArgumentError);
}

TEST_CASE("json files round trip through disk") {
  fs::path dir = fresh_dir("gnnctrl_serialize_json");
  DistributedSystem d = sample_system(2);
  nlohmann::json j = system_to_json(d);
  write_json_file(dir / "sys.json", j);
  nlohmann::json back = read_json_file(dir / "sys.json");
  CHECK(back == j);
  DistributedSystem d2 = system_from_json(back);
  CHECK(system_distance(d, d2) == 0.0);
  CHECK_THROWS_AS(read_json_file(dir / "absent.json"), InvalidArgumentError);
}

TEST_CASE("key=value files ignore comments and keep order") {
  fs::path dir = fresh_dir("gnnctrl_serialize_kv");
  {
    std::ofstream out(dir / "run.cfg");
    out << "# a leading comment\n";
    out << "\n";
    out << "n_nodes = 20\n";
    out << "lr=0.05  # trailing comment\n";
    out << "  penalties = none,size  \n";
  }
  auto pairs = read_key_value_file(dir / "run.cfg");
  REQUIRE(pairs.size() == 3);
  CHECK(pairs[0] == std::pair<std::string, std::string>("n_nodes", "20"));
  CHECK(pairs[1] == std::pair<std::string, std::string>("lr", "0.05"));
  CHECK(pairs[2] ==
        std::pair<std::string, std::string>("penalties", "none,size"));

  {
    std::ofstream out(dir / "bad.cfg");
    out << "just a bare line\n";
  }
  CHECK_THROWS_AS(read_key_value_file(dir / "bad.cfg"), InvalidArgumentError);
  CHECK_THROWS_AS(read_key_value_file(dir / "absent.cfg"),
                  InvalidArgumentError);
}

TEST_CASE("csv writer pins the exact file layout") {
  fs::path dir = fresh_dir("gnnctrl_serialize_csv");
  fs::path file = dir / "table.csv";
  {
    CsvWriter csv(file, {{"code_version", "test"}, {"seed", "7"}},
                  {"name", "value", "note"});
    csv.row({"plain", "1.5", "no quoting needed"});
    csv.row({"comma", "2", "a,b"});
    csv.row({"quote", "3", "say \"hi\""});
    csv.row({"newline", "4", "two\nlines"});
  }
  std::string expected =
      "# code_version=test\n"
      "# seed=7\n"
      "name,value,note\n"
      "plain,1.5,no quoting needed\n"
      "comma,2,\"a,b\"\n"
      "quote,3,\"say \"\"hi\"\"\"\n"
      "newline,4,\"two\nlines\"\n";
  CHECK(slurp(file) == expected);
}

TEST_CASE("csv writer rejects rows of the wrong width") {
  fs::path dir = fresh_dir("gnnctrl_serialize_csv_bad");
  CsvWriter csv(dir / "t.csv", {}, {"a", "b"});
  CHECK_THROWS_AS(csv.row({"only one"}), DimensionError);
  CHECK_THROWS_AS(csv.row({"1", "2", "3"}), DimensionError);
}
