#include "gnnctrl/serialize.hpp"

#include <cctype>
#include <cstdio>

#include "gnnctrl/errors.hpp"

namespace gnnctrl {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["data"] = std::vector<double>(m.data().begin(), m.data().end());
  return j;
}

Matrix matrix_from_json(const json& j) {
  return Matrix(j.at("rows").get<std::size_t>(),
                j.at("cols").get<std::size_t>(),
                j.at("data").get<std::vector<double>>());
}

json graph_to_json(const Graph& g) {
  json j;
  j["n"] = g.n;
  json edges = json::array();
  for (auto [a, b] : g.edges) edges.push_back({a, b});
  j["edges"] = std::move(edges);
  if (g.has_positions()) j["positions"] = matrix_to_json(g.positions);
  return j;
}

Graph graph_from_json(const json& j) {
  Graph g;
  g.n = j.at("n").get<std::size_t>();
  for (const auto& e : j.at("edges"))
    g.edges.emplace_back(e.at(0).get<std::size_t>(),
                         e.at(1).get<std::size_t>());
  if (j.contains("positions")) g.positions = matrix_from_json(j["positions"]);
  validate_graph(g);
  return g;
}

json system_to_json(const DistributedSystem& d) {
  json j;
  j["f_dim"] = d.f_dim;
  j["g_dim"] = d.g_dim;
  j["support"] = matrix_to_json(d.support);
  j["sys_graph"] = matrix_to_json(d.sys_graph);
  j["sys_feat"] = matrix_to_json(d.sys_feat);
  j["ctrl_graph"] = matrix_to_json(d.ctrl_graph);
  j["ctrl_feat"] = matrix_to_json(d.ctrl_feat);
  return j;
}

DistributedSystem system_from_json(const json& j) {
  DistributedSystem d;
  d.f_dim = j.at("f_dim").get<std::size_t>();
  d.g_dim = j.at("g_dim").get<std::size_t>();
  d.support = matrix_from_json(j.at("support"));
  d.sys_graph = matrix_from_json(j.at("sys_graph"));
  d.sys_feat = matrix_from_json(j.at("sys_feat"));
  d.ctrl_graph = matrix_from_json(j.at("ctrl_graph"));
  d.ctrl_feat = matrix_from_json(j.at("ctrl_feat"));
  validate_system(d);
  return d;
}

json gnn_to_json(const GnnParams& p) {
  json j;
  j["nonlinearity"] =
      p.nonlinearity == Nonlinearity::Tanh ? "tanh" : "identity";
  j["apply_nonlin_on_last"] = p.apply_nonlin_on_last;
  json layers = json::array();
  for (const FilterBank& fb : p.layers) {
    json layer;
    layer["lambda_lo"] = fb.lambda_lo;
    layer["lambda_hi"] = fb.lambda_hi;
    json taps = json::array();
    for (const Matrix& tap : fb.taps) taps.push_back(matrix_to_json(tap));
    layer["taps"] = std::move(taps);
    layers.push_back(std::move(layer));
  }
  j["layers"] = std::move(layers);
  return j;
}

GnnParams gnn_from_json(const json& j) {
  GnnParams p;
  std::string nonlin = j.at("nonlinearity").get<std::string>();
  if (nonlin == "tanh") p.nonlinearity = Nonlinearity::Tanh;
  else if (nonlin == "identity") p.nonlinearity = Nonlinearity::Identity;
  else throw InvalidArgumentError("unknown nonlinearity: " + nonlin);
  p.apply_nonlin_on_last = j.at("apply_nonlin_on_last").get<bool>();
  for (const auto& layer : j.at("layers")) {
    FilterBank fb;
    fb.lambda_lo = layer.at("lambda_lo").get<double>();
    fb.lambda_hi = layer.at("lambda_hi").get<double>();
    for (const auto& tap : layer.at("taps"))
      fb.taps.push_back(matrix_from_json(tap));
    p.layers.push_back(std::move(fb));
  }
  validate_gnn(p);
  return p;
}

json controller_to_json(const Controller& ctrl) {
  json j;
  j["kind"] = ctrl.kind();
  j["format_version"] = 1;
  if (ctrl.kind() == "gnn" || ctrl.kind() == "gf") {
    const auto& gnn = dynamic_cast<const GnnController&>(ctrl);
    j["model"] = gnn_to_json(gnn.params());
  } else if (ctrl.kind() == "mlp") {
    const auto& mlp = dynamic_cast<const MlpController&>(ctrl);
    j["n_nodes"] = mlp.n_nodes();
    j["hidden"] = mlp.hidden_dim();
    j["params"] = mlp.parameters();
  } else if (ctrl.kind() == "dmlp") {
    const auto& dmlp = dynamic_cast<const DmlpController&>(ctrl);
    j["hidden"] = dmlp.hidden_dim();
    j["n_nodes"] = dmlp.n_nodes();
    j["params"] = dmlp.parameters();
  } else if (ctrl.kind() == "optimal") {
    const auto& opt = dynamic_cast<const OptimalController&>(ctrl);
    j["gain"] = matrix_to_json(opt.riccati().gain);
    j["p_mat"] = matrix_to_json(opt.riccati().p_mat);
    j["residual"] = opt.riccati().residual;
    j["iterations"] = opt.riccati().iterations;
  } else if (ctrl.kind() == "open_loop") {
    j["g_dim"] = 1;
  } else {
    throw InvalidArgumentError("unknown controller kind: " + ctrl.kind());
  }
  return j;
}

namespace {

std::unique_ptr<MlpController> mlp_from_json(const json& j) {
  std::vector<double> flat = j.at("params").get<std::vector<double>>();
  std::size_t n = j.at("n_nodes").get<std::size_t>();
  std::size_t hidden = j.at("hidden").get<std::size_t>();
  if (flat.size() != 2 * n * hidden)
    throw DimensionError("mlp parameter blob length mismatch");
  Matrix w1(hidden, n,
            std::vector<double>(flat.begin(), flat.begin() + hidden * n));
  Matrix w2(n, hidden,
            std::vector<double>(flat.begin() + hidden * n, flat.end()));
  return std::make_unique<MlpController>(std::move(w1), std::move(w2));
}

}  // namespace

std::unique_ptr<Controller> controller_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "gnn" || kind == "gf") {
    return std::make_unique<GnnController>(gnn_from_json(j.at("model")), kind);
  }
  if (kind == "mlp") return mlp_from_json(j);
  if (kind == "dmlp") {
    std::size_t n = j.at("n_nodes").get<std::size_t>();
    std::size_t hidden = j.at("hidden").get<std::size_t>();
    std::vector<double> flat = j.at("params").get<std::vector<double>>();
    if (flat.size() != 3 * n * hidden)
      throw DimensionError("dmlp parameter blob length mismatch");
    Matrix w1(n * hidden, 2,
              std::vector<double>(flat.begin(), flat.begin() + 2 * n * hidden));
    Matrix w2(n, hidden,
              std::vector<double>(flat.begin() + 2 * n * hidden, flat.end()));
    return std::make_unique<DmlpController>(std::move(w1), std::move(w2),
                                            hidden);
  }
  if (kind == "optimal") {
    RiccatiSolution sol;
    sol.gain = matrix_from_json(j.at("gain"));
    sol.p_mat = matrix_from_json(j.at("p_mat"));
    sol.residual = j.at("residual").get<double>();
    sol.iterations = j.at("iterations").get<std::size_t>();
    return std::make_unique<OptimalController>(std::move(sol), 1);
  }
  if (kind == "open_loop")
    return std::make_unique<OpenLoopController>(j.at("g_dim").get<std::size_t>());
  throw InvalidArgumentError("unknown controller kind: " + kind);
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InvalidArgumentError("cannot open " + path.string());
  out << j.dump(2) << '\n';
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgumentError("cannot open " + path.string());
  json j;
  in >> j;
  return j;
}

std::vector<std::pair<std::string, std::string>> read_key_value_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgumentError("cannot open " + path.string());
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string line;
  auto trim = [](std::string s) {
    auto issp = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && issp(s.front())) s.erase(s.begin());
    while (!s.empty() && issp(s.back())) s.pop_back();
    return s;
  };
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidArgumentError("missing '=' on line " +
                                 std::to_string(line_no) + " of " +
                                 path.string());
    pairs.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return pairs;
}

std::uint64_t fnv1a_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, std::string>>& metadata,
    const std::vector<std::string>& columns)
    : n_columns_(columns.size()) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  out_.open(path);
  if (!out_) throw InvalidArgumentError("cannot open " + path.string());
  for (const auto& [key, value] : metadata)
    out_ << "# " << key << "=" << value << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i)
    out_ << columns[i] << (i + 1 < columns.size() ? "," : "");
  out_ << "\n";
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != n_columns_)
    throw DimensionError("csv row width mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const std::string& cell = cells[i];
    if (cell.find_first_of(",\"\n") != std::string::npos) {
      out_ << '"';
      for (char c : cell) {
        if (c == '"') out_ << '"';
        out_ << c;
      }
      out_ << '"';
    } else {
      out_ << cell;
    }
    if (i + 1 < cells.size()) out_ << ',';
  }
  out_ << "\n";
}

}  // namespace gnnctrl
