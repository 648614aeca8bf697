#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gnnctrl/controllers.hpp"
#include "gnnctrl/graph.hpp"
#include "gnnctrl/matrix.hpp"
#include "gnnctrl/system.hpp"

namespace gnnctrl {

inline constexpr const char* kCodeVersion = "gnnctrl 0.1.0";

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json graph_to_json(const Graph& g);
Graph graph_from_json(const nlohmann::json& j);

nlohmann::json system_to_json(const DistributedSystem& d);
DistributedSystem system_from_json(const nlohmann::json& j);

nlohmann::json gnn_to_json(const GnnParams& p);
GnnParams gnn_from_json(const nlohmann::json& j);

// Controllers round-trip through one model format with a "kind" tag.
nlohmann::json controller_to_json(const Controller& ctrl);
std::unique_ptr<Controller> controller_from_json(const nlohmann::json& j);

void write_json_file(const std::filesystem::path& path,
                     const nlohmann::json& j);
nlohmann::json read_json_file(const std::filesystem::path& path);

// "key=value" lines; '#' starts a comment, blank lines are skipped.
// Pairs come back in file order.
std::vector<std::pair<std::string, std::string>> read_key_value_file(
    const std::filesystem::path& path);

std::uint64_t fnv1a_hash(const std::string& text);

// Shortest exact decimal for a double ("%.17g" fallback "inf"/"nan" safe).
std::string format_double(double v);

// CSV file with "# key=value" metadata lines above the column header. Rows
// are written in call order; cells containing a comma, quote or newline are
// double-quoted (RFC 4180). All formatting is deterministic.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path,
            const std::vector<std::pair<std::string, std::string>>& metadata,
            const std::vector<std::string>& columns);
  void row(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
  std::size_t n_columns_;
};

}  // namespace gnnctrl
