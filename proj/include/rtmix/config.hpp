#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "rtmix/coefficients.hpp"
#include "rtmix/eigensolver.hpp"
#include "rtmix/error.hpp"
#include "rtmix/mesh.hpp"

namespace rtmix {

/// Rejected study configuration (maps to exit status 1).
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

struct StudyConfig {
  std::string preset = "laplace";
  Rectangle domain = Rectangle::unit_square();
  std::vector<int> levels{8, 16, 32};
  int k = 4;
  double expansion_order = 2.0;
  bool compute_superclose = true;
  bool dump_matrices = false;
  SolverPath solver = SolverPath::dense;
  std::uint64_t seed = 1;
  bool record_timings = false;
  std::filesystem::path output_dir = "rtmix_out";

  void validate() const {
    bool known = false;
    for (const auto& p : preset_catalog()) known = known || p.name == preset;
    if (!known) throw ConfigError("unknown preset '" + preset + "'");
    try {
      domain.validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
    if (levels.size() < 2) throw ConfigError("at least two mesh levels are required");
    if (levels.front() < 1) throw ConfigError("mesh levels must be positive");
    for (std::size_t i = 1; i < levels.size(); ++i)
      if (levels[i] != 2 * levels[i - 1])
        throw ConfigError("mesh levels must double: " + std::to_string(levels[i - 1]) +
                          " is followed by " + std::to_string(levels[i]));
    if (k < 1) throw ConfigError("k must be at least 1");
    if (static_cast<long long>(k) > 2LL * levels.front() * levels.front())
      throw ConfigError("k = " + std::to_string(k) + " exceeds the triangle count of the coarsest level");
    if (!(expansion_order > 0.0)) throw ConfigError("expansion order must be positive");
    if (output_dir.empty()) throw ConfigError("output directory must not be empty");
  }
};

inline const char* to_string(SolverPath path) {
  return path == SolverPath::dense ? "dense" : "iterative";
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) items.push_back(trim(item));
  return items;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if constexpr (std::is_unsigned_v<T>) {
    if (!t.empty() && t.front() == '-') throw ConfigError("'" + key + "': must be non-negative");
  }
  std::istringstream in(t);
  T value{};
  in >> value;
  if (in.fail() || !in.eof()) throw ConfigError("'" + key + "': cannot parse '" + text + "'");
  return value;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  const std::string v = trim(text);
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("'" + key + "': expected true or false, got '" + text + "'");
}

}  // namespace detail

/// Comma-separated level list, e.g. "8,16,32".
inline std::vector<int> parse_levels(const std::string& text) {
  std::vector<int> levels;
  for (const auto& item : detail::split_list(text)) levels.push_back(detail::parse_number<int>("levels", item));
  return levels;
}

/// Parses the INI-style study file. Unknown sections or keys are errors.
///
///   [problem]  preset, domain (x0, y0, x1, y1)
///   [study]    levels, k, order
///   [options]  superclose, dump_matrices, solver, seed, timings
///   [output]   directory
inline StudyConfig parse_config(std::istream& in, const std::string& source = "<config>") {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(source + ": " + e.what());
  }

  static const std::map<std::string, std::set<std::string>> schema{
      {"problem", {"preset", "domain"}},
      {"study", {"levels", "k", "order"}},
      {"options", {"superclose", "dump_matrices", "solver", "seed", "timings"}},
      {"output", {"directory"}}};

  StudyConfig cfg;
  for (const auto& [section, body] : tree) {
    const auto allowed = schema.find(section);
    if (allowed == schema.end() || !body.data().empty())
      throw ConfigError(source + ": unknown section or top-level key '" + section + "'");
    for (const auto& [key, node] : body) {
      if (!allowed->second.count(key))
        throw ConfigError(source + ": unknown key '" + key + "' in section [" + section + "]");
      const std::string value = node.data();
      const std::string name = section + "." + key;
      if (name == "problem.preset") {
        cfg.preset = detail::trim(value);
      } else if (name == "problem.domain") {
        const auto items = detail::split_list(value);
        if (items.size() != 4) throw ConfigError(source + ": domain needs 4 numbers x0, y0, x1, y1");
        cfg.domain = {detail::parse_number<double>(name, items[0]), detail::parse_number<double>(name, items[1]),
                      detail::parse_number<double>(name, items[2]), detail::parse_number<double>(name, items[3])};
      } else if (name == "study.levels") {
        cfg.levels = parse_levels(value);
      } else if (name == "study.k") {
        cfg.k = detail::parse_number<int>(name, value);
      } else if (name == "study.order") {
        cfg.expansion_order = detail::parse_number<double>(name, value);
      } else if (name == "options.superclose") {
        cfg.compute_superclose = detail::parse_bool(name, value);
      } else if (name == "options.dump_matrices") {
        cfg.dump_matrices = detail::parse_bool(name, value);
      } else if (name == "options.solver") {
        const std::string v = detail::trim(value);
        if (v == "dense")
          cfg.solver = SolverPath::dense;
        else if (v == "iterative")
          cfg.solver = SolverPath::iterative;
        else
          throw ConfigError(source + ": solver must be dense or iterative, got '" + v + "'");
      } else if (name == "options.seed") {
        cfg.seed = detail::parse_number<std::uint64_t>(name, value);
      } else if (name == "options.timings") {
        cfg.record_timings = detail::parse_bool(name, value);
      } else if (name == "output.directory") {
        cfg.output_dir = detail::trim(value);
      }
    }
  }
  return cfg;
}

inline StudyConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  return parse_config(in, path.string());
}

}  // namespace rtmix
