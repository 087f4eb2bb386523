#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rtmix/config.hpp"
#include "rtmix/error.hpp"
#include "rtmix/extrapolation.hpp"

namespace rtmix {

/// Per-level solver summary carried into the JSON report.
struct LevelReport {
  int n = 0;
  double h = 0.0;
  long long num_edges = 0;
  long long num_triangles = 0;
  std::vector<double> eigenvalues;
  std::vector<double> residuals;
  std::vector<double> flux_residuals;
  std::optional<double> seconds;
  std::optional<std::string> error;
};

struct StudyResult {
  StudyConfig config;
  ConvergenceTable table;
  std::vector<LevelReport> levels;
  bool failed = false;
  std::string error;

  int exit_code() const { return failed ? 2 : 0; }
};

inline constexpr int kReportDigits = 12;

/// Rounds to 12 significant digits, the precision of every report.
inline double round_report(double x) {
  if (!std::isfinite(x)) return x;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", kReportDigits, x);
  return std::strtod(buf, nullptr);
}

inline std::string format_report(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", kReportDigits, x);
  return buf;
}

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{
      "index",   "multiplicity", "level_n",      "h",          "lambda_h", "lambda_extrap", "err_raw",
      "err_extrap", "order_raw", "order_extrap", "superclose", "err_u",    "err_sigma"};
  return cols;
}

namespace detail {

inline std::string csv_field(const std::optional<double>& v) { return v ? format_report(*v) : std::string(); }

inline std::string csv_field(const std::optional<ObservedOrder>& v) {
  if (!v) return {};
  return v->saturated ? std::string("saturated") : format_report(v->value);
}

inline nlohmann::json json_value(const std::optional<double>& v) {
  return v ? nlohmann::json(round_report(*v)) : nlohmann::json(nullptr);
}

inline nlohmann::json json_value(const std::optional<ObservedOrder>& v) {
  if (!v) return nullptr;
  return v->saturated ? nlohmann::json("saturated") : nlohmann::json(round_report(v->value));
}

inline std::optional<double> optional_double(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

inline std::optional<ObservedOrder> optional_order(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  if (j.is_string()) {
    if (j.get<std::string>() != "saturated") throw InvalidArgument("unexpected order value " + j.dump());
    return ObservedOrder::saturated_order();
  }
  return ObservedOrder{false, j.get<double>()};
}

inline std::vector<double> rounded(const std::vector<double>& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (double x : v) out.push_back(round_report(x));
  return out;
}

}  // namespace detail

inline void write_csv(std::ostream& os, const ConvergenceTable& table) {
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& entry : table.entries) {
    for (const auto& row : entry.rows) {
      os << entry.index() << ',' << entry.multiplicity() << ',' << row.level_n << ','
         << format_report(row.h) << ',' << format_report(row.lambda_h) << ','
         << detail::csv_field(row.lambda_extrap) << ',' << detail::csv_field(row.err_raw) << ','
         << detail::csv_field(row.err_extrap) << ',' << detail::csv_field(row.order_raw) << ','
         << detail::csv_field(row.order_extrap) << ',' << detail::csv_field(row.superclose) << ','
         << detail::csv_field(row.err_u) << ',' << detail::csv_field(row.err_sigma) << '\n';
    }
  }
}

inline nlohmann::json table_to_json(const ConvergenceTable& table) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& entry : table.entries) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : entry.rows) {
      rows.push_back({{"level_n", row.level_n},
                      {"h", round_report(row.h)},
                      {"lambda_h", round_report(row.lambda_h)},
                      {"lambda_extrap", detail::json_value(row.lambda_extrap)},
                      {"err_raw", detail::json_value(row.err_raw)},
                      {"err_extrap", detail::json_value(row.err_extrap)},
                      {"order_raw", detail::json_value(row.order_raw)},
                      {"order_extrap", detail::json_value(row.order_extrap)},
                      {"superclose", detail::json_value(row.superclose)},
                      {"superclose_unweighted", detail::json_value(row.superclose_unweighted)},
                      {"err_u", detail::json_value(row.err_u)},
                      {"err_sigma", detail::json_value(row.err_sigma)}});
    }
    entries.push_back({{"index", entry.index()},
                       {"multiplicity", entry.multiplicity()},
                       {"members", entry.members},
                       {"reference", round_report(entry.reference)},
                       {"reference_kind", to_string(entry.reference_kind)},
                       {"rows", std::move(rows)}});
  }
  return {{"problem", table.problem},
          {"expansion_order", round_report(table.expansion_order)},
          {"entries", std::move(entries)}};
}

inline ConvergenceTable table_from_json(const nlohmann::json& j) {
  ConvergenceTable table;
  table.problem = j.at("problem").get<std::string>();
  table.expansion_order = j.at("expansion_order").get<double>();
  for (const auto& je : j.at("entries")) {
    ConvergenceEntry entry;
    entry.members = je.at("members").get<std::vector<std::size_t>>();
    entry.reference = je.at("reference").get<double>();
    entry.reference_kind = je.at("reference_kind").get<std::string>() == "analytic"
                               ? ReferenceKind::analytic
                               : ReferenceKind::self_referenced;
    for (const auto& jr : je.at("rows")) {
      TableRow row;
      row.level_n = jr.at("level_n").get<int>();
      row.h = jr.at("h").get<double>();
      row.lambda_h = jr.at("lambda_h").get<double>();
      row.lambda_extrap = detail::optional_double(jr.at("lambda_extrap"));
      row.err_raw = detail::optional_double(jr.at("err_raw"));
      row.err_extrap = detail::optional_double(jr.at("err_extrap"));
      row.order_raw = detail::optional_order(jr.at("order_raw"));
      row.order_extrap = detail::optional_order(jr.at("order_extrap"));
      row.superclose = detail::optional_double(jr.at("superclose"));
      row.superclose_unweighted = detail::optional_double(jr.at("superclose_unweighted"));
      row.err_u = detail::optional_double(jr.at("err_u"));
      row.err_sigma = detail::optional_double(jr.at("err_sigma"));
      entry.rows.push_back(row);
    }
    table.entries.push_back(std::move(entry));
  }
  return table;
}

inline nlohmann::json config_to_json(const StudyConfig& cfg) {
  return {{"preset", cfg.preset},
          {"domain", {cfg.domain.x0, cfg.domain.y0, cfg.domain.x1, cfg.domain.y1}},
          {"levels", cfg.levels},
          {"k", cfg.k},
          {"expansion_order", cfg.expansion_order},
          {"superclose", cfg.compute_superclose},
          {"dump_matrices", cfg.dump_matrices},
          {"solver", to_string(cfg.solver)},
          {"seed", cfg.seed},
          {"timings", cfg.record_timings}};
}

inline nlohmann::json study_to_json(const StudyResult& result) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& lv : result.levels) {
    nlohmann::json jl{{"n", lv.n},
                      {"h", round_report(lv.h)},
                      {"edges", lv.num_edges},
                      {"triangles", lv.num_triangles},
                      {"eigenvalues", detail::rounded(lv.eigenvalues)},
                      {"residuals", detail::rounded(lv.residuals)},
                      {"flux_residuals", detail::rounded(lv.flux_residuals)},
                      {"status", lv.error ? "failed" : "ok"}};
    if (lv.error) jl["error"] = *lv.error;
    if (result.config.record_timings && lv.seconds) jl["seconds"] = round_report(*lv.seconds);
    levels.push_back(std::move(jl));
  }
  nlohmann::json out{{"status", result.failed ? "failed" : "ok"},
                     {"config", config_to_json(result.config)},
                     {"levels", std::move(levels)},
                     {"table", table_to_json(result.table)}};
  if (result.failed) out["error"] = result.error;
  return out;
}

/// Aligned plain-text table.
inline void write_text_table(std::ostream& os, const ConvergenceTable& table) {
  os << "problem: " << table.problem << "  (expansion order " << format_report(table.expansion_order)
     << ")\n";
  const std::vector<std::string> heads{"idx",       "mult",      "n",          "lambda_h",  "lambda_extrap",
                                       "err_raw",   "order_raw", "err_extrap", "order_ext", "superclose",
                                       "err_u",     "err_sigma"};
  const std::vector<int> widths{4, 5, 6, 20, 20, 20, 20, 20, 20, 20, 20, 20};
  for (std::size_t i = 0; i < heads.size(); ++i) os << std::setw(widths[i]) << heads[i];
  os << '\n';
  auto cell = [](const auto& v) {
    const std::string s = detail::csv_field(v);
    return s.empty() ? std::string("-") : s;
  };
  for (const auto& entry : table.entries) {
    for (const auto& row : entry.rows) {
      const std::vector<std::string> cells{std::to_string(entry.index()),
                                           std::to_string(entry.multiplicity()),
                                           std::to_string(row.level_n),
                                           format_report(row.lambda_h),
                                           cell(row.lambda_extrap),
                                           cell(row.err_raw),
                                           cell(row.order_raw),
                                           cell(row.err_extrap),
                                           cell(row.order_extrap),
                                           cell(row.superclose),
                                           cell(row.err_u),
                                           cell(row.err_sigma)};
      for (std::size_t i = 0; i < cells.size(); ++i) os << std::setw(widths[i]) << cells[i];
      os << '\n';
    }
  }
}

struct ReportPaths {
  std::filesystem::path csv;
  std::filesystem::path json;

  static ReportPaths in(const std::filesystem::path& dir) {
    return {dir / "convergence.csv", dir / "report.json"};
  }
};

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write report file '" + path.string() + "'");
  return out;
}

}  // namespace detail

inline void emit_reports(const StudyResult& result, const ReportPaths& paths, std::ostream* text = nullptr) {
  {
    auto csv = detail::open_output(paths.csv);
    write_csv(csv, result.table);
    if (!csv) throw Error("failed writing '" + paths.csv.string() + "'");
  }
  {
    auto json = detail::open_output(paths.json);
    json << study_to_json(result).dump(2) << '\n';
    if (!json) throw Error("failed writing '" + paths.json.string() + "'");
  }
  if (text) write_text_table(*text, result.table);
}

}  // namespace rtmix
