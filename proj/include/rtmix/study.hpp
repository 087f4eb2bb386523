#pragma once

#include <chrono>
#include <exception>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rtmix/assembly.hpp"
#include "rtmix/coefficients.hpp"
#include "rtmix/config.hpp"
#include "rtmix/eigensolver.hpp"
#include "rtmix/extrapolation.hpp"
#include "rtmix/mesh.hpp"
#include "rtmix/report.hpp"
#include "rtmix/superclose.hpp"

namespace rtmix {

/// Everything computed on one mesh level.
struct LevelSolution {
  Mesh mesh;
  Vector weight_mass;  // diagonal of D
  EigenResult eigen;
  double seconds = 0.0;
};

inline LevelSolution solve_level(const ProblemSpec& prob, int n, int k, const SolverOptions& opts,
                                 const std::optional<std::filesystem::path>& dump_dir = std::nullopt) {
  const auto start = std::chrono::steady_clock::now();
  LevelSolution level{build_structured_mesh(prob.domain, n), {}, {}, 0.0};
  const AssembledSystem sys = assemble(level.mesh, prob);
  if (dump_dir) {
    const std::string tag = "_n" + std::to_string(n);
    auto dump = [&](const std::string& name, auto&& writer) {
      auto out = detail::open_output(*dump_dir / (name + tag + ".txt"));
      writer(out);
    };
    dump("mesh", [&](std::ostream& os) { write_mesh(os, level.mesh); });
    dump("M", [&](std::ostream& os) { write_coordinate(os, sys.M); });
    dump("B", [&](std::ostream& os) { write_coordinate(os, sys.B); });
    dump("C", [&](std::ostream& os) { write_coordinate(os, sys.C); });
    dump("D", [&](std::ostream& os) { write_coordinate(os, sys.D); });
  }
  level.eigen = solve_mixed_eigenproblem(level.mesh, sys, k, opts);
  level.weight_mass = sys.D;
  level.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return level;
}

namespace detail {

/// Analytic modes i whose eigenvalue is simple among the first count + 1.
inline std::vector<bool> simple_modes(const std::vector<AnalyticEigenpair>& modes, std::size_t count) {
  std::vector<bool> simple(count, true);
  for (std::size_t i = 0; i < count; ++i) {
    const double tol = 1e-12 * modes[i].lambda;
    if (i > 0 && std::abs(modes[i].lambda - modes[i - 1].lambda) <= tol) simple[i] = false;
    if (i + 1 < modes.size() && std::abs(modes[i + 1].lambda - modes[i].lambda) <= tol) simple[i] = false;
  }
  return simple;
}

inline void attach_superclose(ConvergenceTable& table, const std::vector<LevelSolution>& levels,
                              const std::vector<AnalyticEigenpair>& modes) {
  const auto simple = simple_modes(modes, levels.front().eigen.pairs.size());
  const QuadratureRule rule = triangle_rule(3);
  for (auto& entry : table.entries) {
    if (entry.multiplicity() != 1 || !simple[entry.index()]) continue;
    const AnalyticEigenpair& exact = modes[entry.index()];
    for (std::size_t l = 0; l < levels.size(); ++l) {
      const LevelSolution& level = levels[l];
      const EigenPair& pair = level.eigen.pairs[entry.index()];
      const Vector projection = p0_project(exact.u, level.mesh, rule);
      Vector areas(projection.size());
      for (std::size_t t = 0; t < level.mesh.num_triangles(); ++t)
        areas[static_cast<Eigen::Index>(t)] = level.mesh.triangle(t).area();
      TableRow& row = entry.rows[l];
      row.superclose = superclose_distance(pair.u, projection, level.weight_mass);
      row.superclose_unweighted = superclose_distance(pair.u, projection, level.weight_mass, &areas);
      const L2Errors errs = l2_errors(pair, exact, level.mesh, rule);
      row.err_u = errs.err_u;
      row.err_sigma = errs.err_sigma;
    }
  }
}

}  // namespace detail

/// Runs the whole mesh-sequence pipeline. Levels are solved concurrently;
/// failures are recorded in the result rather than thrown.
inline StudyResult run_study(const StudyConfig& config) {
  config.validate();
  StudyResult result;
  result.config = config;
  const ProblemSpec prob = make_preset(config.preset, config.domain);
  result.table.problem = prob.name;
  result.table.expansion_order = config.expansion_order;

  std::optional<std::filesystem::path> dump_dir;
  if (config.dump_matrices) dump_dir = config.output_dir / "matrices";

  std::vector<std::future<LevelSolution>> futures;
  for (int n : config.levels) {
    SolverOptions opts;
    opts.path = config.solver;
    opts.seed = config.seed;
    opts.context = "level n=" + std::to_string(n);
    futures.push_back(std::async(std::launch::async, [&prob, n, k = config.k, opts, dump_dir] {
      return solve_level(prob, n, k, opts, dump_dir);
    }));
  }

  std::vector<LevelSolution> solved;
  bool prefix_ok = true;
  for (std::size_t l = 0; l < futures.size(); ++l) {
    LevelReport report;
    report.n = config.levels[l];
    try {
      LevelSolution level = futures[l].get();
      report.h = level.mesh.h();
      report.num_edges = level.eigen.num_edges;
      report.num_triangles = level.eigen.num_triangles;
      for (const auto& pair : level.eigen.pairs) {
        report.eigenvalues.push_back(pair.lambda_h);
        report.residuals.push_back(pair.residual);
        report.flux_residuals.push_back(pair.flux_residual);
      }
      report.seconds = level.seconds;
      if (prefix_ok) solved.push_back(std::move(level));
    } catch (const std::exception& e) {
      report.error = e.what();
      prefix_ok = false;
      if (!result.failed) {
        result.failed = true;
        result.error = std::string("level n=") + std::to_string(report.n) + ": " + e.what();
      }
    }
    result.levels.push_back(std::move(report));
  }

  if (solved.size() < 2) return result;

  try {
    std::vector<Level> levels;
    for (const auto& s : solved) {
      Level lv{s.eigen.n, s.eigen.h, {}};
      for (const auto& pair : s.eigen.pairs) lv.eigenvalues.push_back(pair.lambda_h);
      levels.push_back(std::move(lv));
    }
    const LevelSequence seq = match_and_cluster(std::move(levels), config.expansion_order);

    std::optional<std::vector<double>> analytic;
    std::vector<AnalyticEigenpair> modes;
    if (prob.has_analytic_eigenpairs()) {
      modes = analytic_eigenpairs(prob, static_cast<std::size_t>(config.k) + 1);
      analytic.emplace();
      for (int i = 0; i < config.k; ++i) analytic->push_back(modes[static_cast<std::size_t>(i)].lambda);
    }
    result.table = build_convergence_table(seq, config.expansion_order, analytic, prob.name);
    if (config.compute_superclose && analytic) detail::attach_superclose(result.table, solved, modes);
  } catch (const std::exception& e) {
    result.failed = true;
    if (result.error.empty()) result.error = e.what();
  }
  return result;
}

}  // namespace rtmix
