// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
//
//   rtmix_acceptance [scratch-dir]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rtmix/rtmix.hpp"

namespace fs = std::filesystem;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

rtmix::StudyConfig study(const std::string& preset, std::vector<int> levels, const fs::path& out) {
  rtmix::StudyConfig cfg;
  cfg.preset = preset;
  cfg.levels = std::move(levels);
  cfg.k = 4;
  cfg.expansion_order = 2.0;
  cfg.compute_superclose = true;
  cfg.solver = rtmix::SolverPath::dense;
  cfg.output_dir = out;
  return cfg;
}

bool in_range(const std::optional<rtmix::ObservedOrder>& o, double lo, double hi) {
  return o && !o->saturated && o->value >= lo && o->value <= hi;
}

std::string order_str(const std::optional<rtmix::ObservedOrder>& o) {
  if (!o) return "n/a";
  return o->saturated ? "saturated" : fmt(o->value);
}

struct Context {
  fs::path scratch;
  rtmix::StudyResult laplace;
  double laplace_seconds = 0.0;
};

Outcome raw_order(const Context& ctx) {
  const auto& rows = ctx.laplace.table.entries.at(0).rows;
  Outcome out{!ctx.laplace.failed && ctx.laplace_seconds < 60.0, ""};
  for (std::size_t l = 1; l < rows.size(); ++l) {
    out.pass = out.pass && in_range(rows[l].order_raw, 1.8, 2.2);
    out.detail += "order(" + std::to_string(rows[l - 1].level_n) + "->" + std::to_string(rows[l].level_n) +
                  ")=" + order_str(rows[l].order_raw) + " ";
  }
  out.detail += "runtime=" + fmt(ctx.laplace_seconds) + "s";
  return out;
}

Outcome extrapolation_gain(const Context& ctx) {
  const auto& rows = ctx.laplace.table.entries.at(0).rows;
  Outcome out{true, ""};
  for (std::size_t l = 1; l < rows.size(); ++l) {
    out.pass = out.pass && *rows[l].err_extrap < *rows[l].err_raw;
    out.detail += "n=" + std::to_string(rows[l].level_n) + ": extrap " + fmt(*rows[l].err_extrap) + " < raw " +
                  fmt(*rows[l].err_raw) + "; ";
  }
  for (std::size_t l = 2; l < rows.size(); ++l) {
    const auto& o = rows[l].order_extrap;
    out.pass = out.pass && o && !o->saturated && o->value >= 3.0;
    out.detail += "extrap order=" + order_str(o);
  }
  return out;
}

Outcome multiple_eigenvalue(const Context& ctx) {
  const auto& entries = ctx.laplace.table.entries;
  if (entries.size() < 2 || entries[1].members != std::vector<std::size_t>{1, 2})
    return {false, "lambda_2/lambda_3 not clustered"};
  const auto& e = entries[1];
  Outcome out{std::abs(e.reference - 5 * pi * pi) < 1e-12 * e.reference, "cluster {1,2} -> 5 pi^2; "};
  for (std::size_t l = 1; l < e.rows.size(); ++l) {
    out.pass = out.pass && in_range(e.rows[l].order_raw, 1.8, 2.2);
    out.detail += "raw order=" + order_str(e.rows[l].order_raw) + " ";
  }
  for (std::size_t l = 2; l < e.rows.size(); ++l) {
    const auto& o = e.rows[l].order_extrap;
    out.pass = out.pass && o && !o->saturated && o->value >= 2.5;
    out.detail += "extrap order=" + order_str(o);
  }
  return out;
}

Outcome superclose_gap(const Context& ctx) {
  const auto& rows = ctx.laplace.table.entries.at(0).rows;
  std::vector<double> dist, err_u;
  for (const auto& r : rows) {
    if (!r.superclose || !r.err_u) return {false, "superclose columns missing"};
    dist.push_back(*r.superclose);
    err_u.push_back(*r.err_u);
  }
  const auto sc = rtmix::observed_order(dist);
  const auto pl = rtmix::observed_order(err_u);
  Outcome out{true, ""};
  for (std::size_t i = 0; i < sc.size(); ++i) {
    const double gap = sc[i].value - pl[i].value;
    out.pass = out.pass && !sc[i].saturated && !pl[i].saturated && gap >= 0.7;
    out.detail += "superclose " + fmt(sc[i].value) + " vs plain " + fmt(pl[i].value) + " (gap " + fmt(gap) + "); ";
  }
  return out;
}

Outcome spectral_shift(const Context&) {
  const auto mesh = rtmix::build_structured_mesh(rtmix::Rectangle::unit_square(), 16);
  const auto lap = rtmix::solve_mixed_eigenproblem(mesh, rtmix::assemble(mesh, rtmix::laplace_preset()), 4);
  const auto shf = rtmix::solve_mixed_eigenproblem(mesh, rtmix::assemble(mesh, rtmix::shifted_preset()), 4);
  double worst = 0.0;
  for (std::size_t i = 0; i < 4; ++i)
    worst = std::max(worst, std::abs(shf.pairs[i].lambda_h - (lap.pairs[i].lambda_h + 5.0)) / shf.pairs[i].lambda_h);
  return {worst <= 1e-8, "max relative deviation " + fmt(worst)};
}

Outcome oracle_equivalence(const Context&) {
  double worst_eig = 0.0;
  for (int n : {1, 2}) {
    const auto mesh = rtmix::build_structured_mesh(rtmix::Rectangle::unit_square(), n);
    const auto sys = rtmix::assemble(mesh, rtmix::laplace_preset());
    const auto full = oracle::saddle_point_eigenvalues(sys);
    const auto reduced = rtmix::solve_gevp(rtmix::schur_complement(sys), sys.D, static_cast<int>(sys.num_triangles()));
    if (full.size() != reduced.size()) return {false, "finite spectrum size mismatch"};
    for (std::size_t i = 0; i < full.size(); ++i)
      worst_eig = std::max(worst_eig, std::abs(reduced[i].lambda - full[i]) / full[i]);
  }
  std::vector<rtmix::Triangle> tris{{{rtmix::Point(0, 0), rtmix::Point(1, 0), rtmix::Point(0, 1)}}};
  std::mt19937_64 rng(6);
  for (int i = 0; i < 3; ++i) tris.push_back(oracle::random_triangle(rng));
  double worst_mass = 0.0;
  const auto identity = [](const rtmix::Point&) { return rtmix::Matrix2::Identity().eval(); };
  for (const auto& tri : tris) {
    const rtmix::Signs signs{1, -1, 1};
    const auto local = rtmix::element_flux_mass(tri, signs, identity, rtmix::triangle_rule(2));
    worst_mass = std::max(worst_mass, (local - oracle::exact_flux_mass_identity(tri, signs)).cwiseAbs().maxCoeff());
  }
  return {worst_eig <= 1e-9 && worst_mass <= 1e-12,
          "eigenvalue rel dev " + fmt(worst_eig) + ", flux-mass abs dev " + fmt(worst_mass)};
}

Outcome commuting_diagram(const Context&) {
  const auto prob = rtmix::laplace_preset();
  const auto mesh = rtmix::build_structured_mesh(prob.domain, 8);
  const auto sys = rtmix::assemble(mesh, prob);
  const auto mode = rtmix::rectangle_mode(prob.domain, 1, 1);
  const rtmix::Vector div_interp = sys.B * rtmix::fortin_interpolate(mode.grad_u, mesh, rtmix::edge_rule(3));
  double worst = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const double exact = oracle::duffy_integral([&](const rtmix::Point& x) { return -mode.lambda * mode.u(x); },
                                                mesh.triangle(t));
    worst = std::max(worst, std::abs(div_interp[static_cast<Eigen::Index>(t)] - exact));
  }
  return {worst <= 1e-8, "max |B Pi sigma - int div sigma| = " + fmt(worst)};
}

Outcome determinism(const Context& ctx) {
  const fs::path first = ctx.scratch / "laplace";
  const fs::path second = ctx.scratch / "laplace_repeat";
  auto cfg = study("laplace", {8, 16, 32}, second);
  rtmix::emit_reports(rtmix::run_study(cfg), rtmix::ReportPaths::in(second));
  const bool csv = slurp(first / "convergence.csv") == slurp(second / "convergence.csv");
  const bool json = slurp(first / "report.json") == slurp(second / "report.json");
  return {csv && json && !slurp(first / "report.json").empty(),
          std::string("csv ") + (csv ? "identical" : "differs") + ", json " + (json ? "identical" : "differs")};
}

Outcome variable_sanity(const Context& ctx) {
  auto cfg = study("variable", {8, 16, 32}, ctx.scratch / "variable");
  const auto result = rtmix::run_study(cfg);
  if (result.failed) return {false, result.error};
  rtmix::emit_reports(result, rtmix::ReportPaths::in(cfg.output_dir));
  const auto& e = result.table.entries.at(0);
  Outcome out{e.reference_kind == rtmix::ReferenceKind::self_referenced, "lambda_1 ~ " + fmt(e.reference) + "; "};
  for (std::size_t l = 1; l < e.rows.size(); ++l) {
    out.pass = out.pass && in_range(e.rows[l].order_raw, 1.6, 2.4);
    out.detail += "order=" + order_str(e.rows[l].order_raw) + " ";
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  Context ctx;
  ctx.scratch = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "rtmix_acceptance";
  fs::remove_all(ctx.scratch);

  const auto start = std::chrono::steady_clock::now();
  const auto cfg = study("laplace", {8, 16, 32}, ctx.scratch / "laplace");
  ctx.laplace = rtmix::run_study(cfg);
  ctx.laplace_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  rtmix::emit_reports(ctx.laplace, rtmix::ReportPaths::in(cfg.output_dir), &std::cout);
  if (ctx.laplace.failed) std::cout << "laplace study failed: " << ctx.laplace.error << '\n';

  const std::vector<std::pair<std::string, std::function<Outcome(const Context&)>>> criteria{
      {"1 raw eigenvalue order", raw_order},
      {"2 extrapolation gain", extrapolation_gain},
      {"3 multiple eigenvalue cluster", multiple_eigenvalue},
      {"4 superclose gap", superclose_gap},
      {"5 spectral shift identity", spectral_shift},
      {"6 oracle equivalence", oracle_equivalence},
      {"7 commuting diagram", commuting_diagram},
      {"8 determinism", determinism},
      {"9 variable-coefficient sanity", variable_sanity}};

  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome outcome;
    try {
      outcome = check(ctx);
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    failures += outcome.pass ? 0 : 1;
    std::cout << (outcome.pass ? "PASS" : "FAIL") << "  [" << name << "]  " << outcome.detail << '\n';
  }
  std::cout << (failures == 0 ? "all acceptance criteria passed" : std::to_string(failures) + " criteria failed")
            << '\n';
  return failures == 0 ? 0 : 1;
}
