#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

#include "rtmix/assembly.hpp"
#include "rtmix/coefficients.hpp"
#include "rtmix/eigensolver.hpp"
#include "rtmix/error.hpp"
#include "rtmix/mesh.hpp"
#include "rtmix/quadrature.hpp"

namespace rtmix {

/// Separable Dirichlet eigenpair on a rectangle, L2-normalized.
struct AnalyticEigenpair {
  double lambda = 0.0;
  int m = 0;
  int n = 0;
  std::function<double(const Point&)> u;
  std::function<Point(const Point&)> grad_u;
};

inline AnalyticEigenpair rectangle_mode(const Rectangle& r, int m, int n, double shift = 0.0) {
  using std::numbers::pi;
  const double kx = m * pi / r.width();
  const double ky = n * pi / r.height();
  const double amp = 2.0 / std::sqrt(r.area());
  const double x0 = r.x0, y0 = r.y0;
  AnalyticEigenpair pair;
  pair.lambda = kx * kx + ky * ky + shift;
  pair.m = m;
  pair.n = n;
  pair.u = [=](const Point& x) { return amp * std::sin(kx * (x.x() - x0)) * std::sin(ky * (x.y() - y0)); };
  pair.grad_u = [=](const Point& x) {
    const double sx = std::sin(kx * (x.x() - x0)), cx = std::cos(kx * (x.x() - x0));
    const double sy = std::sin(ky * (x.y() - y0)), cy = std::cos(ky * (x.y() - y0));
    return Point(amp * kx * cx * sy, amp * ky * sx * cy);
  };
  return pair;
}

/// The `count` smallest analytic eigenpairs, ordered by (lambda, m, n).
inline std::vector<AnalyticEigenpair> analytic_eigenpairs(const ProblemSpec& prob, std::size_t count) {
  if (!prob.has_analytic_eigenpairs())
    throw InvalidArgument("problem '" + prob.name + "' has no analytic eigenpairs");
  const int bound = static_cast<int>(count) + 1;
  std::vector<std::tuple<double, int, int>> modes;
  for (int m = 1; m <= bound; ++m)
    for (int n = 1; n <= bound; ++n) modes.emplace_back(rectangle_mode(prob.domain, m, n).lambda, m, n);
  std::sort(modes.begin(), modes.end());
  std::vector<AnalyticEigenpair> out;
  for (std::size_t i = 0; i < count && i < modes.size(); ++i)
    out.push_back(rectangle_mode(prob.domain, std::get<1>(modes[i]), std::get<2>(modes[i]),
                                 *prob.constant_shift));
  return out;
}

/// Elementwise means (P0 projection).
template <class F>
Vector p0_project(F&& u_exact, const Mesh& mesh, const QuadratureRule& rule = triangle_rule(2)) {
  if (rule.degree < 2) throw InvalidArgument("P0 projection needs a quadrature rule of degree >= 2");
  Vector out(static_cast<Eigen::Index>(mesh.num_triangles()));
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle tri = mesh.triangle(t);
    out[static_cast<Eigen::Index>(t)] = integrate_triangle(u_exact, tri, rule) / tri.area();
  }
  return out;
}

/// Normal flux  int_e sigma . n_e ds  through every edge (global normal).
template <class F>
Vector edge_fluxes(F&& sigma_exact, const Mesh& mesh, const EdgeRule& rule = edge_rule(3)) {
  if (rule.nodes.size() < 2) throw InvalidArgument("edge fluxes need at least 2 quadrature points");
  Vector out(static_cast<Eigen::Index>(mesh.num_edges()));
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const Point n = mesh.edge_normal(e);
    const Point& a = mesh.vertices()[mesh.edges()[e][0]];
    const Point& b = mesh.vertices()[mesh.edges()[e][1]];
    out[static_cast<Eigen::Index>(e)] =
        integrate_segment([&](const Point& x) { return Point(sigma_exact(x)).dot(n); }, a, b, rule);
  }
  return out;
}

/// Canonical RT0 interpolant. The basis functions carry unit normal
/// component on their edge, so each coefficient is the edge flux divided by
/// the edge length (the mean normal component).
template <class F>
Vector fortin_interpolate(F&& sigma_exact, const Mesh& mesh, const EdgeRule& rule = edge_rule(3)) {
  Vector coeffs = edge_fluxes(std::forward<F>(sigma_exact), mesh, rule);
  for (std::size_t e = 0; e < mesh.num_edges(); ++e)
    coeffs[static_cast<Eigen::Index>(e)] /= mesh.edge_length(e);
  return coeffs;
}

/// Evaluates an RT0 field at x inside triangle t.
inline Point evaluate_flux(const Mesh& mesh, const Vector& sigma, std::size_t t, const Point& x) {
  const Triangle tri = mesh.triangle(t);
  const Signs signs = local_signs(mesh, t);
  Point value = Point::Zero();
  for (int i = 0; i < 3; ++i)
    value += sigma[mesh.triangle_edges()[t][i].edge] * rt0_basis(tri, signs, i, x);
  return value;
}

/// Distance between a discrete eigenfunction and the projection of the exact
/// one. The projection is rescaled to unit D-norm and its sign aligned with
/// u_h; the distance is measured in the `metric` weights (defaults to D).
inline double superclose_distance(const Vector& u_h, const Vector& projection, const Vector& d,
                                  const Vector* metric = nullptr) {
  if (u_h.size() != projection.size() || u_h.size() != d.size())
    throw InvalidArgument("superclose distance: dimension mismatch");
  const double norm = std::sqrt(projection.dot(d.cwiseProduct(projection)));
  if (!(norm > 0.0)) throw InvalidArgument("superclose distance: projection vector is zero");
  Vector pu = projection / norm;
  if (u_h.dot(d.cwiseProduct(pu)) < 0.0) pu = -pu;
  const Vector diff = u_h - pu;
  const Vector& w = metric ? *metric : d;
  return std::sqrt(diff.dot(w.cwiseProduct(diff)));
}

struct L2Errors {
  double err_u = 0.0;
  double err_sigma = 0.0;
};

/// Plain L2 errors of the P0 eigenfunction and the RT0 flux against the
/// exact pair (flux grad u, valid for the A = I presets). The discrete
/// pair's sign is aligned with the exact eigenfunction first.
inline L2Errors l2_errors(const EigenPair& pair, const AnalyticEigenpair& exact, const Mesh& mesh,
                          const QuadratureRule& rule = triangle_rule(3)) {
  double alignment = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    alignment += pair.u[static_cast<Eigen::Index>(t)] * integrate_triangle(exact.u, mesh.triangle(t), rule);
  const double sign = alignment < 0.0 ? -1.0 : 1.0;
  const bool have_flux = pair.sigma.size() == static_cast<Eigen::Index>(mesh.num_edges());

  L2Errors out;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle tri = mesh.triangle(t);
    const double u_t = sign * pair.u[static_cast<Eigen::Index>(t)];
    out.err_u += integrate_triangle(
        [&](const Point& x) {
          const double diff = exact.u(x) - u_t;
          return diff * diff;
        },
        tri, rule);
    if (have_flux) {
      out.err_sigma += integrate_triangle(
          [&](const Point& x) {
            return (exact.grad_u(x) - sign * evaluate_flux(mesh, pair.sigma, t, x)).squaredNorm();
          },
          tri, rule);
    }
  }
  out.err_u = std::sqrt(out.err_u);
  out.err_sigma = have_flux ? std::sqrt(out.err_sigma) : std::numeric_limits<double>::quiet_NaN();
  return out;
}

}  // namespace rtmix
