#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "rtmix/coefficients.hpp"
#include "rtmix/error.hpp"
#include "rtmix/mesh.hpp"
#include "rtmix/quadrature.hpp"

namespace rtmix {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Matrix3 = Eigen::Matrix3d;
using Signs = std::array<int, 3>;

inline constexpr double kMinTriangleArea = 1e-14;
inline constexpr double kMinDeterminant = 1e-12;

/// RT0 x P0 blocks of the mixed eigenproblem
///
///   M sigma + B^T u = 0
///   B sigma - C u   = -lambda D u
///
/// M is the flux mass, B the divergence coupling, C and D the diagonal
/// reaction and weight masses (stored as their diagonals).
struct AssembledSystem {
  SparseMatrix M;
  SparseMatrix B;
  Vector C;
  Vector D;

  Eigen::Index num_edges() const { return M.rows(); }
  Eigen::Index num_triangles() const { return B.rows(); }
};

namespace detail {

inline void require_nondegenerate(const Triangle& tri) {
  if (!(tri.area() >= kMinTriangleArea)) {
    std::ostringstream msg;
    msg << "degenerate triangle (area " << tri.area() << ") at (" << tri.p[0].x() << ", "
        << tri.p[0].y() << ")";
    throw InvalidArgument(msg.str());
  }
}

inline Matrix2 invert_spd(const Matrix2& a) {
  const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  if (!(det >= kMinDeterminant)) throw InvalidArgument("diffusion tensor determinant below 1e-12");
  Matrix2 inv;
  inv << a(1, 1), -a(0, 1), -a(1, 0), a(0, 0);
  return inv / det;
}

}  // namespace detail

/// Lowest-order Raviart-Thomas basis function of local edge i evaluated at x:
/// s_i |e_i| / (2|T|) (x - p_i). Its normal component on e_i is s_i.
inline Point rt0_basis(const Triangle& tri, const Signs& signs, int i, const Point& x) {
  return signs[i] * tri.edge_length(i) / (2.0 * tri.area()) * (x - tri.p[i]);
}

/// Local flux mass  int_T (A^{-1} phi_i) . phi_j.
template <class InverseDiffusion>
Matrix3 element_flux_mass(const Triangle& tri, const Signs& signs, InverseDiffusion&& a_inv,
                          const QuadratureRule& rule) {
  detail::require_nondegenerate(tri);
  Matrix3 local = Matrix3::Zero();
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const Point x = tri.at(rule.points[q]);
    const Matrix2 k = a_inv(x);
    std::array<Point, 3> phi;
    for (int i = 0; i < 3; ++i) phi[i] = rt0_basis(tri, signs, i, x);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) local(i, j) += rule.weights[q] * phi[i].dot(k * phi[j]);
  }
  local *= tri.area();
  return (0.5 * (local + local.transpose())).eval();
}

/// Local divergence row: div phi_i is constant, so its integral is s_i |e_i|.
inline Eigen::RowVector3d element_div(const Triangle& tri, const Signs& signs) {
  detail::require_nondegenerate(tri);
  Eigen::RowVector3d row;
  for (int i = 0; i < 3; ++i) row[i] = signs[i] * tri.edge_length(i);
  return row;
}

template <class F>
double element_scalar_mass(const Triangle& tri, F&& coeff, const QuadratureRule& rule) {
  return integrate_triangle(std::forward<F>(coeff), tri, rule);
}

inline Signs local_signs(const Mesh& mesh, std::size_t t) {
  const auto& le = mesh.triangle_edges()[t];
  return {le[0].sign, le[1].sign, le[2].sign};
}

inline AssembledSystem assemble(const Mesh& mesh, const ProblemSpec& prob,
                                const QuadratureRule& rule = triangle_rule(2)) {
  if (!(mesh.rect() == prob.domain))
    throw InvalidArgument("mesh and problem '" + prob.name + "' are defined on different rectangles");

  const auto num_t = static_cast<Eigen::Index>(mesh.num_triangles());
  const auto num_e = static_cast<Eigen::Index>(mesh.num_edges());

  std::vector<Eigen::Triplet<double>> m_entries, b_entries;
  m_entries.reserve(9 * mesh.num_triangles());
  b_entries.reserve(3 * mesh.num_triangles());
  Vector c_diag(num_t), d_diag(num_t);

  auto a_inv = [&prob](const Point& x) { return detail::invert_spd(prob.diffusion(x)); };

  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle tri = mesh.triangle(t);
    for (const auto& bary : rule.points) {
      const Point x = tri.at(bary);
      if (const auto check = check_coefficients(prob, x); !check.ok) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "problem '" << prob.name << "': " << check.message << " at (" << x.x() << ", "
            << x.y() << ") in triangle " << t;
        throw InvalidArgument(msg.str());
      }
    }
    const Signs signs = local_signs(mesh, t);
    const Matrix3 local_m = element_flux_mass(tri, signs, a_inv, rule);
    const Eigen::RowVector3d local_b = element_div(tri, signs);
    const auto& le = mesh.triangle_edges()[t];
    for (int i = 0; i < 3; ++i) {
      b_entries.emplace_back(static_cast<int>(t), le[i].edge, local_b[i]);
      for (int j = 0; j < 3; ++j) m_entries.emplace_back(le[i].edge, le[j].edge, local_m(i, j));
    }
    c_diag[static_cast<Eigen::Index>(t)] = element_scalar_mass(tri, prob.reaction, rule);
    d_diag[static_cast<Eigen::Index>(t)] = element_scalar_mass(tri, prob.weight, rule);
  }

  AssembledSystem sys;
  sys.M.resize(num_e, num_e);
  sys.M.setFromTriplets(m_entries.begin(), m_entries.end());
  sys.B.resize(num_t, num_e);
  sys.B.setFromTriplets(b_entries.begin(), b_entries.end());
  sys.C = std::move(c_diag);
  sys.D = std::move(d_diag);
  return sys;
}

/// Coordinate text dump, one "row col value" line per stored entry, 17 significant digits.
inline void write_coordinate(std::ostream& os, const SparseMatrix& a) {
  char buf[64];
  for (Eigen::Index r = 0; r < a.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) {
      std::snprintf(buf, sizeof buf, "%.17g", it.value());
      os << it.row() << ' ' << it.col() << ' ' << buf << '\n';
    }
  }
}

inline void write_coordinate(std::ostream& os, const Vector& diagonal) {
  char buf[64];
  for (Eigen::Index i = 0; i < diagonal.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", diagonal[i]);
    os << i << ' ' << i << ' ' << buf << '\n';
  }
}

}  // namespace rtmix
