#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <lapacke.h>

#include "rtmix/assembly.hpp"
#include "rtmix/error.hpp"
#include "rtmix/mesh.hpp"

namespace rtmix {

using DenseMatrix = Eigen::MatrixXd;

enum class SolverPath { dense, iterative };

struct SolverOptions {
  SolverPath path = SolverPath::dense;
  std::uint64_t seed = 1;
  int max_iterations = 500;
  /// Prefix for error messages, e.g. "level n=16".
  std::string context;
};

struct EigenPair {
  double lambda_h = 0.0;
  Vector u;      // P0 coefficients, u^T D u = 1
  Vector sigma;  // RT0 coefficients
  double residual = 0.0;       // ||S u - lambda D u||_2
  double flux_residual = 0.0;  // ||M sigma + B^T u||_2
};

struct EigenResult {
  int n = 0;
  double h = 0.0;
  Eigen::Index num_edges = 0;
  Eigen::Index num_triangles = 0;
  std::vector<EigenPair> pairs;  // ascending lambda_h
};

/// Cholesky factor of the flux mass matrix, reused for the Schur complement
/// and for flux recovery.
class FluxMassFactor {
 public:
  explicit FluxMassFactor(const AssembledSystem& sys) : llt_(Eigen::SparseMatrix<double>(sys.M)) {
    if (llt_.info() != Eigen::Success)
      throw NumericalError("flux mass matrix is not positive definite (Cholesky failed)");
  }

  template <class Rhs>
  DenseMatrix solve(const Rhs& rhs) const {
    DenseMatrix x = llt_.solve(rhs);
    if (llt_.info() != Eigen::Success) throw NumericalError("flux mass solve failed");
    return x;
  }

 private:
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;
};

/// S = B M^{-1} B^T + C, formed column block by column block.
inline DenseMatrix schur_complement(const AssembledSystem& sys, const FluxMassFactor& factor) {
  const Eigen::Index nt = sys.num_triangles();
  const Eigen::Index ne = sys.num_edges();
  constexpr Eigen::Index kBlock = 256;
  DenseMatrix s(nt, nt);
  DenseMatrix rhs(ne, kBlock);
  for (Eigen::Index start = 0; start < nt; start += kBlock) {
    const Eigen::Index width = std::min(kBlock, nt - start);
    rhs.setZero();
    for (Eigen::Index j = 0; j < width; ++j)
      for (SparseMatrix::InnerIterator it(sys.B, start + j); it; ++it) rhs(it.col(), j) = it.value();
    const DenseMatrix x = factor.solve(rhs.leftCols(width));
    s.middleCols(start, width).noalias() = sys.B * x;
  }
  s.diagonal() += sys.C;

  const double scale = s.cwiseAbs().maxCoeff();
  const double asym = (s - s.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= 1e-11 * scale))
    throw NumericalError("Schur complement asymmetry " + std::to_string(asym) + " exceeds tolerance");
  return (0.5 * (s + s.transpose())).eval();
}

inline DenseMatrix schur_complement(const AssembledSystem& sys) {
  return schur_complement(sys, FluxMassFactor(sys));
}

/// sigma = -M^{-1} B^T u.
inline Vector recover_flux(const Vector& u, const AssembledSystem& sys, const FluxMassFactor& factor) {
  const Vector rhs = -(sys.B.transpose() * u);
  return factor.solve(rhs).col(0);
}

inline Vector recover_flux(const Vector& u, const AssembledSystem& sys) {
  return recover_flux(u, sys, FluxMassFactor(sys));
}

struct GeneralizedEigenpair {
  double lambda = 0.0;
  Vector u;
};

namespace detail {

inline std::string prefixed(const SolverOptions& opts, const std::string& msg) {
  return opts.context.empty() ? msg : opts.context + ": " + msg;
}

/// Smallest k eigenpairs of a symmetric matrix via LAPACK dsyevr.
inline void dense_smallest(const DenseMatrix& a, int k, Vector& values, DenseMatrix& vectors,
                           const SolverOptions& opts) {
  const auto n = static_cast<lapack_int>(a.rows());
  DenseMatrix work = a;
  values.resize(n);
  vectors.resize(n, k);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(k));
  lapack_int found = 0;
  const double abstol = 2.0 * LAPACKE_dlamch('S');
  const lapack_int info =
      LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, work.data(), n, 0.0, 0.0, 1, k, abstol,
                     &found, values.data(), vectors.data(), n, support.data());
  if (info != 0 || found != k)
    throw NumericalError(prefixed(opts, "dense eigensolver failed (LAPACK info " +
                                            std::to_string(info) + ")"));
  values.conservativeResize(k);
}

inline DenseMatrix orthonormal_basis(const DenseMatrix& x) {
  Eigen::HouseholderQR<DenseMatrix> qr(x);
  return qr.householderQ() * DenseMatrix::Identity(x.rows(), x.cols());
}

/// Inverse subspace iteration with Rayleigh-Ritz on a symmetric positive
/// definite matrix.
inline void iterative_smallest(const DenseMatrix& a, int k, Vector& values, DenseMatrix& vectors,
                               const SolverOptions& opts) {
  const Eigen::Index n = a.rows();
  const Eigen::Index block = std::min<Eigen::Index>(n, std::max(2 * k, k + 8));
  Eigen::LLT<DenseMatrix> llt(a);
  if (llt.info() != Eigen::Success)
    throw NumericalError(prefixed(opts, "Schur complement is not positive definite"));

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  DenseMatrix x(n, block);
  for (Eigen::Index j = 0; j < block; ++j)
    for (Eigen::Index i = 0; i < n; ++i) x(i, j) = normal(rng);
  x = orthonormal_basis(x);

  const double tol = 1e-12 * a.norm();
  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    const DenseMatrix q = orthonormal_basis(llt.solve(x));
    const DenseMatrix aq = a * q;
    const DenseMatrix projected = q.transpose() * aq;
    Eigen::SelfAdjointEigenSolver<DenseMatrix> ritz(0.5 * (projected + projected.transpose()));
    x = q * ritz.eigenvectors();
    const DenseMatrix ax = aq * ritz.eigenvectors();
    int converged = 0;
    while (converged < k &&
           (ax.col(converged) - ritz.eigenvalues()[converged] * x.col(converged)).norm() <= tol)
      ++converged;
    if (converged == k) {
      values = ritz.eigenvalues().head(k);
      vectors = x.leftCols(k);
      return;
    }
    if (iter == opts.max_iterations)
      throw NumericalError(prefixed(opts, "eigenvalue index " + std::to_string(converged) +
                                              " did not converge within " +
                                              std::to_string(opts.max_iterations) + " iterations"));
  }
}

/// Largest-magnitude entry made positive; exact ties go to the lowest index.
inline void fix_sign(Vector& u) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < u.size(); ++i)
    if (std::abs(u[i]) > std::abs(u[best])) best = i;
  if (u.size() > 0 && u[best] < 0.0) u = -u;
}

}  // namespace detail

/// The k smallest eigenpairs of S u = lambda D u (D diagonal, positive),
/// ascending, D-orthonormal, sign-normalized.
inline std::vector<GeneralizedEigenpair> solve_gevp(const DenseMatrix& s, const Vector& d, int k,
                                                    const SolverOptions& opts = {}) {
  const Eigen::Index n = s.rows();
  if (s.cols() != n || d.size() != n)
    throw InvalidArgument(detail::prefixed(opts, "operator and weight dimensions disagree"));
  if (k < 1 || k > n)
    throw InvalidArgument(detail::prefixed(opts, "requested " + std::to_string(k) +
                                                     " eigenvalues but the problem has dimension " +
                                                     std::to_string(n)));
  if (!(d.minCoeff() > 0.0))
    throw InvalidArgument(detail::prefixed(opts, "weight matrix has non-positive diagonal"));

  const Vector d_isqrt = d.cwiseSqrt().cwiseInverse();
  const DenseMatrix scaled = d_isqrt.asDiagonal() * s * d_isqrt.asDiagonal();

  Vector values;
  DenseMatrix vectors;
  if (opts.path == SolverPath::dense)
    detail::dense_smallest(scaled, k, values, vectors, opts);
  else
    detail::iterative_smallest(scaled, k, values, vectors, opts);

  const double s_norm = s.norm();
  std::vector<GeneralizedEigenpair> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    Vector u = d_isqrt.asDiagonal() * vectors.col(i);
    u /= std::sqrt(u.dot(d.asDiagonal() * u));
    detail::fix_sign(u);
    const double lambda = values[i];
    const double residual = (s * u - lambda * d.cwiseProduct(u)).norm();
    if (!(residual <= 1e-10 * s_norm))
      throw NumericalError(detail::prefixed(
          opts, "eigenpair " + std::to_string(i) + " residual " + std::to_string(residual) +
                    " exceeds 1e-10 ||S||_F"));
    out.push_back({lambda, std::move(u)});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.lambda < b.lambda; });
  return out;
}

/// Eliminates the flux, solves for the k smallest eigenpairs and recovers
/// their fluxes.
inline EigenResult solve_mixed_eigenproblem(const Mesh& mesh, const AssembledSystem& sys, int k,
                                            const SolverOptions& opts = {}) {
  const FluxMassFactor factor(sys);
  const DenseMatrix s = schur_complement(sys, factor);
  const double s_norm = s.norm();

  EigenResult result;
  result.n = mesh.n();
  result.h = mesh.h();
  result.num_edges = sys.num_edges();
  result.num_triangles = sys.num_triangles();
  for (auto& gp : solve_gevp(s, sys.D, k, opts)) {
    if (!(gp.lambda > 0.0))
      throw NumericalError(detail::prefixed(opts, "non-positive eigenvalue " + std::to_string(gp.lambda)));
    EigenPair pair;
    pair.lambda_h = gp.lambda;
    pair.residual = (s * gp.u - gp.lambda * sys.D.cwiseProduct(gp.u)).norm();
    pair.sigma = recover_flux(gp.u, sys, factor);
    pair.flux_residual = (sys.M * pair.sigma + sys.B.transpose() * gp.u).norm();
    pair.u = std::move(gp.u);
    if (!(pair.residual <= 1e-10 * s_norm))
      throw NumericalError(detail::prefixed(opts, "eigen residual out of tolerance"));
    result.pairs.push_back(std::move(pair));
  }
  return result;
}

}  // namespace rtmix
