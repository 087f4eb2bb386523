#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rtmix/error.hpp"
#include "rtmix/mesh.hpp"

namespace rtmix {

using Matrix2 = Eigen::Matrix2d;
using DiffusionField = std::function<Matrix2(const Point&)>;
using ScalarField = std::function<double(const Point&)>;

/// Coefficients of  -div(A grad u) + c u = lambda b u  in the rectangle,
/// u = 0 on the boundary.
struct ProblemSpec {
  std::string name;
  Rectangle domain;
  DiffusionField diffusion;  // A, symmetric positive definite
  ScalarField reaction;      // c >= 0
  ScalarField weight;        // b > 0

  /// Set when A = I, b = 1 and c is this constant. The eigenpairs are then
  /// the separable Dirichlet Laplacian modes shifted by the constant.
  std::optional<double> constant_shift;

  bool has_analytic_eigenpairs() const { return constant_shift.has_value(); }
};

inline constexpr double kCoefficientFloor = 1e-12;

struct CoefficientCheck {
  bool ok = true;
  std::string message;
};

/// Checks the coefficient invariants at a single point.
inline CoefficientCheck check_coefficients(const ProblemSpec& prob, const Point& x) {
  const Matrix2 a = prob.diffusion(x);
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if (!a.allFinite() || std::abs(a(0, 1) - a(1, 0)) > 1e-12 * scale)
    return {false, "diffusion tensor is not symmetric"};
  // Closed-form eigenvalues of a symmetric 2x2 matrix.
  const double mean = 0.5 * (a(0, 0) + a(1, 1));
  const double radius = std::hypot(0.5 * (a(0, 0) - a(1, 1)), a(0, 1));
  if (mean - radius < kCoefficientFloor) return {false, "diffusion tensor is not positive definite"};
  const double c = prob.reaction(x);
  if (!std::isfinite(c) || c < 0.0) return {false, "reaction coefficient is negative"};
  const double b = prob.weight(x);
  if (!std::isfinite(b) || b < kCoefficientFloor) return {false, "weight coefficient is not positive"};
  return {};
}

inline ProblemSpec laplace_preset(const Rectangle& domain = Rectangle::unit_square()) {
  return {"laplace",
          domain,
          [](const Point&) { return Matrix2::Identity().eval(); },
          [](const Point&) { return 0.0; },
          [](const Point&) { return 1.0; },
          0.0};
}

inline ProblemSpec shifted_preset(const Rectangle& domain = Rectangle::unit_square()) {
  return {"shifted",
          domain,
          [](const Point&) { return Matrix2::Identity().eval(); },
          [](const Point&) { return 5.0; },
          [](const Point&) { return 1.0; },
          5.0};
}

inline ProblemSpec variable_preset(const Rectangle& domain = Rectangle::unit_square()) {
  return {"variable",
          domain,
          [](const Point& x) {
            Matrix2 a = Matrix2::Zero();
            a(0, 0) = 1.0 + x.x();
            a(1, 1) = 1.0 + x.y();
            return a;
          },
          [](const Point& x) { return x.x() * x.y(); },
          [](const Point& x) { return 1.0 + (x.x() + x.y()) / 4.0; },
          std::nullopt};
}

struct PresetInfo {
  std::string name;
  std::string description;
};

inline std::vector<PresetInfo> preset_catalog() {
  return {{"laplace", "A = I, c = 0, b = 1 (analytic eigenpairs)"},
          {"shifted", "A = I, c = 5, b = 1 (analytic eigenpairs, shifted by 5)"},
          {"variable", "A = diag(1 + x, 1 + y), c = x y, b = 1 + (x + y) / 4"}};
}

inline ProblemSpec make_preset(const std::string& name,
                               const Rectangle& domain = Rectangle::unit_square()) {
  domain.validate();
  if (name == "laplace") return laplace_preset(domain);
  if (name == "shifted") return shifted_preset(domain);
  if (name == "variable") return variable_preset(domain);
  throw InvalidArgument("unknown problem preset '" + name + "'");
}

}  // namespace rtmix
