#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "rtmix/error.hpp"
#include "rtmix/mesh.hpp"

namespace rtmix {

/// Triangle rule in barycentric coordinates; weights sum to 1 and are scaled
/// by the triangle area at use.
struct QuadratureRule {
  int degree = 0;
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
};

/// Gauss-Legendre rule on [0, 1].
struct EdgeRule {
  int degree = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline QuadratureRule triangle_rule(int degree) {
  switch (degree) {
    case 1:
      return {1, {{1.0 / 3, 1.0 / 3, 1.0 / 3}}, {1.0}};
    case 2:
      return {2, {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}}, {1.0 / 3, 1.0 / 3, 1.0 / 3}};
    case 3:
      return {3,
              {{1.0 / 3, 1.0 / 3, 1.0 / 3},
               {0.6, 0.2, 0.2},
               {0.2, 0.6, 0.2},
               {0.2, 0.2, 0.6}},
              {-27.0 / 48, 25.0 / 48, 25.0 / 48, 25.0 / 48}};
    default:
      throw InvalidArgument("unsupported triangle quadrature degree " + std::to_string(degree) +
                            " (expected 1, 2 or 3)");
  }
}

inline EdgeRule edge_rule(int npts) {
  switch (npts) {
    case 2: {
      const double d = 0.5 / std::sqrt(3.0);
      return {3, {0.5 - d, 0.5 + d}, {0.5, 0.5}};
    }
    case 3: {
      const double d = 0.5 * std::sqrt(0.6);
      return {5, {0.5 - d, 0.5, 0.5 + d}, {5.0 / 18, 8.0 / 18, 5.0 / 18}};
    }
    default:
      throw InvalidArgument("unsupported edge quadrature size " + std::to_string(npts) +
                            " (expected 2 or 3)");
  }
}

template <class F>
double integrate_triangle(F&& f, const Triangle& tri, const QuadratureRule& rule) {
  double sum = 0.0;
  for (std::size_t q = 0; q < rule.points.size(); ++q) sum += rule.weights[q] * f(tri.at(rule.points[q]));
  return tri.area() * sum;
}

/// Integral of f along the segment a -> b.
template <class F>
double integrate_segment(F&& f, const Point& a, const Point& b, const EdgeRule& rule) {
  double sum = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q)
    sum += rule.weights[q] * f(Point(a + rule.nodes[q] * (b - a)));
  return (b - a).norm() * sum;
}

}  // namespace rtmix
