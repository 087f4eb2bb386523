#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "rtmix/error.hpp"

namespace rtmix {

using Point = Eigen::Vector2d;

struct Rectangle {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 1.0;
  double y1 = 1.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }

  void validate() const {
    if (!(x1 > x0) || !(y1 > y0) || !std::isfinite(area()) || !(area() > 0.0)) {
      throw InvalidArgument("invalid rectangle [" + std::to_string(x0) + ", " + std::to_string(x1) +
                            "] x [" + std::to_string(y0) + ", " + std::to_string(y1) +
                            "]: extents must be positive");
    }
  }

  static Rectangle unit_square() { return {}; }

  bool operator==(const Rectangle&) const = default;
};

/// Vertex coordinates of a single triangle, counterclockwise.
struct Triangle {
  std::array<Point, 3> p;

  double signed_area() const {
    const Point a = p[1] - p[0];
    const Point b = p[2] - p[0];
    return 0.5 * (a.x() * b.y() - a.y() * b.x());
  }
  double area() const { return std::abs(signed_area()); }
  Point centroid() const { return (p[0] + p[1] + p[2]) / 3.0; }

  /// Length of the edge opposite vertex i.
  double edge_length(int i) const { return (p[(i + 2) % 3] - p[(i + 1) % 3]).norm(); }

  /// Maps barycentric coordinates to a physical point.
  Point at(const std::array<double, 3>& bary) const {
    return bary[0] * p[0] + bary[1] * p[1] + bary[2] * p[2];
  }
};

struct LocalEdge {
  std::int32_t edge = -1;
  int sign = 0;

  bool operator==(const LocalEdge&) const = default;
};

/// Structured triangulation of a rectangle.
///
/// Local edge i of a triangle is the edge opposite local vertex i. Every
/// global edge is oriented from its lower to its higher vertex index; its
/// unit normal is that direction rotated 90 degrees counterclockwise. The
/// sign stored per (triangle, local edge) is +1 when the triangle's outward
/// normal agrees with the global normal.
class Mesh {
 public:
  const Rectangle& rect() const { return rect_; }
  int n() const { return n_; }
  double h() const { return h_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<std::array<std::int32_t, 3>>& triangles() const { return triangles_; }
  const std::vector<std::array<std::int32_t, 2>>& edges() const { return edges_; }
  const std::vector<std::array<LocalEdge, 3>>& triangle_edges() const { return triangle_edges_; }
  const std::vector<bool>& boundary_edge_flags() const { return boundary_; }

  Triangle triangle(std::size_t t) const {
    const auto& v = triangles_[t];
    return Triangle{{vertices_[v[0]], vertices_[v[1]], vertices_[v[2]]}};
  }

  double edge_length(std::size_t e) const {
    return (vertices_[edges_[e][1]] - vertices_[edges_[e][0]]).norm();
  }

  /// Global unit normal of edge e.
  Point edge_normal(std::size_t e) const {
    const Point t = (vertices_[edges_[e][1]] - vertices_[edges_[e][0]]).normalized();
    return Point(-t.y(), t.x());
  }

  bool operator==(const Mesh&) const = default;

  friend Mesh build_structured_mesh(const Rectangle& rect, int n);

 private:
  Rectangle rect_;
  int n_ = 0;
  double h_ = 0.0;
  std::vector<Point> vertices_;
  std::vector<std::array<std::int32_t, 3>> triangles_;
  std::vector<std::array<std::int32_t, 2>> edges_;
  std::vector<std::array<LocalEdge, 3>> triangle_edges_;
  std::vector<bool> boundary_;
};

/// n x n squares, each split along its lower-left to upper-right diagonal.
/// Vertices, triangles and edges are numbered row-major.
inline Mesh build_structured_mesh(const Rectangle& rect, int n) {
  rect.validate();
  if (n < 1) throw InvalidArgument("mesh subdivision count must be >= 1, got " + std::to_string(n));

  Mesh m;
  m.rect_ = rect;
  m.n_ = n;

  const auto nv = static_cast<std::size_t>(n + 1);
  m.vertices_.reserve(nv * nv);
  for (int j = 0; j <= n; ++j) {
    // Exact endpoints; interior coordinates interpolate so nested meshes share vertices.
    const double y = j == n ? rect.y1 : rect.y0 + rect.height() * j / n;
    for (int i = 0; i <= n; ++i) {
      const double x = i == n ? rect.x1 : rect.x0 + rect.width() * i / n;
      m.vertices_.emplace_back(x, y);
    }
  }

  auto vid = [n](int i, int j) { return static_cast<std::int32_t>(j * (n + 1) + i); };
  m.triangles_.reserve(2 * static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const auto a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
      m.triangles_.push_back({a, b, c});
      m.triangles_.push_back({a, c, d});
    }
  }

  std::map<std::pair<std::int32_t, std::int32_t>, std::int32_t> lookup;
  std::vector<int> use_count;
  m.triangle_edges_.resize(m.triangles_.size());
  for (std::size_t t = 0; t < m.triangles_.size(); ++t) {
    const auto& tri = m.triangles_[t];
    for (int i = 0; i < 3; ++i) {
      const std::int32_t va = tri[(i + 1) % 3];
      const std::int32_t vb = tri[(i + 2) % 3];
      const auto key = std::minmax(va, vb);
      auto [it, inserted] = lookup.try_emplace({key.first, key.second},
                                               static_cast<std::int32_t>(m.edges_.size()));
      if (inserted) {
        m.edges_.push_back({key.first, key.second});
        use_count.push_back(0);
      }
      ++use_count[it->second];
      // Counterclockwise traversal va -> vb has outward normal on its right.
      // The global normal lies to the left of low -> high, so they agree
      // exactly when the traversal runs high -> low.
      m.triangle_edges_[t][i] = LocalEdge{it->second, va > vb ? +1 : -1};
    }
  }

  m.boundary_.resize(m.edges_.size());
  double h = 0.0;
  for (std::size_t e = 0; e < m.edges_.size(); ++e) {
    m.boundary_[e] = use_count[e] == 1;
    h = std::max(h, m.edge_length(e));
  }
  m.h_ = h;
  return m;
}

/// Uniform refinement: the structured mesh with twice the subdivisions.
inline Mesh refine(const Mesh& mesh) { return build_structured_mesh(mesh.rect(), 2 * mesh.n()); }

/// Plain-text dump with VERTICES, TRIANGLES and EDGES sections.
inline void write_mesh(std::ostream& os, const Mesh& mesh) {
  const auto old_precision = os.precision(17);
  os << "VERTICES " << mesh.num_vertices() << '\n';
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
    os << v << ' ' << mesh.vertices()[v].x() << ' ' << mesh.vertices()[v].y() << '\n';
  os << "TRIANGLES " << mesh.num_triangles() << '\n';
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    os << t << ' ' << tri[0] << ' ' << tri[1] << ' ' << tri[2] << '\n';
  }
  os << "EDGES " << mesh.num_edges() << '\n';
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const auto& ed = mesh.edges()[e];
    os << e << ' ' << ed[0] << ' ' << ed[1] << ' ' << (mesh.boundary_edge_flags()[e] ? 1 : 0)
       << '\n';
  }
  os.precision(old_precision);
}

}  // namespace rtmix
