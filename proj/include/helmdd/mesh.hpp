#pragma once

#include <array>
#include <cmath>
#include <ostream>
#include <vector>

#include "helmdd/core.hpp"

namespace helmdd {

struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
};

inline Rect unit_square() { return Rect{0.0, 0.0, 1.0, 1.0}; }

enum class Side : int { bottom = 0, right = 1, top = 2, left = 3 };

/// Structured conforming triangulation of a rectangle: an n x n grid of
/// cells, each split along the bottom-left/top-right diagonal. Uniform
/// refinement of this grid coincides with red (midpoint) refinement, so
/// every coarse element is the union of 4 child elements.
class StructuredMesh {
 public:
  StructuredMesh(Rect domain, int cells_per_side, int level)
      : domain_(domain), n_(cells_per_side), level_(level) {
    HELMDD_REQUIRE(n_ >= 1, "mesh: cells per side must be positive");
    hx_ = domain_.width() / n_;
    hy_ = domain_.height() / n_;
  }

  const Rect& domain() const { return domain_; }
  int cells_per_side() const { return n_; }
  int level() const { return level_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  /// Max element diameter (the cell diagonal).
  double h() const { return std::hypot(hx_, hy_); }

  int num_vertices() const { return (n_ + 1) * (n_ + 1); }
  int num_triangles() const { return 2 * n_ * n_; }

  int vertex_id(int i, int j) const { return j * (n_ + 1) + i; }
  Point vertex(int v) const {
    const int i = v % (n_ + 1);
    const int j = v / (n_ + 1);
    return {domain_.x0 + i * hx_, domain_.y0 + j * hy_};
  }

  /// Element ids: 2*(cy*n + cx) is the lower triangle {y_loc <= x_loc} of
  /// cell (cx, cy); +1 is the upper one. Vertex 0 sits at the right angle.
  std::array<int, 3> triangle(int e) const {
    const int cell = e / 2;
    const int cx = cell % n_;
    const int cy = cell / n_;
    const int v00 = vertex_id(cx, cy);
    const int v10 = vertex_id(cx + 1, cy);
    const int v11 = vertex_id(cx + 1, cy + 1);
    const int v01 = vertex_id(cx, cy + 1);
    if (e % 2 == 0) return {v00, v10, v11};
    return {v00, v11, v01};
  }

  double triangle_area(int) const { return 0.5 * hx_ * hy_; }

  struct BoundaryEdge {
    int va, vb;  // vertex ids, oriented counter-clockwise around the domain
    Side side;
  };

  std::vector<BoundaryEdge> boundary_edges() const {
    std::vector<BoundaryEdge> edges;
    edges.reserve(4 * n_);
    for (int i = 0; i < n_; ++i)
      edges.push_back({vertex_id(i, 0), vertex_id(i + 1, 0), Side::bottom});
    for (int j = 0; j < n_; ++j)
      edges.push_back({vertex_id(n_, j), vertex_id(n_, j + 1), Side::right});
    for (int i = n_; i > 0; --i)
      edges.push_back({vertex_id(i, n_), vertex_id(i - 1, n_), Side::top});
    for (int j = n_; j > 0; --j)
      edges.push_back({vertex_id(0, j), vertex_id(0, j - 1), Side::left});
    return edges;
  }

  /// Cell containing (or bordering) a point; coordinates clamped to the grid.
  std::pair<int, int> locate_cell(const Point& x) const {
    int cx = static_cast<int>(std::floor((x.x() - domain_.x0) / hx_));
    int cy = static_cast<int>(std::floor((x.y() - domain_.y0) / hy_));
    cx = std::max(0, std::min(n_ - 1, cx));
    cy = std::max(0, std::min(n_ - 1, cy));
    return {cx, cy};
  }

  /// Element containing a point (lower/upper split of the located cell).
  int locate_element(const Point& x) const {
    const auto [cx, cy] = locate_cell(x);
    const double xl = (x.x() - domain_.x0) / hx_ - cx;
    const double yl = (x.y() - domain_.y0) / hy_ - cy;
    const int cell = cy * n_ + cx;
    return 2 * cell + (yl <= xl ? 0 : 1);
  }

 private:
  Rect domain_;
  int n_;
  int level_;
  double hx_, hy_;
};

/// Nested meshes: level m has n0 * 2^m cells per side.
class MeshHierarchy {
 public:
  MeshHierarchy(Rect domain, int n0, int n_levels) {
    HELMDD_REQUIRE(n0 >= 1, "mesh hierarchy: n0 must be positive");
    HELMDD_REQUIRE(n_levels >= 1, "mesh hierarchy: need at least one level");
    levels_.reserve(n_levels);
    for (int m = 0; m < n_levels; ++m)
      levels_.emplace_back(domain, n0 << m, m);
  }

  int num_levels() const { return static_cast<int>(levels_.size()); }
  const StructuredMesh& level(int m) const { return levels_.at(m); }
  const StructuredMesh& finest() const { return levels_.back(); }

 private:
  std::vector<StructuredMesh> levels_;
};

inline MeshHierarchy build_mesh_hierarchy(Rect domain, int n0, int n_levels) {
  return MeshHierarchy(domain, n0, n_levels);
}

/// Plain-text listing for debugging: one record per line.
inline void write_mesh_listing(const StructuredMesh& mesh, std::ostream& os) {
  os << "vertices " << mesh.num_vertices() << "\n";
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Point x = mesh.vertex(v);
    os << v << " " << x.x() << " " << x.y() << "\n";
  }
  os << "triangles " << mesh.num_triangles() << "\n";
  for (int e = 0; e < mesh.num_triangles(); ++e) {
    const auto t = mesh.triangle(e);
    os << e << " " << t[0] << " " << t[1] << " " << t[2] << "\n";
  }
}

}  // namespace helmdd
