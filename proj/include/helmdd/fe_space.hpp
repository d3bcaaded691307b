#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <set>
#include <vector>

#include <Eigen/LU>

#include "helmdd/mesh.hpp"

namespace helmdd {

namespace shape {

/// Scalar Lagrange shape functions on the reference triangle, nodes at
/// (a/p, b/p), a+b <= p, enumerated b-major: (0,0),(1,0),...,(0,1),...
inline int num_nodes(int p) { return (p + 1) * (p + 2) / 2; }

inline void values(int p, double xi, double eta, double* out) {
  const double l1 = 1.0 - xi - eta;
  const double l2 = xi;
  const double l3 = eta;
  if (p == 1) {
    out[0] = l1;
    out[1] = l2;
    out[2] = l3;
    return;
  }
  // p == 2, order: (0,0),(1,0),(2,0),(0,1),(1,1),(0,2)
  out[0] = l1 * (2.0 * l1 - 1.0);
  out[1] = 4.0 * l1 * l2;
  out[2] = l2 * (2.0 * l2 - 1.0);
  out[3] = 4.0 * l1 * l3;
  out[4] = 4.0 * l2 * l3;
  out[5] = l3 * (2.0 * l3 - 1.0);
}

/// Reference gradients (d/dxi, d/deta), same ordering as values().
inline void gradients(int p, double xi, double eta, Point* out) {
  const double l1 = 1.0 - xi - eta;
  const double l2 = xi;
  const double l3 = eta;
  if (p == 1) {
    out[0] = {-1.0, -1.0};
    out[1] = {1.0, 0.0};
    out[2] = {0.0, 1.0};
    return;
  }
  const double d1 = 4.0 * l1 - 1.0;
  const double d2 = 4.0 * l2 - 1.0;
  const double d3 = 4.0 * l3 - 1.0;
  out[0] = {-d1, -d1};
  out[1] = {4.0 * (l1 - l2), -4.0 * l2};
  out[2] = {d2, 0.0};
  out[3] = {-4.0 * l3, 4.0 * (l1 - l3)};
  out[4] = {4.0 * l3, 4.0 * l2};
  out[5] = {0.0, d3};
}

/// 1-d Lagrange shapes on [0,1] with nodes m/p.
inline void edge_values(int p, double t, double* out) {
  if (p == 1) {
    out[0] = 1.0 - t;
    out[1] = t;
    return;
  }
  out[0] = (1.0 - t) * (1.0 - 2.0 * t);
  out[1] = 4.0 * t * (1.0 - t);
  out[2] = t * (2.0 * t - 1.0);
}

}  // namespace shape

/// Degree-p Lagrange space on a StructuredMesh. On this mesh the Lagrange
/// nodes of degree p are exactly the (p*n+1)^2 lattice points, which keeps
/// all node bookkeeping integer-exact.
class FeSpace {
 public:
  FeSpace(const StructuredMesh& mesh, int degree, std::set<Side> dirichlet_sides)
      : mesh_(&mesh), p_(degree), dirichlet_(std::move(dirichlet_sides)) {
    HELMDD_REQUIRE(p_ == 1 || p_ == 2, "fe space: unsupported degree");
    const int n = mesh.cells_per_side();
    nl_ = p_ * n + 1;
    gx_ = mesh.hx() / p_;
    gy_ = mesh.hy() / p_;
    dof_of_node_.assign(static_cast<std::size_t>(nl_) * nl_, -1);
    for (int j = 0; j < nl_; ++j) {
      for (int i = 0; i < nl_; ++i) {
        if (node_on_dirichlet(i, j)) continue;
        const int node = j * nl_ + i;
        dof_of_node_[node] = static_cast<int>(node_of_dof_.size());
        node_of_dof_.push_back(node);
      }
    }
  }

  const StructuredMesh& mesh() const { return *mesh_; }
  int degree() const { return p_; }
  const std::set<Side>& dirichlet_sides() const { return dirichlet_; }

  int num_nodes() const { return nl_ * nl_; }
  int num_dofs() const { return static_cast<int>(node_of_dof_.size()); }
  int nodes_per_row() const { return nl_; }

  int node_id(int i, int j) const { return j * nl_ + i; }
  Point node_coords(int node) const {
    const int i = node % nl_;
    const int j = node / nl_;
    return {mesh_->domain().x0 + i * gx_, mesh_->domain().y0 + j * gy_};
  }

  int dof_of_node(int node) const { return dof_of_node_[node]; }
  int node_of_dof(int dof) const { return node_of_dof_[dof]; }
  Point dof_coords(int dof) const { return node_coords(node_of_dof_[dof]); }

  bool node_on_boundary(int node) const {
    const int i = node % nl_;
    const int j = node / nl_;
    return i == 0 || j == 0 || i == nl_ - 1 || j == nl_ - 1;
  }

  int nodes_per_element() const { return shape::num_nodes(p_); }

  /// Global node ids of element e, in the reference enumeration order.
  void element_nodes(int e, int* out) const {
    const int n = mesh_->cells_per_side();
    const int cell = e / 2;
    const int cx = cell % n;
    const int cy = cell / n;
    const int bx = p_ * cx;
    const int by = p_ * cy;
    int m = 0;
    if (e % 2 == 0) {
      for (int b = 0; b <= p_; ++b)
        for (int a = 0; a + b <= p_; ++a) out[m++] = node_id(bx + a + b, by + b);
    } else {
      for (int b = 0; b <= p_; ++b)
        for (int a = 0; a + b <= p_; ++a) out[m++] = node_id(bx + a, by + a + b);
    }
  }

  /// Element affine map data: x = v0 + J * (xi, eta).
  struct ElementMap {
    Point v0;
    Eigen::Matrix2d jac;
    Eigen::Matrix2d jac_inv_t;
    double det;
  };

  ElementMap element_map(int e) const {
    const auto tri = mesh_->triangle(e);
    const Point v0 = mesh_->vertex(tri[0]);
    Eigen::Matrix2d jac;
    jac.col(0) = mesh_->vertex(tri[1]) - v0;
    jac.col(1) = mesh_->vertex(tri[2]) - v0;
    ElementMap map{v0, jac, jac.inverse().transpose(), jac.determinant()};
    return map;
  }

  /// Restriction of a full-node-set vector to the dof set and its
  /// zero-extension inverse (eliminated Dirichlet dofs read as zero).
  Vec reduce(const Vec& nodal) const {
    HELMDD_REQUIRE(nodal.size() == num_nodes(), "reduce: size mismatch");
    Vec v(num_dofs());
    for (int d = 0; d < num_dofs(); ++d) v[d] = nodal[node_of_dof_[d]];
    return v;
  }
  Vec expand(const Vec& dofs) const {
    HELMDD_REQUIRE(dofs.size() == num_dofs(), "expand: size mismatch");
    Vec v = Vec::Zero(num_nodes());
    for (int d = 0; d < num_dofs(); ++d) v[node_of_dof_[d]] = dofs[d];
    return v;
  }

 private:
  bool node_on_dirichlet(int i, int j) const {
    if (dirichlet_.count(Side::left) && i == 0) return true;
    if (dirichlet_.count(Side::right) && i == nl_ - 1) return true;
    if (dirichlet_.count(Side::bottom) && j == 0) return true;
    if (dirichlet_.count(Side::top) && j == nl_ - 1) return true;
    return false;
  }

  const StructuredMesh* mesh_;
  int p_;
  std::set<Side> dirichlet_;
  int nl_;
  double gx_, gy_;
  std::vector<int> dof_of_node_;
  std::vector<int> node_of_dof_;
};

inline FeSpace build_fe_space(const StructuredMesh& mesh, int degree,
                              std::set<Side> dirichlet_sides = {}) {
  return FeSpace(mesh, degree, std::move(dirichlet_sides));
}

/// Coefficient vector over the dof set of a space.
struct NodalField {
  const FeSpace* space = nullptr;
  Vec coeffs;
};

/// V_j = f(x_j) over the dof set.
template <class F>
NodalField nodal_interpolate(const FeSpace& space, F&& f) {
  NodalField field{&space, Vec(space.num_dofs())};
  for (int d = 0; d < space.num_dofs(); ++d)
    field.coeffs[d] = f(space.dof_coords(d));
  return field;
}

/// Point evaluation of a dof vector; Dirichlet nodes contribute zero.
class FieldEvaluator {
 public:
  FieldEvaluator(const FeSpace& space, const Vec& dofs)
      : space_(&space), dofs_(&dofs) {
    HELMDD_REQUIRE(dofs.size() == space.num_dofs(), "field evaluator: size mismatch");
  }

  cplx value(const Point& x) const {
    cplx v;
    Eigen::Vector2cd g;
    eval(x, v, g, false);
    return v;
  }

  /// Value and physical gradient at x.
  void value_and_gradient(const Point& x, cplx& value, Eigen::Vector2cd& grad) const {
    eval(x, value, grad, true);
  }

 private:
  void eval(const Point& x, cplx& value, Eigen::Vector2cd& grad, bool want_grad) const {
    const FeSpace& sp = *space_;
    const int e = sp.mesh().locate_element(x);
    const auto map = sp.element_map(e);
    const Point ref = map.jac.inverse() * (x - map.v0);
    const int nn = sp.nodes_per_element();
    double vals[6];
    Point grads[6];
    shape::values(sp.degree(), ref.x(), ref.y(), vals);
    if (want_grad) shape::gradients(sp.degree(), ref.x(), ref.y(), grads);
    int nodes[6];
    sp.element_nodes(e, nodes);
    value = 0.0;
    grad.setZero();
    for (int m = 0; m < nn; ++m) {
      const int dof = sp.dof_of_node(nodes[m]);
      if (dof < 0) continue;
      const cplx c = (*dofs_)[dof];
      value += c * vals[m];
      if (want_grad) grad += c * (map.jac_inv_t * grads[m]);
    }
  }

  const FeSpace* space_;
  const Vec* dofs_;
};

}  // namespace helmdd
