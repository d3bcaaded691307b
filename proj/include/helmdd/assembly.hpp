#pragma once

#include <cmath>
#include <vector>

#include "helmdd/coefficients.hpp"
#include "helmdd/fe_space.hpp"
#include "helmdd/quadrature.hpp"
#include "helmdd/sparse.hpp"

namespace helmdd {

/// A straight mesh edge carrying a boundary integral, with its p+1 nodes.
struct EdgeGeom {
  Point a, b;
  std::array<int, 3> nodes{};  // global node ids, p+1 used
  double length = 0.0;
  bool on_global_boundary = true;
  ScalarField theta;  // impedance coefficient on this edge
};

/// Edge between two mesh vertices (axis-aligned or diagonal), with the
/// degree-p Lagrange nodes along it.
inline EdgeGeom make_edge_geom(const FeSpace& space, int vertex_a, int vertex_b) {
  const StructuredMesh& mesh = space.mesh();
  const int p = space.degree();
  const int nv = mesh.cells_per_side() + 1;
  const auto lat = [&](int v) {
    return std::pair<int, int>{p * (v % nv), p * (v / nv)};
  };
  const auto [ax, ay] = lat(vertex_a);
  const auto [bx, by] = lat(vertex_b);
  EdgeGeom e;
  e.a = mesh.vertex(vertex_a);
  e.b = mesh.vertex(vertex_b);
  e.length = (e.b - e.a).norm();
  for (int m = 0; m <= p; ++m)
    e.nodes[m] = space.node_id(ax + m * (bx - ax) / p, ay + m * (by - ay) / p);
  return e;
}

/// Element subset plus dof numbering and boundary edges over which a form is
/// assembled. The global problem uses the space's own dof map; subdomain
/// problems substitute a local one.
struct AssemblyDomain {
  std::vector<int> elements;
  std::vector<int> dof_of_node;  // node id -> domain dof, -1 eliminated
  int num_dofs = 0;
  std::vector<EdgeGeom> edges;
};

inline AssemblyDomain global_assembly_domain(const FeSpace& space,
                                             const CoefficientSet& cs,
                                             const ProblemConfig& config) {
  AssemblyDomain dom;
  dom.elements.resize(space.mesh().num_triangles());
  for (int e = 0; e < static_cast<int>(dom.elements.size()); ++e) dom.elements[e] = e;
  dom.dof_of_node.resize(space.num_nodes());
  for (int n = 0; n < space.num_nodes(); ++n) dom.dof_of_node[n] = space.dof_of_node(n);
  dom.num_dofs = space.num_dofs();
  if (config.has_boundary_term()) {
    for (const auto& be : space.mesh().boundary_edges()) {
      EdgeGeom e = make_edge_geom(space, be.va, be.vb);
      e.theta = cs.theta;
      dom.edges.push_back(std::move(e));
    }
  }
  return dom;
}

namespace detail {

/// Unconjugated contraction sum_d x_d y_d.
inline cplx dotu(const Eigen::Vector2cd& x, const Eigen::Vector2cd& y) {
  return x(0) * y(0) + x(1) * y(1);
}

inline void check_finite(const cplx& v, const char* what) {
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
    throw ContractError(std::string("assembly: non-finite coefficient (") + what + ")");
}

}  // namespace detail

/// Galerkin matrix of the form described by cs over the given domain:
/// entry (i,j) = a(phi_j, phi_i) in the domain's dof numbering.
inline SparseComplexMatrix assemble_form(const FeSpace& space, const CoefficientSet& cs,
                                         const AssemblyDomain& dom) {
  const int p = space.degree();
  const int nb = space.nodes_per_element();
  const auto& rule = tri_rule_for_degree(p);
  const double kinv = 1.0 / cs.k;
  const double kinv2 = kinv * kinv;
  HELMDD_REQUIRE(cs.k > 0.0, "assembly: wavenumber must be positive");

  std::vector<Triplet> trips;
  trips.reserve(dom.elements.size() * nb * nb + dom.edges.size() * (p + 1) * (p + 1));

  int nodes[6];
  double vals[6];
  Point ref_grads[6];
  Eigen::Vector2d phys_grads[6];

  for (int e : dom.elements) {
    const auto map = space.element_map(e);
    space.element_nodes(e, nodes);
    Eigen::Matrix<cplx, 6, 6> local = Eigen::Matrix<cplx, 6, 6>::Zero();
    for (const auto& qp : rule) {
      const Point x = map.v0 + map.jac * Point(qp.xi, qp.eta);
      const double w = qp.weight * std::abs(map.det);
      shape::values(p, qp.xi, qp.eta, vals);
      shape::gradients(p, qp.xi, qp.eta, ref_grads);
      for (int m = 0; m < nb; ++m) phys_grads[m] = map.jac_inv_t * ref_grads[m];
      const Eigen::Matrix2cd a = cs.a(x);
      const Eigen::Vector2cd b = cs.b(x);
      const Eigen::Vector2cd bt = cs.bt(x);
      const cplx mass = cs.mass(x);
      detail::check_finite(mass, "mass");
      detail::check_finite(a(0, 0) + a(1, 1) + a(0, 1) + a(1, 0), "A");
      for (int j = 0; j < nb; ++j) {
        const Eigen::Vector2cd gj = phys_grads[j].cast<cplx>();
        const Eigen::Vector2cd agj = a * gj;
        const cplx conv_j = detail::dotu(b, gj);
        for (int i = 0; i < nb; ++i) {
          // basis functions are real, so conjugation of the test slot is trivial
          const Eigen::Vector2cd gi = phys_grads[i].cast<cplx>();
          cplx val = kinv2 * detail::dotu(agj, gi);
          val += kinv * conv_j * vals[i];
          val += kinv * vals[j] * detail::dotu(bt, gi);
          val -= mass * vals[j] * vals[i];
          local(i, j) += w * val;
        }
      }
    }
    for (int i = 0; i < nb; ++i) {
      const int di = dom.dof_of_node[nodes[i]];
      if (di < 0) continue;
      for (int j = 0; j < nb; ++j) {
        const int dj = dom.dof_of_node[nodes[j]];
        if (dj < 0) continue;
        trips.emplace_back(di, dj, local(i, j));
      }
    }
  }

  const auto& erule = edge_rule_for_degree(p);
  for (const auto& edge : dom.edges) {
    const int ne = p + 1;
    Eigen::Matrix<cplx, 3, 3> local = Eigen::Matrix<cplx, 3, 3>::Zero();
    double evals[3];
    for (const auto& qp : erule) {
      const Point x = edge.a + qp.t * (edge.b - edge.a);
      const cplx th = edge.theta ? edge.theta(x) : cs.theta(x);
      detail::check_finite(th, "theta");
      shape::edge_values(p, qp.t, evals);
      const cplx factor = -iu * kinv * th * qp.weight * edge.length;
      for (int j = 0; j < ne; ++j)
        for (int i = 0; i < ne; ++i) local(i, j) += factor * evals[j] * evals[i];
    }
    for (int i = 0; i < ne; ++i) {
      const int di = dom.dof_of_node[edge.nodes[i]];
      if (di < 0) continue;
      for (int j = 0; j < ne; ++j) {
        const int dj = dom.dof_of_node[edge.nodes[j]];
        if (dj < 0) continue;
        trips.emplace_back(di, dj, local(i, j));
      }
    }
  }

  return SparseComplexMatrix(dom.num_dofs, dom.num_dofs, trips);
}

inline SparseComplexMatrix assemble_global(const FeSpace& space, const CoefficientSet& cs,
                                           const ProblemConfig& config) {
  return assemble_form(space, cs, global_assembly_domain(space, cs, config));
}

struct NormMatrices {
  SparseComplexMatrix stiffness;  // S
  SparseComplexMatrix mass;       // M
  SparseComplexMatrix dk;         // D_k = k^-2 S + M
};

/// S, M, and D_k = k^-2 S + M over an assembly domain (its dof numbering).
inline NormMatrices assemble_norm_matrices_domain(const FeSpace& space, double k,
                                                  const AssemblyDomain& dom) {
  HELMDD_REQUIRE(k > 0.0, "norm matrices: wavenumber must be positive");
  const int p = space.degree();
  const int nb = space.nodes_per_element();
  const auto& rule = tri_rule_for_degree(p);
  std::vector<Triplet> strips, mtrips;
  const std::size_t guess = dom.elements.size() * nb * nb;
  strips.reserve(guess);
  mtrips.reserve(guess);
  int nodes[6];
  double vals[6];
  Point ref_grads[6];
  Eigen::Vector2d phys_grads[6];
  for (int e : dom.elements) {
    const auto map = space.element_map(e);
    space.element_nodes(e, nodes);
    Eigen::Matrix<double, 6, 6> ls = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 6> lm = Eigen::Matrix<double, 6, 6>::Zero();
    for (const auto& qp : rule) {
      const double w = qp.weight * std::abs(map.det);
      shape::values(p, qp.xi, qp.eta, vals);
      shape::gradients(p, qp.xi, qp.eta, ref_grads);
      for (int m = 0; m < nb; ++m) phys_grads[m] = map.jac_inv_t * ref_grads[m];
      for (int j = 0; j < nb; ++j)
        for (int i = 0; i < nb; ++i) {
          ls(i, j) += w * phys_grads[j].dot(phys_grads[i]);
          lm(i, j) += w * vals[j] * vals[i];
        }
    }
    for (int i = 0; i < nb; ++i) {
      const int di = dom.dof_of_node[nodes[i]];
      if (di < 0) continue;
      for (int j = 0; j < nb; ++j) {
        const int dj = dom.dof_of_node[nodes[j]];
        if (dj < 0) continue;
        strips.emplace_back(di, dj, cplx(ls(i, j), 0.0));
        mtrips.emplace_back(di, dj, cplx(lm(i, j), 0.0));
      }
    }
  }
  NormMatrices nm;
  nm.stiffness = SparseComplexMatrix(dom.num_dofs, dom.num_dofs, strips);
  nm.mass = SparseComplexMatrix(dom.num_dofs, dom.num_dofs, mtrips);
  Eigen::SparseMatrix<cplx, Eigen::RowMajor> dk =
      (1.0 / (k * k)) * nm.stiffness.eigen() + nm.mass.eigen();
  nm.dk = SparseComplexMatrix(std::move(dk));
  return nm;
}

/// S, M, and D_k = k^-2 S + M on the dof set; <D_k V, V> equals the squared
/// k-weighted H^1 norm of the field with coefficients V.
inline NormMatrices assemble_norm_matrices(const FeSpace& space, double k) {
  AssemblyDomain dom;
  dom.elements.resize(space.mesh().num_triangles());
  for (int e = 0; e < static_cast<int>(dom.elements.size()); ++e) dom.elements[e] = e;
  dom.dof_of_node.resize(space.num_nodes());
  for (int n = 0; n < space.num_nodes(); ++n) dom.dof_of_node[n] = space.dof_of_node(n);
  dom.num_dofs = space.num_dofs();
  return assemble_norm_matrices_domain(space, k, dom);
}

/// Load vector F_i = int f conj(phi_i) + int_bnd g conj(phi_i).
template <class VolumeFn, class BoundaryFn>
Vec assemble_load(const FeSpace& space, VolumeFn&& f, BoundaryFn&& g,
                  const ProblemConfig& config) {
  const int p = space.degree();
  const int nb = space.nodes_per_element();
  const auto& rule = tri_rule_for_degree(p);
  Vec load = Vec::Zero(space.num_dofs());
  int nodes[6];
  double vals[6];
  for (int e = 0; e < space.mesh().num_triangles(); ++e) {
    const auto map = space.element_map(e);
    space.element_nodes(e, nodes);
    for (const auto& qp : rule) {
      const Point x = map.v0 + map.jac * Point(qp.xi, qp.eta);
      const cplx fv = f(x);
      const double w = qp.weight * std::abs(map.det);
      shape::values(p, qp.xi, qp.eta, vals);
      for (int i = 0; i < nb; ++i) {
        const int di = space.dof_of_node(nodes[i]);
        if (di >= 0) load[di] += w * fv * vals[i];
      }
    }
  }
  if (!config.global_dirichlet()) {
    const auto& erule = edge_rule_for_degree(p);
    double evals[3];
    for (const auto& be : space.mesh().boundary_edges()) {
      const EdgeGeom edge = make_edge_geom(space, be.va, be.vb);
      for (const auto& qp : erule) {
        const Point x = edge.a + qp.t * (edge.b - edge.a);
        const cplx gv = g(x);
        shape::edge_values(p, qp.t, evals);
        for (int i = 0; i <= p; ++i) {
          const int di = space.dof_of_node(edge.nodes[i]);
          if (di >= 0) load[di] += qp.weight * edge.length * gv * evals[i];
        }
      }
    }
  }
  return load;
}

/// Quadrature evaluation of a(u, v) for two fields given as dof vectors of
/// the space, over the element/edge lists of dom (dof numbering of dom is
/// not used). This is the matrix-free route used for cross-checks.
inline cplx evaluate_form(const FeSpace& space, const CoefficientSet& cs,
                          const AssemblyDomain& dom, const Vec& u, const Vec& v) {
  HELMDD_REQUIRE(u.size() == space.num_dofs() && v.size() == space.num_dofs(),
                 "evaluate_form: dimension mismatch");
  const int p = space.degree();
  const int nb = space.nodes_per_element();
  const auto& rule = tri_rule_for_degree(p);
  const double kinv = 1.0 / cs.k;
  const double kinv2 = kinv * kinv;
  cplx total = 0.0;
  int nodes[6];
  double vals[6];
  Point ref_grads[6];
  for (int e : dom.elements) {
    const auto map = space.element_map(e);
    space.element_nodes(e, nodes);
    for (const auto& qp : rule) {
      const Point x = map.v0 + map.jac * Point(qp.xi, qp.eta);
      shape::values(p, qp.xi, qp.eta, vals);
      shape::gradients(p, qp.xi, qp.eta, ref_grads);
      cplx uval = 0.0, vval = 0.0;
      Eigen::Vector2cd ugrad = Eigen::Vector2cd::Zero();
      Eigen::Vector2cd vgrad = Eigen::Vector2cd::Zero();
      for (int m = 0; m < nb; ++m) {
        const int d = space.dof_of_node(nodes[m]);
        if (d < 0) continue;
        const Eigen::Vector2d pg = map.jac_inv_t * ref_grads[m];
        uval += u[d] * vals[m];
        vval += v[d] * vals[m];
        ugrad += u[d] * pg.cast<cplx>();
        vgrad += v[d] * pg.cast<cplx>();
      }
      const double w = qp.weight * std::abs(map.det);
      cplx val = kinv2 * detail::dotu(cs.a(x) * ugrad, vgrad.conjugate());
      val += kinv * detail::dotu(cs.b(x), ugrad) * std::conj(vval);
      val += kinv * uval * detail::dotu(cs.bt(x), vgrad.conjugate());
      val -= cs.mass(x) * uval * std::conj(vval);
      total += w * val;
    }
  }
  const auto& erule = edge_rule_for_degree(p);
  double evals[3];
  for (const auto& edge : dom.edges) {
    for (const auto& qp : erule) {
      const Point x = edge.a + qp.t * (edge.b - edge.a);
      shape::edge_values(p, qp.t, evals);
      cplx uval = 0.0, vval = 0.0;
      for (int m = 0; m <= p; ++m) {
        const int d = space.dof_of_node(edge.nodes[m]);
        if (d < 0) continue;
        uval += u[d] * evals[m];
        vval += v[d] * evals[m];
      }
      const cplx th = edge.theta ? edge.theta(x) : cs.theta(x);
      total += -iu * kinv * th * uval * std::conj(vval) * qp.weight * edge.length;
    }
  }
  return total;
}

}  // namespace helmdd
