#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "helmdd/cover.hpp"

using namespace helmdd;

TEST_CASE("piecewise polynomials: convolution smooths a step exactly") {
  PiecewisePoly step = PiecewisePoly::step_up(0.25);
  PiecewisePoly ramp = step.convolve_box(0.125);
  CHECK(ramp.eval(0.0) == 0.0);
  CHECK(ramp.eval(0.5) == 1.0);
  CHECK(std::abs(ramp.eval(0.25) - 0.5) < 1e-15);
  CHECK(std::abs(ramp.eval(0.25 + 0.0625) - 0.75) < 1e-14);
  // hat convolution gives a C^1 quadratic smoothstep; midpoint value 1/2
  PiecewisePoly smooth = step.convolve_hat(0.1);
  CHECK(std::abs(smooth.eval(0.25) - 0.5) < 1e-14);
  CHECK(std::abs(smooth.eval(0.1)) < 1e-13);
  CHECK(std::abs(smooth.eval(0.4) - 1.0) < 1e-13);
  // snapping restores exact plateaus
  PiecewisePoly snapped = smooth.snapped({0.0, 1.0});
  CHECK(snapped.eval(0.1) == 0.0);
  CHECK(snapped.eval(0.4) == 1.0);
  // derivative continuity at the transition edges
  const double d1 = smooth.eval_derivative(0.15 - 1e-9, 1);
  const double d2 = smooth.eval_derivative(0.15 + 1e-9, 1);
  CHECK(std::abs(d1 - d2) < 1e-6);
}

TEST_CASE("degenerate single-subdomain cover") {
  StructuredMesh mesh(unit_square(), 8, 0);
  SubdomainCover cover = build_cover(mesh, 5.0, 2.0, 0.5);
  REQUIRE(cover.size() == 1);
  CHECK(cover.lambda() == 1);
  build_cutoffs(cover, 1);
  Rng rng(2);
  for (int s = 0; s < 100; ++s) {
    const Point x(rng.uniform(), rng.uniform());
    CHECK(cover.cutoffs(0).chi(x) == 1.0);
    CHECK(cover.cutoffs(0).chi_over(x) == 1.0);
    CHECK(cover.cutoffs(0).chi_gradient(x).norm() == 0.0);
  }
}

TEST_CASE("2x2 cover with 50 percent overlap has lambda 4") {
  StructuredMesh mesh(unit_square(), 16, 0);
  // cores of width 1/2, pairwise overlap width 1/2
  SubdomainCover cover = build_cover(mesh, 10.0, 0.5, 0.5);
  REQUIRE(cover.size() == 4);
  CHECK(cover.ext_cells == 4);
  CHECK(cover.lambda() == 4);
  // all four subdomains contain the centre
  for (const auto& s : cover.subdomains) {
    CHECK(s.cx0 * mesh.hx() < 0.5);
    CHECK(s.cx1 * mesh.hx() > 0.5);
  }
  FeSpace space = build_fe_space(mesh, 1);
  CHECK(lambda_from_dof_membership(space, cover, false) == 4);
  CHECK(lambda_from_dof_membership(space, cover, true) == 4);
}

TEST_CASE("4x4 cover with 2-cell extension covers every element") {
  StructuredMesh mesh(unit_square(), 32, 0);
  SubdomainCover cover = build_cover(mesh, 20.0, 0.25, 4.0 / 32.0);
  REQUIRE(cover.size() == 16);
  CHECK(cover.ext_cells == 2);
  for (int cy = 0; cy < 32; ++cy)
    for (int cx = 0; cx < 32; ++cx) {
      int owners = 0;
      for (const auto& s : cover.subdomains)
        if (s.contains_cell(cx, cy)) ++owners;
      CHECK(owners >= 1);
    }
  CHECK(cover.lambda() == 9);
  FeSpace space = build_fe_space(mesh, 2);
  CHECK(lambda_from_dof_membership(space, cover, false) == 9);
}

TEST_CASE("partition of unity and enlarged cutoffs") {
  StructuredMesh mesh(unit_square(), 32, 0);
  SubdomainCover cover = build_cover(mesh, 10.0, 0.25, 4.0 / 32.0);
  for (int p : {1, 2}) {
    build_cutoffs(cover, p);
    FeSpace space = build_fe_space(mesh, p);
    // sum over nodes exactly 1 to 1e-14
    for (int d = 0; d < space.num_dofs(); d += 7)
      CHECK(std::abs(cover.pou_sum(space.dof_coords(d)) - 1.0) < 1e-14);
    // sum at random interior points (quadrature-point proxy) to 1e-13
    Rng rng(5);
    for (int s = 0; s < 500; ++s) {
      const Point x(rng.uniform(), rng.uniform());
      CHECK(std::abs(cover.pou_sum(x) - 1.0) < 1e-13);
    }
    // chi_over == 1 exactly wherever chi > 0 (sampled points and nodes)
    for (int l = 0; l < cover.size(); ++l) {
      const auto& c = cover.cutoffs(l);
      for (int s = 0; s < 400; ++s) {
        const Point x(rng.uniform(), rng.uniform());
        if (c.chi(x) > 0.0) CHECK(c.chi_over(x) == 1.0);
      }
      for (int d = 0; d < space.num_dofs(); d += 3) {
        const Point x = space.dof_coords(d);
        if (c.chi(x) > 0.0) {
          CHECK(c.chi_over(x) == 1.0);
          CHECK(c.chi_over(x) * c.chi(x) == c.chi(x));
        }
      }
    }
  }
}

TEST_CASE("cutoff derivative bound: p=1, delta=1/8 section") {
  // delta = 2 ext h = 1/8 with n=16, ext=1
  StructuredMesh mesh(unit_square(), 16, 0);
  SubdomainCover cover = build_cover(mesh, 16.0, 0.5, 1.0 / 8.0);
  REQUIRE(cover.ext_cells == 1);
  build_cutoffs(cover, 1);
  const double delta = cover.delta_min;
  CHECK(delta == 0.125);
  double max_slope = 0.0;
  const auto& c = cover.cutoffs(0);
  for (int i = 0; i <= 10000; ++i) {
    const Point x(i / 10000.0, 0.3);
    max_slope = std::max(max_slope, std::abs(c.chi_gradient(x)[0]));
  }
  CHECK(max_slope > 0.5 / delta);   // the ramp is really there
  CHECK(max_slope <= 4.0 / delta);  // measured constant at most 4
}

TEST_CASE("derivative bounds scale with delta under refinement with k") {
  // two covers with kH and k delta fixed; sup |d^a chi| * delta^a stable
  for (int p : {1, 2}) {
    std::vector<double> worst;
    for (int n : {16, 32}) {
      StructuredMesh mesh(unit_square(), n, 0);
      SubdomainCover cover = build_cover(mesh, 2.0 * n, 8.0 / n, 4.0 / n);
      build_cutoffs(cover, p);
      const double delta = cover.delta_min;
      Rng rng(9);
      double w = 0.0;
      for (int s = 0; s < 2000; ++s) {
        const Point x(rng.uniform(), rng.uniform());
        for (int a = 0; a <= p + 1; ++a)
          for (int b = 0; a + b <= p + 1; ++b) {
            const double v = std::abs(cover.cutoffs(0).chi_partial(x, a, b));
            const double vo = std::abs(cover.cutoffs(0).chi_over_partial(x, a, b));
            w = std::max(w, std::max(v, vo) * std::pow(delta, a + b));
          }
      }
      worst.push_back(w);
    }
    CHECK(worst[1] < 1.6 * worst[0] + 1.0);
    CHECK(worst[0] < 1.6 * worst[1] + 1.0);
  }
}

TEST_CASE("weighted restrictions: rows, supports, and diagonal product") {
  StructuredMesh mesh(unit_square(), 16, 0);
  // wide overlap so that the band where chi = 0 < chi_over contains nodes
  SubdomainCover cover = build_cover(mesh, 8.0, 0.5, 0.5);
  build_cutoffs(cover, 1);
  FeSpace space = build_fe_space(mesh, 1);
  const LocalDofs dofs = local_dofs(space, cover.subdomains[0], false);
  WeightedRestriction r = weighted_restriction(space, cover, 0, dofs);

  // a node deep in the core has chi == 1: unit row
  bool found_unit = false, found_zero_chi = false;
  for (Eigen::Index l = 0; l < r.local_size(); ++l) {
    if (r.chi[l] == 1.0) found_unit = true;
    if (r.chi[l] == 0.0 && r.chi_over[l] > 0.0) found_zero_chi = true;
  }
  CHECK(found_unit);
  CHECK(found_zero_chi);

  // (R^{chi>})^T R^{chi>} acts as the diagonal chi_over(x_j)^2
  Rng rng(12);
  Vec v = rng.complex_vector(space.num_dofs());
  Vec out = Vec::Zero(space.num_dofs());
  r.add_transpose_chi_over(r.apply_chi_over(v), out);
  for (Eigen::Index l = 0; l < r.local_size(); ++l) {
    const int g = r.global_dof[l];
    CHECK(std::abs(out[g] - r.chi_over[l] * r.chi_over[l] * v[g]) < 1e-14);
  }
}

TEST_CASE("local dof sets and dirichlet cuts") {
  StructuredMesh mesh(unit_square(), 16, 0);
  SubdomainCover cover = build_cover(mesh, 8.0, 0.5, 0.25);
  FeSpace space = build_fe_space(mesh, 1);
  const auto& s = cover.subdomains[0];  // bottom-left, at two walls
  const LocalDofs imp = local_dofs(space, s, false);
  const LocalDofs dir = local_dofs(space, s, true);
  const int nx = s.cx1 - s.cx0 + 1;
  CHECK(static_cast<int>(imp.global_dof.size()) == nx * nx);
  // dirichlet cuts remove the two interior sides
  CHECK(static_cast<int>(dir.global_dof.size()) == (nx - 1) * (nx - 1));
}

TEST_CASE("overlap inequalities") {
  StructuredMesh mesh(unit_square(), 32, 0);
  SubdomainCover cover = build_cover(mesh, 16.0, 0.25, 0.125);
  build_cutoffs(cover, 1);
  FeSpace space = build_fe_space(mesh, 1);
  NormMatrices nm = assemble_norm_matrices(space, 16.0);
  Rng rng(21);
  OverlapCheckReport rep = overlap_inequality_check(space, cover, nm.dk, 20, rng);
  CHECK(rep.max_ratio <= 1.0);
  CHECK(rep.max_ratio > 0.0);

  // sum_l ||v||^2_{L2(Omega_l)} <= Lambda ||v||^2_{L2(Omega)} on random v
  Vec v = rng.complex_vector(space.num_dofs());
  double local_sum = 0.0;
  for (const auto& s : cover.subdomains) {
    const LocalDofs dofs = local_dofs(space, s, false);
    AssemblyDomain dom;
    dom.dof_of_node = dofs.dof_of_node;
    dom.num_dofs = static_cast<int>(dofs.global_dof.size());
    for (int cy = s.cy0; cy < s.cy1; ++cy)
      for (int cx = s.cx0; cx < s.cx1; ++cx) {
        const int cell = cy * mesh.cells_per_side() + cx;
        dom.elements.push_back(2 * cell);
        dom.elements.push_back(2 * cell + 1);
      }
    NormMatrices local = assemble_norm_matrices_domain(space, 16.0, dom);
    Vec vl(dom.num_dofs);
    for (std::size_t m = 0; m < dofs.global_dof.size(); ++m) vl[m] = v[dofs.global_dof[m]];
    local_sum += weighted_inner(local.mass, vl, vl).real();
  }
  const double global = weighted_inner(nm.mass, v, v).real();
  CHECK(local_sum <= cover.lambda() * global * (1.0 + 1e-12));
}

TEST_CASE("local assembly: degenerate cover reproduces the global matrix") {
  StructuredMesh mesh(unit_square(), 8, 0);
  const double k = 6.0;
  ProblemConfig config;  // impedance
  CoefficientSet cs = constant_coefficients(k);
  FeSpace space = build_fe_space(mesh, 1);
  SparseComplexMatrix a = assemble_global(space, cs, config);
  SubdomainCover cover = build_cover(mesh, k, 2.0, 0.5);
  REQUIRE(cover.size() == 1);
  SparseComplexMatrix al = assemble_local(space, cover.subdomains[0], cs, config);
  CHECK((al.dense() - a.dense()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("local assembly: dirichlet cuts eliminate rows and locality holds") {
  StructuredMesh mesh(unit_square(), 16, 0);
  const double k = 8.0;
  ProblemConfig pml{TruncationMode::cartesian_pml, 0.125, k};
  FeSpace space = build_fe_space(mesh, 1, pml.dirichlet_sides());
  CoefficientSet cs = pml_coefficients(unit_square(), k, 0.125, k);
  SubdomainCover cover = build_cover(mesh, k, 0.5, 0.25);
  build_cutoffs(cover, 1);
  const auto& s = cover.subdomains[3];  // top-right, interior cuts on two sides
  const LocalDofs dofs = local_dofs(space, s, true);
  SparseComplexMatrix al = assemble_local(space, s, cs, pml);
  CHECK(al.rows() == static_cast<Eigen::Index>(dofs.global_dof.size()));

  // perturbing coefficients outside supp I_h(chi_over) leaves rows of dofs
  // inside supp chi unchanged (assembly is local)
  const CutoffPair& c = cover.cutoffs(3);
  std::vector<char> marked(mesh.num_triangles(), 0);
  int enodes[6];
  for (int e = 0; e < mesh.num_triangles(); ++e) {
    space.element_nodes(e, enodes);
    for (int m = 0; m < space.nodes_per_element(); ++m)
      if (c.chi_over(space.node_coords(enodes[m])) > 0.0) marked[e] = 1;
  }
  CoefficientSet perturbed = cs;
  perturbed.mass = [&, base = cs.mass](const Point& x) {
    return marked[mesh.locate_element(x)] ? base(x) : base(x) + cplx(3.0, 1.0);
  };
  SparseComplexMatrix ap = assemble_local(space, s, perturbed, pml);
  Eigen::MatrixXd diff = (ap.dense() - al.dense()).cwiseAbs();
  for (std::size_t m = 0; m < dofs.global_dof.size(); ++m) {
    const Point x = space.node_coords(dofs.node_of_local[m]);
    if (c.chi(x) > 0.0) {
      CHECK(diff.row(m).maxCoeff() < 1e-15);
      CHECK(diff.col(m).maxCoeff() < 1e-15);
    }
  }
}

TEST_CASE("cover csv export") {
  StructuredMesh mesh(unit_square(), 16, 0);
  SubdomainCover cover = build_cover(mesh, 8.0, 0.5, 0.25);
  build_cutoffs(cover, 1);
  FeSpace space = build_fe_space(mesh, 1);
  std::ostringstream os;
  write_cover_csv(cover, space, false, os);
  CHECK(os.str().find("index,H,delta,dofs,lambda_contribution") == 0);
}
