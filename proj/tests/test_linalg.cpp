#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "helmdd/assembly.hpp"
#include "helmdd/factorization.hpp"
#include "helmdd/weighted.hpp"

using namespace helmdd;

namespace {

SparseComplexMatrix sparse_identity(Eigen::Index n) {
  std::vector<Triplet> t;
  for (Eigen::Index i = 0; i < n; ++i) t.emplace_back(i, i, 1.0);
  return SparseComplexMatrix(n, n, t);
}

SparseComplexMatrix from_dense(const DenseMat& d) {
  return SparseComplexMatrix(Eigen::SparseMatrix<cplx, Eigen::RowMajor>(d.sparseView()));
}

}  // namespace

TEST_CASE("factorization solves, adjoint solves, and failure reporting") {
  SparseComplexMatrix id = sparse_identity(5);
  Factorization flu(id);
  Rng rng(3);
  Vec b = rng.complex_vector(5);
  CHECK((flu.solve(b) - b).norm() == 0.0);

  std::vector<Triplet> t{{0, 0, cplx(0.0, 2.0)}};
  Factorization f1(SparseComplexMatrix(1, 1, t));
  Vec rhs(1);
  rhs[0] = 2.0;
  CHECK(std::abs(f1.solve(rhs)[0] - cplx(0.0, -1.0)) < 1e-15);

  DenseMat rd = DenseMat::Random(200, 200) + 10.0 * DenseMat::Identity(200, 200);
  SparseComplexMatrix rs = from_dense(rd);
  Factorization flu200(rs);
  double worst = 0.0;
  for (int j = 0; j < 200; ++j) {
    Vec e = Vec::Zero(200);
    e[j] = 1.0;
    Vec col = flu200.solve(e);
    worst = std::max(worst, (rd * col - e).lpNorm<Eigen::Infinity>());
  }
  CHECK(worst < 1e-9);
  CHECK(flu200.probe_residual() < 1e-10);

  Vec badb = rng.complex_vector(200);
  Vec adj = flu200.solve_adjoint(badb);
  CHECK((rd.adjoint() * adj - badb).norm() < 1e-9);

  std::vector<Triplet> sing{{0, 0, 1.0}, {1, 1, 0.0}};
  CHECK_THROWS_AS(Factorization(SparseComplexMatrix(2, 2, sing), "local block 3"),
                  ContractError);
}

TEST_CASE("inner product convention is conjugate-linear in the second slot") {
  SparseComplexMatrix id = sparse_identity(2);
  Vec e1 = Vec::Zero(2), e2 = Vec::Zero(2);
  e1[0] = 1.0;
  e2[1] = 1.0;
  CHECK(weighted_inner(id, e1, e1) == cplx(1.0));
  CHECK(weighted_inner(id, iu * e1, e1) == iu);
  CHECK(weighted_inner(id, e1, iu * e1) == -iu);
  CHECK(weighted_norm(id, Vec::Zero(2)) == 0.0);
}

TEST_CASE("polarization identity reconstructs the weighted inner product") {
  StructuredMesh mesh(unit_square(), 8, 0);
  FeSpace space = build_fe_space(mesh, 1);
  NormMatrices nm = assemble_norm_matrices(space, 3.0);
  Rng rng(17);
  Vec u = rng.complex_vector(space.num_dofs());
  Vec v = rng.complex_vector(space.num_dofs());
  auto nsq = [&](const Vec& w) { return weighted_inner(nm.dk, w, w).real(); };
  const cplx pol = 0.25 * (nsq(u + v) - nsq(u - v) + iu * nsq(u + iu * v) -
                           iu * nsq(u - iu * v));
  CHECK(std::abs(pol - weighted_inner(nm.dk, u, v)) < 1e-12 * u.norm() * v.norm());
}

TEST_CASE("adjoint bookkeeping between D and D^{-1} geometries") {
  StructuredMesh mesh(unit_square(), 6, 0);
  FeSpace space = build_fe_space(mesh, 2);
  NormMatrices nm = assemble_norm_matrices(space, 2.0);
  HermitianWeight dk(nm.dk);
  Rng rng(23);
  Vec v1 = rng.complex_vector(space.num_dofs());
  Vec v2 = rng.complex_vector(space.num_dofs());
  Vec w1 = dk.apply(v1), w2 = dk.apply(v2);
  const cplx lhs = dk.inner(v1, v2);
  const cplx rhs = w2.dot(dk.solve(w1));
  CHECK(std::abs(lhs - rhs) < 1e-10 * std::abs(lhs));
  // Cholesky congruence: ||v||_D == ||G^† v||_2 and solve_gt inverts apply_gt
  CHECK(std::abs(dk.norm(v1) - dk.apply_gt(v1).norm()) < 1e-12 * dk.norm(v1));
  CHECK((dk.solve_gt(dk.apply_gt(v1)) - v1).norm() < 1e-10 * v1.norm());
  CHECK((dk.solve_g(dk.apply_g(v1)) - v1).norm() < 1e-10 * v1.norm());
}

TEST_CASE("dense oracle equivalences") {
  DenseMat ad = DenseMat::Random(50, 50) + 6.0 * DenseMat::Identity(50, 50);
  SparseComplexMatrix as = from_dense(ad);
  Factorization sparse_lu(as);
  DenseOracle oracle(as);
  Rng rng(5);
  for (int s = 0; s < 50; ++s) {
    Vec b = rng.complex_vector(50);
    CHECK((sparse_lu.solve(b) - oracle.solve(b)).lpNorm<Eigen::Infinity>() < 1e-10);
  }
  // diagonal inverse
  DenseMat diag = DenseMat::Zero(4, 4);
  diag.diagonal() << cplx(2, 0), cplx(0, 4), cplx(1, 1), cplx(-3, 0);
  DenseOracle dor(from_dense(diag));
  DenseMat inv = dor.inverse();
  for (int i = 0; i < 4; ++i)
    CHECK(std::abs(inv(i, i) - 1.0 / diag(i, i)) < 1e-14);
  // (A^†)^{-1} == (A^{-1})^†
  DenseOracle oadj(from_dense(ad.adjoint()));
  CHECK((oadj.inverse() - oracle.inverse().adjoint()).cwiseAbs().maxCoeff() < 1e-10);
  // ceiling
  CHECK_THROWS_AS(DenseOracle(DenseMat::Identity(2501, 2501)), ContractError);
}

TEST_CASE("operator norms: trivial cases, dense vs power agreement") {
  StructuredMesh mesh(unit_square(), 12, 0);
  FeSpace space = build_fe_space(mesh, 1);  // 169 dofs
  NormMatrices nm = assemble_norm_matrices(space, 4.0);
  HermitianWeight dk(nm.dk);
  const Eigen::Index n = space.num_dofs();

  auto zero_op = [&](const Vec& v) { return Vec(Vec::Zero(n)); };
  CHECK(operator_norm_weighted(zero_op, zero_op, dk, NormMode::dense).norm == 0.0);
  CHECK(operator_norm_weighted(zero_op, zero_op, dk, NormMode::power).norm < 1e-12);

  auto twice = [&](const Vec& v) { return Vec(2.0 * v); };
  CHECK(std::abs(operator_norm_weighted(twice, twice, dk, NormMode::dense).norm - 2.0) <
        1e-12);
  CHECK(std::abs(operator_norm_weighted(twice, twice, dk, NormMode::power).norm - 2.0) <
        2e-3);

  DenseMat e = DenseMat::Random(n, n);
  auto op = [&](const Vec& v) { return Vec(e * v); };
  auto opadj = [&](const Vec& v) { return Vec(e.adjoint() * v); };
  const double dense = operator_norm_weighted(op, opadj, dk, NormMode::dense).norm;
  const auto power = operator_norm_weighted(op, opadj, dk, NormMode::power, 1e-4, 2000);
  CHECK(power.converged);
  CHECK(std::abs(power.norm - dense) < 1e-3 * dense);

  // independent oracle for the congruence identity: 2-norm via Eigen SVD
  DenseMat gt(n, n), gtinv(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Vec ej = Vec::Zero(n);
    ej[j] = 1.0;
    gt.col(j) = dk.apply_gt(ej);
    gtinv.col(j) = dk.solve_gt(ej);
  }
  Eigen::JacobiSVD<DenseMat> svd(gt * e * gtinv);
  CHECK(std::abs(svd.singularValues()[0] - dense) < 1e-9 * dense);
}

TEST_CASE("extreme eigenvalues of a weight matrix") {
  DenseMat d = DenseMat::Zero(6, 6);
  d.diagonal() << 0.5, 1.0, 2.0, 3.0, 7.0, 9.0;
  HermitianWeight w(from_dense(d));
  ExtremeEigs ee = hermitian_extreme_eigs(w, 1e-6, 5000);
  CHECK(std::abs(ee.max - 9.0) < 1e-3 * 9.0);
  CHECK(std::abs(ee.min - 0.5) < 1e-3 * 0.5);
}

TEST_CASE("matrix market round trip") {
  Rng rng(31);
  std::vector<Triplet> t;
  for (int s = 0; s < 60; ++s)
    t.emplace_back(static_cast<int>(rng.raw() % 12), static_cast<int>(rng.raw() % 9),
                   rng.normal_complex());
  SparseComplexMatrix m(12, 9, t);
  std::stringstream ss;
  write_matrix_market(m, ss);
  SparseComplexMatrix back = read_matrix_market(ss);
  CHECK(back.rows() == m.rows());
  CHECK(back.cols() == m.cols());
  CHECK((back.dense() - m.dense()).cwiseAbs().maxCoeff() < 1e-15);
}
