#pragma once

#include <memory>

#include "helmdd/assembly.hpp"
#include "helmdd/factorization.hpp"
#include "helmdd/fe_space.hpp"
#include "helmdd/weighted.hpp"

namespace helmdd {

/// Piecewise-polynomial coarse space on an ancestor mesh level, embedded in
/// the fine space through the nodal values of the coarse basis functions:
/// (R_0)_{pj} = Phi_p(x_j).
struct CoarseSpace {
  const FeSpace* fine = nullptr;
  const FeSpace* coarse = nullptr;
  SparseComplexMatrix r0;  // coarse dofs x fine dofs
  double coarsening = 1.0; // H_coarse / h

  Vec restrict_fine(const Vec& v) const { return r0.apply(v); }
  Vec embed(const Vec& w) const { return r0.apply_adjoint(w); }  // real entries
};

inline CoarseSpace build_coarse(const FeSpace& fine, const FeSpace& coarse) {
  HELMDD_REQUIRE(fine.degree() == coarse.degree(),
                 "coarse space: degrees of fine and coarse spaces must match");
  HELMDD_REQUIRE(fine.dirichlet_sides() == coarse.dirichlet_sides(),
                 "coarse space: boundary conditions must mirror the fine space");
  const int nf = fine.mesh().cells_per_side();
  const int nc = coarse.mesh().cells_per_side();
  HELMDD_REQUIRE(nc >= 1 && nf % nc == 0,
                 "coarse space: coarse level is not an ancestor of the fine level");
  CoarseSpace cs;
  cs.fine = &fine;
  cs.coarse = &coarse;
  cs.coarsening = static_cast<double>(nf) / nc;

  const int p = coarse.degree();
  const int nb = coarse.nodes_per_element();
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(fine.num_dofs()) * nb);
  int cnodes[6];
  double vals[6];
  for (int j = 0; j < fine.num_dofs(); ++j) {
    const Point x = fine.dof_coords(j);
    const int e = coarse.mesh().locate_element(x);
    const auto map = coarse.element_map(e);
    const Point ref = map.jac.inverse() * (x - map.v0);
    shape::values(p, ref.x(), ref.y(), vals);
    coarse.element_nodes(e, cnodes);
    for (int m = 0; m < nb; ++m) {
      const int cd = coarse.dof_of_node(cnodes[m]);
      if (cd < 0 || vals[m] == 0.0) continue;
      trips.emplace_back(cd, j, cplx(vals[m], 0.0));
    }
  }
  cs.r0 = SparseComplexMatrix(coarse.num_dofs(), fine.num_dofs(), trips);
  return cs;
}

/// A_0 = R_0 A R_0^T, factorized for repeated coarse solves.
struct CoarseOperators {
  SparseComplexMatrix a0;
  std::shared_ptr<Factorization> a0_lu;
};

inline CoarseOperators coarse_galerkin_matrix(const CoarseSpace& cs,
                                              const SparseComplexMatrix& a) {
  HELMDD_REQUIRE(a.rows() == cs.r0.cols(), "coarse matrix: dimension mismatch");
  Eigen::SparseMatrix<cplx, Eigen::RowMajor> prod =
      cs.r0.eigen() * a.eigen() * cs.r0.eigen().transpose();
  CoarseOperators ops;
  ops.a0 = SparseComplexMatrix(std::move(prod));
  try {
    ops.a0_lu = std::make_shared<Factorization>(ops.a0, "coarse problem");
  } catch (const ContractError& e) {
    throw ContractError(std::string(e.what()) +
                        " (singular coarse problem: coarse space too coarse "
                        "for this wavenumber?)");
  }
  return ops;
}

/// Coefficients of the coarse Galerkin projection of v_h:
/// Q_0 V = R_0^T A_0^{-1} R_0 A V.
inline Vec apply_q0(const CoarseSpace& cs, const CoarseOperators& ops,
                    const SparseComplexMatrix& a, const Vec& v) {
  return cs.embed(ops.a0_lu->solve(cs.restrict_fine(a.apply(v))));
}

/// Euclidean adjoint of Q_0: A^dagger R_0^T A_0^{-dagger} R_0.
inline Vec apply_q0_adjoint(const CoarseSpace& cs, const CoarseOperators& ops,
                            const SparseComplexMatrix& a, const Vec& v) {
  return a.apply_adjoint(cs.embed(ops.a0_lu->solve_adjoint(cs.restrict_fine(v))));
}

/// H^1_k-orthogonal projection onto the coarse space:
/// Pi_0 = R_0^T (R_0 D_k R_0^T)^{-1} R_0 D_k.
class H1kProjector {
 public:
  H1kProjector(const CoarseSpace& cs, const SparseComplexMatrix& dk) : cs_(&cs) {
    Eigen::SparseMatrix<cplx, Eigen::RowMajor> gram =
        cs.r0.eigen() * dk.eigen() * cs.r0.eigen().transpose();
    gram_ = std::make_shared<HermitianWeight>(SparseComplexMatrix(std::move(gram)));
    dk_ = &dk;
  }

  Vec apply(const Vec& v) const {
    return cs_->embed(gram_->solve(cs_->restrict_fine(dk_->apply(v))));
  }
  Vec apply_complement(const Vec& v) const { return v - apply(v); }
  /// Euclidean adjoint of (I - Pi_0) = D_k (I - Pi_0) D_k^{-1} conjugated:
  /// (I - Pi_0)^dagger y = y - D_k R_0^T G^{-1} R_0 y.
  Vec apply_complement_adjoint(const Vec& y) const {
    return y - dk_->apply(cs_->embed(gram_->solve(cs_->restrict_fine(y))));
  }

 private:
  const CoarseSpace* cs_;
  const SparseComplexMatrix* dk_;
  std::shared_ptr<HermitianWeight> gram_;
};

/// Discrete surrogate of the adjoint-approximation quantity: the
/// L^2 -> H^1_k operator norm of f -> (I - Pi_0) S*_h f, where S*_h solves
/// the discrete adjoint problem A^dagger U = M f.
inline OperatorNormResult estimate_eta(const Factorization& a_lu,
                                       const H1kProjector& pi0,
                                       const HermitianWeight& mass,
                                       const HermitianWeight& dk, NormMode mode,
                                       double tol = 1e-3, int max_iterations = 400,
                                       std::uint64_t seed = 0xe7a) {
  auto op = [&](const Vec& f) { return pi0.apply_complement(a_lu.solve_adjoint(mass.apply(f))); };
  auto op_adj = [&](const Vec& y) {
    return mass.apply(a_lu.solve(pi0.apply_complement_adjoint(y)));
  };
  return operator_norm(op, op_adj, mass, dk, mode, tol, max_iterations, seed);
}

struct SigmaEstimates {
  double sigma_l2 = 0.0;
  double sigma_h1 = 0.0;
};

/// Operator norms of I - Q_0 measured H^1_k -> L^2 and H^1_k -> H^1_k.
inline SigmaEstimates estimate_sigmas(const CoarseSpace& cs, const CoarseOperators& ops,
                                      const SparseComplexMatrix& a,
                                      const HermitianWeight& mass,
                                      const HermitianWeight& dk, NormMode mode,
                                      double tol = 1e-3, int max_iterations = 400,
                                      std::uint64_t seed = 0x516) {
  auto op = [&](const Vec& v) { return Vec(v - apply_q0(cs, ops, a, v)); };
  auto op_adj = [&](const Vec& y) { return Vec(y - apply_q0_adjoint(cs, ops, a, y)); };
  SigmaEstimates est;
  est.sigma_l2 = operator_norm(op, op_adj, dk, mass, mode, tol, max_iterations, seed).norm;
  est.sigma_h1 = operator_norm(op, op_adj, dk, dk, mode, tol, max_iterations, seed).norm;
  return est;
}

/// L^2 -> H^1_k norm of the discrete solution operator f -> A^{-1} M f.
inline OperatorNormResult estimate_csol(const Factorization& a_lu,
                                        const HermitianWeight& mass,
                                        const HermitianWeight& dk, NormMode mode,
                                        double tol = 1e-3, int max_iterations = 400,
                                        std::uint64_t seed = 0xc501) {
  auto op = [&](const Vec& f) { return a_lu.solve(mass.apply(f)); };
  auto op_adj = [&](const Vec& y) { return mass.apply(a_lu.solve_adjoint(y)); };
  return operator_norm(op, op_adj, mass, dk, mode, tol, max_iterations, seed);
}

/// Discrete continuity constant of the form behind A in the D_k geometry:
/// sup |<A v, w>| / (||v|| ||w||) = || G^{-dagger} A G^{-1} ||_2, computed as
/// the D_k-weighted norm of D_k^{-1} A.
inline OperatorNormResult measure_continuity(const SparseComplexMatrix& a,
                                             const HermitianWeight& dk, NormMode mode,
                                             double tol = 1e-3, int max_iterations = 400,
                                             std::uint64_t seed = 0xcc) {
  auto op = [&](const Vec& v) { return dk.solve(a.apply(v)); };
  auto op_adj = [&](const Vec& y) { return a.apply_adjoint(dk.solve(y)); };
  return operator_norm(op, op_adj, dk, dk, mode, tol, max_iterations, seed);
}

}  // namespace helmdd
