#pragma once

#include <memory>
#include <string>
#include <vector>

#include "helmdd/coarse.hpp"
#include "helmdd/cover.hpp"

namespace helmdd {

enum class PrecondSide { left, right };

enum class OneLevelVariant { both_weighted, oras, hybrid_pair };

/// Everything the two-level hybrid preconditioner is built from.
struct PrecondInputs {
  const FeSpace* space = nullptr;
  const SparseComplexMatrix* a = nullptr;
  const SubdomainCover* cover = nullptr;
  const CoarseSpace* coarse = nullptr;
  CoefficientSet coeffs;  // local forms; identical to the global coefficients
  ProblemConfig config;
};

/// Two-level hybrid Schwarz preconditioner: a coarse Galerkin solve combined
/// multiplicatively with weighted subdomain solves,
///   B_L^{-1} = R_0^T A_0^{-1} R_0
///            + (sum_l (R^chi_l)^T A_l^{-1} R^{chi>}_l)(I - A R_0^T A_0^{-1} R_0),
/// and the mirrored right variant B_R^{-1}(A) = (B_L^{-1}(A^dagger))^dagger.
/// Factorization work happens once at construction.
class TwoLevelPreconditioner {
 public:
  TwoLevelPreconditioner(const PrecondInputs& in, PrecondSide side, int threads = 1)
      : side_(side), space_(in.space), a_(in.a), cover_(in.cover), coarse_(in.coarse) {
    HELMDD_REQUIRE(space_ && a_ && cover_ && coarse_, "preconditioner: missing inputs");
    ops_ = coarse_galerkin_matrix(*coarse_, *a_);
    const int n = cover_->size();
    dofs_.resize(n);
    restr_.resize(n);
    local_lu_.resize(n);
    local_a_.resize(n);
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t l) {
      const Subdomain& s = cover_->subdomains[l];
      dofs_[l] = local_dofs(*space_, s, in.config.local_dirichlet_cuts());
      restr_[l] = weighted_restriction(*space_, *cover_, static_cast<int>(l), dofs_[l]);
      local_a_[l] = assemble_local(*space_, s, in.coeffs, in.config);
      try {
        local_lu_[l] = std::make_shared<Factorization>(
            local_a_[l], "subdomain " + std::to_string(l));
      } catch (const ContractError& e) {
        throw ContractError("preconditioner: local solve unavailable: " +
                            std::string(e.what()));
      }
    });
  }

  PrecondSide side() const { return side_; }
  const CoarseOperators& coarse_ops() const { return ops_; }
  const CoarseSpace& coarse_space() const { return *coarse_; }
  const SparseComplexMatrix& matrix() const { return *a_; }
  int num_subdomains() const { return cover_->size(); }
  const Factorization& local_factorization(int l) const { return *local_lu_[l]; }
  const WeightedRestriction& restriction(int l) const { return restr_[l]; }
  const LocalDofs& local_dof_map(int l) const { return dofs_[l]; }

  /// Coarse-correction term R_0^T A_0^{-1} R_0 r.
  Vec coarse_solve(const Vec& r) const {
    return coarse_->embed(ops_.a0_lu->solve(coarse_->restrict_fine(r)));
  }
  Vec coarse_solve_adjoint(const Vec& r) const {
    return coarse_->embed(ops_.a0_lu->solve_adjoint(coarse_->restrict_fine(r)));
  }

  /// One-level sum with chi outside and chi> inside (the hybrid pairing).
  Vec one_level(const Vec& r) const {
    Vec u = Vec::Zero(r.size());
    for (int l = 0; l < num_subdomains(); ++l)
      restr_[l].add_transpose_chi(local_lu_[l]->solve(restr_[l].apply_chi_over(r)), u);
    return u;
  }
  /// Its Euclidean adjoint: chi> outside, chi inside, adjoint local solves.
  Vec one_level_adjoint(const Vec& r) const {
    Vec u = Vec::Zero(r.size());
    for (int l = 0; l < num_subdomains(); ++l)
      restr_[l].add_transpose_chi_over(local_lu_[l]->solve_adjoint(restr_[l].apply_chi(r)),
                                       u);
    return u;
  }

  /// B_L^{-1} r: coarse solve, residual update, then the subdomain sweep.
  Vec apply_left_composition(const Vec& r) const {
    const Vec u0 = coarse_solve(r);
    const Vec rho = r - a_->apply(u0);
    return u0 + one_level(rho);
  }
  /// B_R^{-1} r: subdomain sweep (mirrored weights) first, coarse last.
  Vec apply_right_composition(const Vec& r) const {
    const Vec t = one_level_mirrored(r);
    return t + coarse_solve(r - a_->apply(t));
  }

  /// Preconditioner application in the configured role.
  Vec apply(const Vec& r) const {
    HELMDD_REQUIRE(r.size() == a_->rows(), "preconditioner apply: dimension mismatch");
    return side_ == PrecondSide::left ? apply_left_composition(r)
                                      : apply_right_composition(r);
  }

  /// Euclidean adjoint of apply(), used by the norm estimators.
  Vec apply_adjoint(const Vec& y) const {
    if (side_ == PrecondSide::left) {
      const Vec t = one_level_adjoint(y);
      return t + coarse_solve_adjoint(y - a_->apply_adjoint(t));
    }
    const Vec u0 = coarse_solve_adjoint(y);
    const Vec rho = y - a_->apply_adjoint(u0);
    return u0 + one_level_sweep_adjoint(rho);
  }

  /// B_L^{-1}(A^dagger): the left preconditioner constructed for the adjoint
  /// problem; shares the factors through adjoint solves.
  Vec apply_left_dual(const Vec& r) const {
    const Vec u0 = coarse_solve_adjoint(r);
    const Vec rho = r - a_->apply_adjoint(u0);
    Vec u = u0;
    for (int l = 0; l < num_subdomains(); ++l)
      restr_[l].add_transpose_chi(
          local_lu_[l]->solve_adjoint(restr_[l].apply_chi_over(rho)), u);
    return u;
  }

  /// One-level baselines for comparison sweeps. No defect-norm guarantee
  /// applies to them.
  Vec apply_one_level_variant(OneLevelVariant variant, const Vec& r) const {
    Vec u = Vec::Zero(r.size());
    for (int l = 0; l < num_subdomains(); ++l) {
      Vec rl;
      switch (variant) {
        case OneLevelVariant::both_weighted:
          rl = restr_[l].apply_chi(r);
          break;
        case OneLevelVariant::oras:
          rl = restr_[l].apply_plain(r);
          break;
        case OneLevelVariant::hybrid_pair:
          rl = restr_[l].apply_chi_over(r);
          break;
      }
      restr_[l].add_transpose_chi(local_lu_[l]->solve(rl), u);
    }
    return u;
  }

 private:
  // the (R^{chi>})^T A_l^{-1} R^chi sum used by the right composition
  Vec one_level_mirrored(const Vec& r) const {
    Vec u = Vec::Zero(r.size());
    for (int l = 0; l < num_subdomains(); ++l)
      restr_[l].add_transpose_chi_over(local_lu_[l]->solve(restr_[l].apply_chi(r)), u);
    return u;
  }
  Vec one_level_sweep_adjoint(const Vec& r) const {
    Vec u = Vec::Zero(r.size());
    for (int l = 0; l < num_subdomains(); ++l)
      restr_[l].add_transpose_chi(local_lu_[l]->solve_adjoint(restr_[l].apply_chi_over(r)),
                                  u);
    return u;
  }

  PrecondSide side_;
  const FeSpace* space_;
  const SparseComplexMatrix* a_;
  const SubdomainCover* cover_;
  const CoarseSpace* coarse_;
  CoarseOperators ops_;
  std::vector<LocalDofs> dofs_;
  std::vector<WeightedRestriction> restr_;
  std::vector<SparseComplexMatrix> local_a_;
  std::vector<std::shared_ptr<Factorization>> local_lu_;
};

inline TwoLevelPreconditioner build_preconditioner(const PrecondInputs& in,
                                                   PrecondSide side, int threads = 1) {
  return TwoLevelPreconditioner(in, side, threads);
}

/// The variational route to Q v_h: per-subdomain solves of
///   a_l(Q_l u, v) = a(u, R*_l I_h(chi>_l v))  for every local basis v,
/// accumulated as Q_0 V + sum_l I_h(chi_l Q_l (I - Q_0) V) through nodal
/// multiplication, with the coarse projection solved against a directly
/// assembled coarse matrix and quadrature right-hand sides. No use of the
/// assembled fine matrix A anywhere on this path.
inline Vec apply_q_operator_form(const PrecondInputs& in,
                                 const TwoLevelPreconditioner& p, const Vec& v) {
  const FeSpace& space = *in.space;
  const FeSpace& coarse = *in.coarse->coarse;
  const CoefficientSet& cs = in.coeffs;

  // ---- coarse projection: a(Q0 u, Phi_q) = a(u, Phi_q) for all q
  SparseComplexMatrix a0_direct = assemble_global(coarse, cs, in.config);
  Factorization a0_lu(a0_direct, "coarse (direct assembly)");
  const AssemblyDomain global_dom = global_assembly_domain(space, cs, in.config);
  // element/edge adjacency of fine nodes, for localized form evaluations
  std::vector<std::vector<int>> elements_of_node(space.num_nodes());
  {
    int nodes[6];
    for (int e = 0; e < space.mesh().num_triangles(); ++e) {
      space.element_nodes(e, nodes);
      for (int m = 0; m < space.nodes_per_element(); ++m)
        elements_of_node[nodes[m]].push_back(e);
    }
  }
  std::vector<std::vector<int>> edges_of_node(space.num_nodes());
  for (int g = 0; g < static_cast<int>(global_dom.edges.size()); ++g)
    for (int m = 0; m <= space.degree(); ++m)
      edges_of_node[global_dom.edges[g].nodes[m]].push_back(g);

  auto localized_form = [&](const Vec& u, const Vec& w,
                            const std::vector<int>& support_nodes) -> cplx {
    AssemblyDomain dom;
    std::vector<char> emark(space.mesh().num_triangles(), 0);
    std::vector<char> gmark(global_dom.edges.size(), 0);
    for (int node : support_nodes) {
      for (int e : elements_of_node[node])
        if (!emark[e]) {
          emark[e] = 1;
          dom.elements.push_back(e);
        }
      for (int g : edges_of_node[node])
        if (!gmark[g]) {
          gmark[g] = 1;
          dom.edges.push_back(global_dom.edges[g]);
        }
    }
    return evaluate_form(space, cs, dom, u, w);
  };

  Vec coarse_rhs(coarse.num_dofs());
  for (int q = 0; q < coarse.num_dofs(); ++q) {
    Vec cq = Vec::Zero(coarse.num_dofs());
    cq[q] = 1.0;
    Vec wq = in.coarse->embed(cq);
    std::vector<int> support;
    for (int d = 0; d < space.num_dofs(); ++d)
      if (wq[d] != cplx(0.0, 0.0)) support.push_back(space.node_of_dof(d));
    coarse_rhs[q] = localized_form(v, wq, support);
  }
  const Vec q0v = in.coarse->embed(a0_lu.solve(coarse_rhs));
  const Vec remainder = v - q0v;

  // ---- subdomain corrections
  Vec result = q0v;
  for (int l = 0; l < p.num_subdomains(); ++l) {
    const LocalDofs& dofs = p.local_dof_map(l);
    const CutoffPair& cut = in.cover->cutoffs(l);
    const Eigen::Index nl = static_cast<Eigen::Index>(dofs.global_dof.size());
    Vec rhs(nl);
    for (Eigen::Index i = 0; i < nl; ++i) {
      const int node = dofs.node_of_local[i];
      const double weight = cut.chi_over(space.node_coords(node));
      if (weight == 0.0) {
        rhs[i] = 0.0;
        continue;
      }
      // I_h(chi> phi_i) has the single coefficient chi>(x_i) at node i
      Vec w = Vec::Zero(space.num_dofs());
      w[dofs.global_dof[i]] = weight;
      rhs[i] = localized_form(remainder, w, {node});
    }
    const Vec ql = p.local_factorization(l).solve(rhs);
    for (Eigen::Index i = 0; i < nl; ++i) {
      const double chi = cut.chi(space.node_coords(dofs.node_of_local[i]));
      result[dofs.global_dof[i]] += chi * ql[i];
    }
  }
  return result;
}

struct DefectNorms {
  OperatorNormResult left;   // ||I - B_L^{-1} A||_{D_k}
  OperatorNormResult right;  // ||I - A B_R^{-1}||_{D_k^{-1}}
};

inline OperatorNormResult norm_defect(const TwoLevelPreconditioner& p,
                                      const SparseComplexMatrix& a,
                                      const HermitianWeight& dk, NormMode mode,
                                      double tol = 1e-3, int max_iterations = 400,
                                      std::uint64_t seed = 0xdef) {
  if (p.side() == PrecondSide::left) {
    auto op = [&](const Vec& v) { return Vec(v - p.apply(a.apply(v))); };
    auto op_adj = [&](const Vec& y) { return Vec(y - a.apply_adjoint(p.apply_adjoint(y))); };
    return operator_norm(op, op_adj, weight_ops(dk), weight_ops(dk), mode, tol,
                         max_iterations, seed);
  }
  auto op = [&](const Vec& v) { return Vec(v - a.apply(p.apply(v))); };
  auto op_adj = [&](const Vec& y) { return Vec(y - p.apply_adjoint(a.apply_adjoint(y))); };
  const WeightOps w = inverse_weight_ops(dk);
  return operator_norm(op, op_adj, w, w, mode, tol, max_iterations, seed);
}

/// ||I - B_L^{-1}(A^dagger) A^dagger||_{D_k}, the dual quantity matching the
/// right-preconditioned defect.
inline OperatorNormResult norm_defect_dual(const TwoLevelPreconditioner& p,
                                           const SparseComplexMatrix& a,
                                           const HermitianWeight& dk, NormMode mode,
                                           double tol = 1e-3, int max_iterations = 400,
                                           std::uint64_t seed = 0xdef) {
  auto op = [&](const Vec& v) { return Vec(v - p.apply_left_dual(a.apply_adjoint(v))); };
  // Euclidean adjoint of B_L^{-1}(A^dagger) A^dagger is A B_R^{-1}(A)
  auto op_adj = [&](const Vec& y) {
    return Vec(y - a.apply(p.apply_right_composition(y)));
  };
  return operator_norm(op, op_adj, weight_ops(dk), weight_ops(dk), mode, tol,
                       max_iterations, seed);
}

}  // namespace helmdd
