#pragma once

#include <cmath>
#include <functional>
#include <memory>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "helmdd/sparse.hpp"

namespace helmdd {

/// Inner product convention used throughout: conjugate-linear in the SECOND
/// slot, <U, V>_W = <W U, V>_2 = sum_i (W U)_i conj(V_i).
inline cplx euclidean_inner(const Vec& u, const Vec& v) { return v.dot(u); }

inline cplx weighted_inner(const SparseComplexMatrix& w, const Vec& u, const Vec& v) {
  HELMDD_REQUIRE(u.size() == w.cols() && v.size() == w.rows(),
                 "weighted inner: dimension mismatch");
  return v.dot(w.apply(u));
}

inline double weighted_norm(const SparseComplexMatrix& w, const Vec& v) {
  return std::sqrt(std::max(0.0, weighted_inner(w, v, v).real()));
}

/// Hermitian positive-definite weight W with a sparse Cholesky
/// W = G G^† (G = P^T L), providing applications of W, W^{-1}, G, G^†.
class HermitianWeight {
 public:
  explicit HermitianWeight(SparseComplexMatrix w) : w_(std::move(w)) {
    HELMDD_REQUIRE(w_.rows() == w_.cols(), "weight: matrix must be square");
    llt_ = std::make_shared<Solver>();
    llt_->compute(w_.eigen());
    HELMDD_REQUIRE(llt_->info() == Eigen::Success,
                   "weight: Cholesky failed (matrix not positive definite?)");
    lfactor_ = llt_->matrixL();
  }

  Eigen::Index size() const { return w_.rows(); }
  const SparseComplexMatrix& matrix() const { return w_; }

  Vec apply(const Vec& v) const { return w_.apply(v); }
  Vec solve(const Vec& v) const { return llt_->solve(v); }

  cplx inner(const Vec& u, const Vec& v) const { return weighted_inner(w_, u, v); }
  double norm(const Vec& v) const { return weighted_norm(w_, v); }

  /// y = G^† v, so that ||v||_W = ||y||_2.
  Vec apply_gt(const Vec& v) const {
    return lfactor_.adjoint() * (llt_->permutationP() * v).eval();
  }
  /// Solve G^† y = v.
  Vec solve_gt(const Vec& v) const {
    Vec y = lfactor_.adjoint().template triangularView<Eigen::Upper>().solve(v);
    return llt_->permutationP().transpose() * y;
  }
  /// y = G v.
  Vec apply_g(const Vec& v) const {
    return llt_->permutationP().transpose() * (lfactor_ * v).eval();
  }
  /// Solve G y = v.
  Vec solve_g(const Vec& v) const {
    Vec pv = llt_->permutationP() * v;
    return lfactor_.template triangularView<Eigen::Lower>().solve(pv);
  }

 private:
  using Solver = Eigen::SimplicialLLT<Eigen::SparseMatrix<cplx>, Eigen::Lower>;
  SparseComplexMatrix w_;
  std::shared_ptr<Solver> llt_;
  Eigen::SparseMatrix<cplx> lfactor_;
};

using VectorOp = std::function<Vec(const Vec&)>;

/// Inner-product geometry handed to the norm estimators: either a Hermitian
/// weight W or its inverse, expressed through the same Cholesky factors.
struct WeightOps {
  Eigen::Index n = 0;
  VectorOp apply;     // W v
  VectorOp solve;     // W^{-1} v
  VectorOp apply_gt;  // G^dagger v  with W = G G^dagger (norm map)
  VectorOp solve_gt;  // G^{-dagger} v

  cplx inner(const Vec& u, const Vec& v) const { return v.dot(apply(u)); }
  double norm(const Vec& v) const {
    return std::sqrt(std::max(0.0, inner(v, v).real()));
  }
};

inline WeightOps weight_ops(const HermitianWeight& w) {
  WeightOps ops;
  ops.n = w.size();
  ops.apply = [&w](const Vec& v) { return w.apply(v); };
  ops.solve = [&w](const Vec& v) { return w.solve(v); };
  ops.apply_gt = [&w](const Vec& v) { return w.apply_gt(v); };
  ops.solve_gt = [&w](const Vec& v) { return w.solve_gt(v); };
  return ops;
}

/// The W^{-1} geometry: with W = G G^dagger, W^{-1} = G^{-dagger} G^{-1},
/// so the norm map of W^{-1} is G^{-1}.
inline WeightOps inverse_weight_ops(const HermitianWeight& w) {
  WeightOps ops;
  ops.n = w.size();
  ops.apply = [&w](const Vec& v) { return w.solve(v); };
  ops.solve = [&w](const Vec& v) { return w.apply(v); };
  ops.apply_gt = [&w](const Vec& v) { return w.solve_g(v); };
  ops.solve_gt = [&w](const Vec& v) { return w.apply_g(v); };
  return ops;
}

enum class NormMode { dense, power };

struct OperatorNormResult {
  double norm = 0.0;
  int iterations = 0;
  bool converged = true;
};

namespace detail {

/// Largest singular value of a dense matrix via the Hermitian eigenproblem
/// of T^† T (robust for complex input at desk scale).
inline double dense_two_norm(const DenseMat& t) {
  if (t.rows() == 0 || t.cols() == 0) return 0.0;
  DenseMat n = t.adjoint() * t;
  Eigen::SelfAdjointEigenSolver<DenseMat> eig(n);
  return std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
}

}  // namespace detail

/// Operator norm sup ||Op v||_{Wout} / ||v||_{Win}.
///
/// Dense mode assembles the congruence-transformed operator column by column
/// and takes its exact 2-norm. Power mode runs a block (size 3) subspace
/// iteration on the normal operator Win^{-1} Op^† Wout Op; the returned value
/// is a lower bound certified by stationarity of the Rayleigh quotient within
/// the given relative tolerance. The iteration is deterministically seeded.
inline OperatorNormResult operator_norm(
    const VectorOp& op, const VectorOp& op_adjoint, const WeightOps& win,
    const WeightOps& wout, NormMode mode, double tol = 1e-3,
    int max_iterations = 400, std::uint64_t seed = 0x5eed) {
  const Eigen::Index n = win.n;
  if (mode == NormMode::dense) {
    HELMDD_REQUIRE(n <= dense_oracle_ceiling, "operator_norm: dense mode size ceiling");
    DenseMat t(wout.n, n);
    Vec e = Vec::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      e[j] = 1.0;
      t.col(j) = wout.apply_gt(op(win.solve_gt(e)));
      e[j] = 0.0;
    }
    return {detail::dense_two_norm(t), 0, true};
  }

  const int block = static_cast<int>(std::min<Eigen::Index>(3, n));
  Rng rng(seed);
  std::vector<Vec> x(block);
  for (int b = 0; b < block; ++b) x[b] = rng.complex_vector(n);

  auto win_orthonormalize = [&](std::vector<Vec>& basis) {
    for (std::size_t i = 0; i < basis.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j)
        basis[i] -= win.inner(basis[i], basis[j]) * basis[j];
      const double nrm = win.norm(basis[i]);
      if (nrm < 1e-300) {
        basis[i] = rng.complex_vector(n);
        basis[i] /= win.norm(basis[i]);
      } else {
        basis[i] /= nrm;
      }
    }
  };

  double sigma2 = 0.0;
  double prev = 0.0;
  int stable = 0;
  int it = 0;
  for (; it < max_iterations; ++it) {
    win_orthonormalize(x);
    double best = 0.0;
    std::vector<Vec> next(block);
    for (int b = 0; b < block; ++b) {
      const Vec y = op(x[b]);
      best = std::max(best, wout.inner(y, y).real());
      next[b] = win.solve(op_adjoint(wout.apply(y)));
    }
    x = std::move(next);
    sigma2 = std::max(sigma2, best);
    if (std::abs(best - prev) <= tol * std::max(sigma2, 1e-300)) {
      if (++stable >= 3) break;
    } else {
      stable = 0;
    }
    prev = best;
  }
  return {std::sqrt(std::max(0.0, sigma2)), it, it < max_iterations};
}

inline OperatorNormResult operator_norm(
    const VectorOp& op, const VectorOp& op_adjoint, const HermitianWeight& win,
    const HermitianWeight& wout, NormMode mode, double tol = 1e-3,
    int max_iterations = 400, std::uint64_t seed = 0x5eed) {
  return operator_norm(op, op_adjoint, weight_ops(win), weight_ops(wout), mode, tol,
                       max_iterations, seed);
}

/// sup ||E v||_W / ||v||_W with the same weight on both sides (the
/// D_k-induced operator norm when W = D_k).
inline OperatorNormResult operator_norm_weighted(const VectorOp& op,
                                                 const VectorOp& op_adjoint,
                                                 const HermitianWeight& w,
                                                 NormMode mode, double tol = 1e-3,
                                                 int max_iterations = 400,
                                                 std::uint64_t seed = 0x5eed) {
  return operator_norm(op, op_adjoint, w, w, mode, tol, max_iterations, seed);
}

/// Extreme eigenvalues of a Hermitian positive-definite weight, used for the
/// Euclidean/weighted norm-equivalence constants.
struct ExtremeEigs {
  double min = 0.0;
  double max = 0.0;
};

inline ExtremeEigs hermitian_extreme_eigs(const HermitianWeight& w, double tol = 1e-4,
                                          int max_iterations = 2000) {
  SparseComplexMatrix identity(
      w.size(), w.size(), [&] {
        std::vector<Triplet> t;
        t.reserve(w.size());
        for (Eigen::Index i = 0; i < w.size(); ++i) t.emplace_back(i, i, 1.0);
        return t;
      }());
  HermitianWeight id(identity);
  // norms in the Euclidean geometry: ||W||_2 and ||W^{-1}||_2
  auto apply_w = [&](const Vec& v) { return w.apply(v); };
  auto solve_w = [&](const Vec& v) { return w.solve(v); };
  const double lmax =
      operator_norm(apply_w, apply_w, id, id, NormMode::power, tol, max_iterations).norm;
  const double inv_norm =
      operator_norm(solve_w, solve_w, id, id, NormMode::power, tol, max_iterations).norm;
  return {inv_norm > 0 ? 1.0 / inv_norm : 0.0, lmax};
}

}  // namespace helmdd
