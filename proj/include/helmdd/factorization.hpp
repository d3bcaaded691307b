#pragma once

#include <memory>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include "helmdd/sparse.hpp"

namespace helmdd {

/// Sparse LU with partial pivoting and fill-reducing (COLAMD) ordering,
/// reusable for repeated solves. Adjoint/transpose solves share the factors.
class Factorization {
 public:
  explicit Factorization(const SparseComplexMatrix& a, std::string label = "matrix")
      : n_(a.rows()), label_(std::move(label)) {
    HELMDD_REQUIRE(a.rows() == a.cols(), "factorize: matrix must be square");
    matrix_colmajor_ = a.eigen();
    lu_ = std::make_unique<Solver>();
    lu_->compute(matrix_colmajor_);
    if (lu_->info() != Eigen::Success) {
      throw ContractError("factorize(" + label_ + "): singular or failed: " +
                          lu_->lastErrorMessage());
    }
    // solve-accuracy probe, kept as a stability report
    Vec b = Vec::Constant(n_, cplx(1.0, -0.5));
    Vec x = lu_->solve(b);
    const double anorm = a.inf_norm();
    const double denom = anorm * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>();
    probe_residual_ = (a.apply(x) - b).lpNorm<Eigen::Infinity>() / (denom > 0 ? denom : 1.0);
  }

  Eigen::Index size() const { return n_; }
  const std::string& label() const { return label_; }

  /// Scaled residual of the construction-time probe solve.
  double probe_residual() const { return probe_residual_; }

  Vec solve(const Vec& b) const {
    HELMDD_REQUIRE(b.size() == n_, "solve: dimension mismatch");
    return lu_->solve(b);
  }
  Vec solve_adjoint(const Vec& b) const {
    HELMDD_REQUIRE(b.size() == n_, "solve_adjoint: dimension mismatch");
    return lu_->adjoint().solve(b);
  }
  Vec solve_transpose(const Vec& b) const {
    HELMDD_REQUIRE(b.size() == n_, "solve_transpose: dimension mismatch");
    return lu_->transpose().solve(b);
  }

 private:
  using Solver = Eigen::SparseLU<Eigen::SparseMatrix<cplx>>;
  Eigen::Index n_ = 0;
  std::string label_;
  Eigen::SparseMatrix<cplx> matrix_colmajor_;
  std::unique_ptr<Solver> lu_;
  double probe_residual_ = 0.0;
};

/// Dense LU reference for exhaustive equivalence tests at desk scale.
class DenseOracle {
 public:
  explicit DenseOracle(const SparseComplexMatrix& a) : DenseOracle(a.dense()) {}
  explicit DenseOracle(DenseMat a) : a_(std::move(a)) {
    HELMDD_REQUIRE(a_.rows() == a_.cols(), "dense oracle: matrix must be square");
    HELMDD_REQUIRE(a_.rows() <= dense_oracle_ceiling, "dense oracle: size ceiling exceeded");
    lu_.compute(a_);
  }

  Eigen::Index size() const { return a_.rows(); }
  const DenseMat& matrix() const { return a_; }

  Vec solve(const Vec& b) const { return lu_.solve(b); }
  DenseMat inverse() const { return lu_.inverse(); }

 private:
  DenseMat a_;
  Eigen::PartialPivLU<DenseMat> lu_;
};

}  // namespace helmdd
