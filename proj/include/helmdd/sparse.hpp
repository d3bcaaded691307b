#pragma once

#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "helmdd/core.hpp"

namespace helmdd {

using Triplet = Eigen::Triplet<cplx>;

/// Size limit for dense reference paths (oracles, dense operator norms).
inline constexpr Eigen::Index dense_oracle_ceiling = 2500;

/// Compressed-sparse-row complex matrix. Column indices are sorted within
/// each row and exact zeros are pruned at finalisation.
class SparseComplexMatrix {
 public:
  using Storage = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

  SparseComplexMatrix() = default;
  SparseComplexMatrix(Eigen::Index rows, Eigen::Index cols,
                      const std::vector<Triplet>& triplets)
      : m_(rows, cols) {
    m_.setFromTriplets(triplets.begin(), triplets.end());
    finalize();
  }
  explicit SparseComplexMatrix(Storage m) : m_(std::move(m)) { finalize(); }

  Eigen::Index rows() const { return m_.rows(); }
  Eigen::Index cols() const { return m_.cols(); }
  Eigen::Index nonzeros() const { return m_.nonZeros(); }

  const Storage& eigen() const { return m_; }

  /// Raw CSR arrays.
  const Storage::StorageIndex* row_offsets() const { return m_.outerIndexPtr(); }
  const Storage::StorageIndex* col_indices() const { return m_.innerIndexPtr(); }
  const cplx* values() const { return m_.valuePtr(); }

  cplx coeff(Eigen::Index i, Eigen::Index j) const { return m_.coeff(i, j); }

  Vec apply(const Vec& v) const {
    HELMDD_REQUIRE(v.size() == cols(), "sparse apply: dimension mismatch");
    return m_ * v;
  }
  Vec apply_adjoint(const Vec& v) const {
    HELMDD_REQUIRE(v.size() == rows(), "sparse adjoint apply: dimension mismatch");
    return m_.adjoint() * v;
  }

  SparseComplexMatrix adjoint() const {
    Storage a = m_.adjoint();
    return SparseComplexMatrix(std::move(a));
  }

  DenseMat dense() const { return DenseMat(m_); }

  double max_abs() const {
    double m = 0.0;
    for (Eigen::Index i = 0; i < m_.nonZeros(); ++i)
      m = std::max(m, std::abs(m_.valuePtr()[i]));
    return m;
  }

  /// Row-sum norm, used in solve-accuracy probes.
  double inf_norm() const {
    RealVec rowsum = RealVec::Zero(rows());
    for (Eigen::Index r = 0; r < m_.outerSize(); ++r)
      for (Storage::InnerIterator it(m_, r); it; ++it)
        rowsum[r] += std::abs(it.value());
    return rowsum.size() ? rowsum.maxCoeff() : 0.0;
  }

 private:
  void finalize() {
    m_.prune([](Eigen::Index, Eigen::Index, const cplx& v) { return v != cplx(0.0, 0.0); });
    m_.makeCompressed();
  }

  Storage m_;
};

/// Matrix Market export, coordinate complex general.
inline void write_matrix_market(const SparseComplexMatrix& m, std::ostream& os) {
  os << "%%MatrixMarket matrix coordinate complex general\n";
  os << m.rows() << " " << m.cols() << " " << m.nonzeros() << "\n";
  const auto& s = m.eigen();
  os.precision(17);
  for (Eigen::Index r = 0; r < s.outerSize(); ++r)
    for (SparseComplexMatrix::Storage::InnerIterator it(s, r); it; ++it)
      os << it.row() + 1 << " " << it.col() + 1 << " " << it.value().real() << " "
         << it.value().imag() << "\n";
}

inline SparseComplexMatrix read_matrix_market(std::istream& is) {
  std::string line;
  HELMDD_REQUIRE(static_cast<bool>(std::getline(is, line)), "matrix market: empty stream");
  HELMDD_REQUIRE(line.rfind("%%MatrixMarket", 0) == 0 &&
                     line.find("coordinate") != std::string::npos &&
                     line.find("complex") != std::string::npos,
                 "matrix market: unsupported header: " + line);
  while (std::getline(is, line)) {
    if (!line.empty() && line[0] != '%') break;
  }
  std::istringstream sizes(line);
  Eigen::Index rows = 0, cols = 0, nnz = 0;
  sizes >> rows >> cols >> nnz;
  HELMDD_REQUIRE(rows > 0 && cols > 0, "matrix market: bad sizes");
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(nnz));
  for (Eigen::Index k = 0; k < nnz; ++k) {
    Eigen::Index i = 0, j = 0;
    double re = 0.0, im = 0.0;
    is >> i >> j >> re >> im;
    HELMDD_REQUIRE(static_cast<bool>(is), "matrix market: truncated entries");
    trips.emplace_back(i - 1, j - 1, cplx(re, im));
  }
  return SparseComplexMatrix(rows, cols, trips);
}

}  // namespace helmdd
