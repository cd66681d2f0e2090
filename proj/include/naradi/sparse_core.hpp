#pragma once

#include <memory>

#include "naradi/types.hpp"

namespace naradi {

/// Reusable factorization of (A + shift*E). A real LU is kept when the shift
/// is real, a complex LU otherwise; one factorization serves any number of
/// solves, also concurrently.
class ShiftedFactorization {
 public:
  ShiftedFactorization(const SpMat& A, const SpMat& E, Complex shift);

  Index dimension() const { return dim_; }
  Complex shift() const { return shift_; }
  bool is_real() const { return real_; }

  // Real path; only valid for a real factorization.
  Mat solve(const Mat& rhs) const;
  // Complex right-hand sides work against both real and complex factors.
  CMat solve(const CMat& rhs) const;

 private:
  Complex shift_;
  Index dim_ = 0;
  bool real_ = true;
  std::shared_ptr<Eigen::SparseLU<SpMat>> lu_real_;
  std::shared_ptr<Eigen::SparseLU<CSpMat>> lu_cplx_;
};

ShiftedFactorization shifted_factorize(const SpMat& A, const SpMat& E, Complex shift);

inline Mat solve_factored(const ShiftedFactorization& f, const Mat& rhs) { return f.solve(rhs); }
inline CMat solve_factored(const ShiftedFactorization& f, const CMat& rhs) { return f.solve(rhs); }

/// ||L*R||_2 via the small eigenproblem of (L^T L)(R R^T); the large product
/// is never formed. Round-off negatives are clamped to zero before the root.
double spectral_norm_product(const Mat& L, const Mat& R);

/// Orthonormal basis of the column span. Columns whose residual after
/// orthogonalization falls below `drop_tol` are dropped; an all-zero input
/// yields a basis with zero columns.
Mat thin_orth(const Mat& M, double drop_tol = 1e-12);

struct EigenDecomposition {
  CVec values;
  CMat right_vectors;    // columns are right eigenvectors
  CMat inverse_rows;     // rows of right_vectors^{-1}
};

/// Dense eigendecomposition for small matrices. Throws NumericalError when
/// the eigenvector basis is not invertible to working precision.
EigenDecomposition dense_eig(const Mat& M);

}  // namespace naradi
