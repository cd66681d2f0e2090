#include "naradi/sparse_core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace naradi {

namespace {

CSpMat to_complex(const SpMat& M) {
  return M.cast<Complex>();
}

}  // namespace

ShiftedFactorization::ShiftedFactorization(const SpMat& A, const SpMat& E, Complex shift)
    : shift_(shift), dim_(A.rows()), real_(shift.imag() == 0.0) {
  if (A.rows() != A.cols() || E.rows() != E.cols() || A.rows() != E.rows()) {
    throw InvalidInputError("shifted_factorize: A and E must be square of equal dimension");
  }
  if (real_) {
    SpMat M = A + shift.real() * E;
    M.makeCompressed();
    lu_real_ = std::make_shared<Eigen::SparseLU<SpMat>>();
    lu_real_->compute(M);
    if (lu_real_->info() != Eigen::Success) {
      std::ostringstream os;
      os << "shifted_factorize: (A + sigma E) numerically singular at sigma = " << shift.real();
      throw NumericalError(os.str());
    }
  } else {
    CSpMat M = to_complex(A) + shift * to_complex(E);
    M.makeCompressed();
    lu_cplx_ = std::make_shared<Eigen::SparseLU<CSpMat>>();
    lu_cplx_->compute(M);
    if (lu_cplx_->info() != Eigen::Success) {
      std::ostringstream os;
      os << "shifted_factorize: (A + sigma E) numerically singular at sigma = (" << shift.real()
         << ", " << shift.imag() << ")";
      throw NumericalError(os.str());
    }
  }
}

Mat ShiftedFactorization::solve(const Mat& rhs) const {
  if (rhs.rows() != dim_) {
    throw InvalidInputError("solve_factored: right-hand side row count mismatch");
  }
  if (!real_) {
    throw InvalidInputError("solve_factored: complex factorization needs a complex right-hand side");
  }
  return lu_real_->solve(rhs);
}

CMat ShiftedFactorization::solve(const CMat& rhs) const {
  if (rhs.rows() != dim_) {
    throw InvalidInputError("solve_factored: right-hand side row count mismatch");
  }
  if (!real_) {
    return lu_cplx_->solve(rhs);
  }
  // Real factors, complex data: two real solves.
  Mat re = lu_real_->solve(Mat(rhs.real()));
  Mat im = lu_real_->solve(Mat(rhs.imag()));
  return re.cast<Complex>() + Complex(0, 1) * im.cast<Complex>();
}

ShiftedFactorization shifted_factorize(const SpMat& A, const SpMat& E, Complex shift) {
  return ShiftedFactorization(A, E, shift);
}

double spectral_norm_product(const Mat& L, const Mat& R) {
  if (L.cols() != R.rows()) {
    throw InvalidInputError("spectral_norm_product: inner dimensions disagree");
  }
  if (L.cols() == 0 || L.rows() == 0 || R.cols() == 0) return 0.0;
  Mat G = (L.transpose() * L) * (R * R.transpose());
  Eigen::EigenSolver<Mat> es(G, /*computeEigenvectors=*/false);
  // Analytically the spectrum of this product of Gram factors is
  // nonnegative; clamp round-off negatives before the root.
  double lam = 0.0;
  for (Index i = 0; i < G.rows(); ++i) {
    lam = std::max(lam, es.eigenvalues()(i).real());
  }
  return std::sqrt(std::max(0.0, lam));
}

Mat thin_orth(const Mat& M, double drop_tol) {
  if (M.cols() < 1) {
    throw InvalidInputError("thin_orth: input needs at least one column");
  }
  Mat Q(M.rows(), M.cols());
  Index k = 0;
  for (Index j = 0; j < M.cols(); ++j) {
    Vec c = M.col(j);
    double nrm = c.norm();
    if (nrm == 0.0) continue;
    c /= nrm;
    // Two Gram-Schmidt passes keep ||Q^T Q - I|| at round-off level.
    for (int pass = 0; pass < 2; ++pass) {
      if (k > 0) c -= Q.leftCols(k) * (Q.leftCols(k).transpose() * c);
    }
    double rem = c.norm();
    if (rem < drop_tol) continue;
    Q.col(k++) = c / rem;
  }
  return Q.leftCols(k);
}

EigenDecomposition dense_eig(const Mat& M) {
  if (M.rows() != M.cols()) {
    throw InvalidInputError("dense_eig: matrix must be square");
  }
  Eigen::EigenSolver<Mat> es(M);
  if (es.info() != Eigen::Success) {
    throw NumericalError("dense_eig: eigensolver failed to converge");
  }
  EigenDecomposition out;
  out.values = es.eigenvalues();
  out.right_vectors = es.eigenvectors();
  Eigen::FullPivLU<CMat> lu(out.right_vectors);
  if (!lu.isInvertible()) {
    throw NumericalError("dense_eig: eigenvector basis not invertible (matrix defective)");
  }
  out.inverse_rows = lu.inverse();
  double ident_err = (out.inverse_rows * out.right_vectors - CMat::Identity(M.rows(), M.cols()))
                         .cwiseAbs()
                         .maxCoeff();
  if (ident_err > 1e-10) {
    throw NumericalError("dense_eig: matrix not diagonalizable to working precision");
  }
  return out;
}

}  // namespace naradi
