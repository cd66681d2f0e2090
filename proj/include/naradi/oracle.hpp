#pragma once

#include <string>
#include <utility>
#include <vector>

#include "naradi/nradi.hpp"
#include "naradi/problem.hpp"
#include "naradi/types.hpp"

namespace naradi {

Mat to_dense(const SpMat& M);

// The (n+nh) x (n+nh) composite matrix whose spectrum splits into the
// closed-loop spectra of the stabilizing solution.
Mat composite_spectral_matrix(const NareProblem& problem);

struct DenseNareSolution {
  Mat X;
  CVec closed_loop_spectrum;      // eigenvalues of A_cl
  CVec hat_closed_loop_spectrum;  // eigenvalues of Ah_cl
  double residual_norm = 0.0;     // spectral norm of the dense residual
};

// Invariant-subspace solver: selects the nh-dimensional right-half-plane
// invariant subspace [U1; U2] of the composite matrix and returns X = U1 U2^{-1}.
// Throws NumericalError when the positive-real-part eigenvalue count is not nh
// (or an eigenvalue sits on the boundary), or when U2 is singular.
DenseNareSolution dense_nare_solve(const NareProblem& problem);

// A X Eh + E X Ah - E X Bh C X Eh + B Ch formed explicitly; returns the
// matrix and its spectral norm.
std::pair<Mat, double> dense_residual(const NareProblem& problem, const Mat& X);

// Solves S1^T Y + Y S2 = M by the vectorized dense system. Throws
// NumericalError when the spectra of -S1^T and S2 collide.
Mat kron_sylvester_solve(const Mat& S1, const Mat& S2, const Mat& M, Index size_cap = 4096);

// G(s) = C (sE - A)^{-1} B, evaluated densely.
CMat transfer_eval(const Mat& E, const Mat& A, const Mat& B, const Mat& C, Complex s);

struct VerificationCheck {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
  bool skipped = false;
};

struct VerificationReport {
  std::vector<VerificationCheck> checks;
  bool overall = false;
};

struct VerifyOptions {
  bool with_dense_oracle = false;  // adds the dense_nare_solve distance check
};

// Runs every Theorem-1 / interpolation / transfer-identity check against the
// given solution. Projected checks need the interpolation data and report
// "skipped" without it; an empty solution passes vacuously with "skipped".
VerificationReport verify_report(const NareProblem& problem, const LowRankSolution& solution,
                                 const InterpolationData* interp,
                                 const VerifyOptions& options = {});

// {"checks": [{name, value, threshold, pass}...], "overall": bool}
std::string report_to_json(const VerificationReport& report);

}  // namespace naradi
