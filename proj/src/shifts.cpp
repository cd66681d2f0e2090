#include "naradi/shifts.hpp"

#include <algorithm>
#include <cmath>

#include "naradi/sparse_core.hpp"

namespace naradi {

void ProjectionBasis::append_raw(const Mat& block) {
  if (block.cols() == 0) return;
  if (raw.cols() == 0) {
    raw = block;
    return;
  }
  Mat grown(raw.rows(), raw.cols() + block.cols());
  grown << raw, block;
  raw = grown;
}

void update_basis(ProjectionBasis& basis, const Mat& new_block) {
  basis.append_raw(new_block);
  // Implicit restart: once the orthonormal window has reached the width
  // limit, drop the history and restart from one m-slab.
  if (basis.q.cols() >= basis.rank_max) basis.r_idx = 1;
  Index take = std::min(basis.r_idx * basis.m, basis.raw.cols());
  basis.q = thin_orth(basis.raw.rightCols(take));
  basis.r_idx += 1;
}

std::optional<DominantPoleScore> dominant_pole(const Mat& E_proj, const Mat& A_proj,
                                               const Mat& R_proj, Side side) {
  EigenDecomposition eig;
  try {
    Eigen::FullPivLU<Mat> luE(E_proj);
    if (!luE.isInvertible()) return std::nullopt;
    Mat M = side == Side::v ? Mat(luE.solve(A_proj)) : Mat(A_proj * luE.inverse());
    eig = dense_eig(M);
  } catch (const NumericalError&) {
    return std::nullopt;  // defective projection; caller retries
  }

  CMat R = R_proj.cast<Complex>();
  const Index k = eig.values.size();
  std::optional<DominantPoleScore> best;
  for (Index l = 0; l < k; ++l) {
    Complex lam = eig.values(l);
    if (lam.real() == 0.0) continue;  // imaginary-axis poles excluded
    double rnorm = side == Side::v ? (eig.inverse_rows.row(l) * R).norm()
                                   : (R * eig.right_vectors.col(l)).norm();
    double phi = rnorm * rnorm / std::abs(lam.real());
    bool better = false;
    if (!best) {
      better = true;
    } else if (phi > best->score) {
      better = true;
    } else if (phi == best->score && std::abs(lam) > std::abs(best->lambda)) {
      better = true;
    }
    if (better) best = DominantPoleScore{lam, phi, rnorm};
  }
  if (best && best->score == 0.0) {
    // All residues vanished; nothing informative to target.
    return std::nullopt;
  }
  return best;
}

std::vector<Complex> next_shift_pair(const DominantPoleScore& score) {
  double re = -std::abs(score.lambda.real());
  if (re >= kShiftRealPartMax) re = -1e-6;  // near-axis pole would stall the guard
  Complex star(re, score.lambda.imag());
  if (std::abs(star.imag()) <= kShiftRealnessTol) {
    return {Complex(star.real(), 0.0)};
  }
  return {star, std::conj(star)};
}

ShiftGenerator::ShiftGenerator(Index m, Index rank_max, Complex initial_shift) {
  v_basis_.side = Side::v;
  v_basis_.m = m;
  v_basis_.rank_max = rank_max;
  w_basis_.side = Side::w;
  w_basis_.m = m;
  w_basis_.rank_max = rank_max;
  last_emitted_ = {initial_shift};
}

void ShiftGenerator::observe(const Mat& v_block, const Mat& w_block) {
  v_basis_.append_raw(v_block);
  w_basis_.append_raw(w_block);
}

std::vector<Complex> ShiftGenerator::generate(const NareProblem& pb, const Mat& v_block,
                                              const Mat& w_block, const Mat& B_perp,
                                              const Mat& Ch_perp) {
  const bool v_side = (events_ % 2 == 0);
  events_ += 1;

  std::optional<DominantPoleScore> score;
  if (v_side) {
    w_basis_.append_raw(w_block);
    update_basis(v_basis_, v_block);
    const Mat& Q = v_basis_.q;
    if (Q.cols() > 0) {
      Mat E_proj = Q.transpose() * (pb.E * Q);
      Mat A_proj = Q.transpose() * (pb.A * Q);
      Mat R_proj = Q.transpose() * B_perp;
      score = dominant_pole(E_proj, A_proj, R_proj, Side::v);
    }
  } else {
    v_basis_.append_raw(v_block);
    update_basis(w_basis_, w_block);
    const Mat& Q = w_basis_.q;
    if (Q.cols() > 0) {
      Mat E_proj = Q.transpose() * (pb.Eh * Q);
      Mat A_proj = Q.transpose() * (pb.Ah * Q);
      Mat R_proj = Ch_perp * Q;
      score = dominant_pole(E_proj, A_proj, R_proj, Side::w);
    }
  }

  if (!score) return last_emitted_;  // fall back to the previous shift
  std::vector<Complex> next = next_shift_pair(*score);
  last_emitted_ = next;
  return next;
}

}  // namespace naradi
