#pragma once

#include <optional>
#include <vector>

#include "naradi/problem.hpp"
#include "naradi/types.hpp"

namespace naradi {

enum class Side { v, w };

// Windowed projection basis over the raw v- or w-blocks of the iteration.
// The retained window is the most recent r_idx*m accumulated columns; once
// its orthonormalized width reaches rank_max the history is discarded
// (implicit restart) and the window restarts from one m-slab.
struct ProjectionBasis {
  Side side = Side::v;
  Index m = 1;
  Index rank_max = 14;
  Mat raw;          // all accumulated columns
  Mat q;            // orthonormal basis of the current window
  Index r_idx = 1;

  void append_raw(const Mat& block);
};

// Appends `new_block` and refreshes the window basis (restart included).
void update_basis(ProjectionBasis& basis, const Mat& new_block);

struct DominantPoleScore {
  Complex lambda;
  double score = 0.0;          // ||residue||^2 / |Re lambda|
  double residue_norm = 0.0;
};

// Scores the eigenvalues of E_proj^{-1} A_proj (V side, residues from rows of
// T^{-1} against R_proj = V_proj^T B_perp) or A_proj E_proj^{-1} (W side,
// residues from columns of T against R_proj = Ch_perp W_proj) and returns the
// maximizer. Eigenvalues on the imaginary axis are excluded; ties break by
// larger |lambda|, then lower index. nullopt = retry signal (defective
// eigenproblem or no admissible pole).
std::optional<DominantPoleScore> dominant_pole(const Mat& E_proj, const Mat& A_proj,
                                               const Mat& R_proj, Side side);

// Reflects the pole into the open left half-plane and pairs it: a single real
// shift, or the adjacent conjugate pair. Near-imaginary-axis poles are nudged
// to Re = -1e-6 so the stabilizing guard cannot reject them.
std::vector<Complex> next_shift_pair(const DominantPoleScore& score);

// Alternating V-side / W-side shift generation with implicit restart.
class ShiftGenerator {
 public:
  ShiftGenerator(Index m, Index rank_max, Complex initial_shift);

  // Record the step's blocks without generating (shift list not exhausted).
  void observe(const Mat& v_block, const Mat& w_block);

  // Record the blocks and emit the next shift(s) from the alternation side.
  // Falls back to re-emitting the previous shift when scoring fails.
  std::vector<Complex> generate(const NareProblem& problem, const Mat& v_block,
                                const Mat& w_block, const Mat& B_perp, const Mat& Ch_perp);

 private:
  ProjectionBasis v_basis_;
  ProjectionBasis w_basis_;
  long events_ = 0;
  std::vector<Complex> last_emitted_;
};

}  // namespace naradi
