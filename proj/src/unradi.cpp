#include "naradi/unradi.hpp"

#include <chrono>
#include <cmath>

#include "naradi/sparse_core.hpp"

namespace naradi {

namespace {

void append_cols(Mat& M, const Mat& block) {
  if (M.cols() == 0) {
    M = block;
    return;
  }
  Mat grown(M.rows(), M.cols() + block.cols());
  grown << M, block;
  M = grown;
}

void append_rows(Mat& M, const Mat& block) {
  if (M.rows() == 0) {
    M = block;
    return;
  }
  Mat grown(M.rows() + block.rows(), M.cols());
  grown << M, block;
  M = grown;
}

void blkdiag_append(Mat& M, const Mat& block) {
  if (M.rows() == 0) {
    M = block;
    return;
  }
  Mat grown = Mat::Zero(M.rows() + block.rows(), M.cols() + block.cols());
  grown.topLeftCorner(M.rows(), M.cols()) = M;
  grown.bottomRightCorner(block.rows(), block.cols()) = block;
  M = grown;
}

// S <- [[S, L_prev^T l], [0, s]] with L_prev the L columns accumulated so far.
void extend_sl(Mat& S, Mat& L, const Mat& l_new, const Mat& s_new) {
  if (S.rows() == 0) {
    S = s_new;
  } else {
    Mat top = L.transpose() * l_new;
    Mat grown = Mat::Zero(S.rows() + s_new.rows(), S.cols() + s_new.cols());
    grown.topLeftCorner(S.rows(), S.cols()) = S;
    grown.topRightCorner(top.rows(), top.cols()) = top;
    grown.bottomRightCorner(s_new.rows(), s_new.cols()) = s_new;
    S = grown;
  }
  append_cols(L, l_new);
}

Mat kron_with_identity(const Mat& small, Index m) {
  Mat out = Mat::Zero(small.rows() * m, small.cols() * m);
  for (Index i = 0; i < small.rows(); ++i) {
    for (Index j = 0; j < small.cols(); ++j) {
      if (small(i, j) != 0.0) {
        out.block(i * m, j * m, m, m) = small(i, j) * Mat::Identity(m, m);
      }
    }
  }
  return out;
}

Mat plain_solve(const NareProblem& pb, Complex shift, const Mat& rhs, Side side) {
  if (side == Side::v) {
    ShiftedFactorization f(pb.A, pb.E, Complex(shift.real(), 0.0));
    return f.solve(rhs);
  }
  ShiftedFactorization f(SpMat(pb.Ah.transpose()), SpMat(pb.Eh.transpose()),
                         Complex(shift.real(), 0.0));
  return f.solve(rhs);
}

CMat plain_solve_complex(const NareProblem& pb, Complex shift, const Mat& rhs, Side side) {
  if (side == Side::v) {
    ShiftedFactorization f(pb.A, pb.E, shift);
    return f.solve(CMat(rhs.cast<Complex>()));
  }
  ShiftedFactorization f(SpMat(pb.Ah.transpose()), SpMat(pb.Eh.transpose()), shift);
  return f.solve(CMat(rhs.cast<Complex>()));
}

}  // namespace

UnradiState unradi_init(const NareProblem& pb) {
  UnradiState st;
  const Index n = pb.n(), nh = pb.nh(), m = pb.m(), p = pb.p();
  st.Vlyap = Mat(n, 0);
  st.Whlyap = Mat(nh, 0);
  st.Lvl = Mat(m, 0);
  st.Lwl = Mat(m, 0);
  st.script_B = pb.B;
  st.script_Ch = pb.Ch;
  st.Bhr_lyap = Mat(0, p);
  st.Cr_lyap = Mat(p, 0);
  st.Br = Mat(0, m);
  st.Bhr = Mat(0, p);
  st.Cr = Mat(p, 0);
  st.Chr = Mat(m, 0);
  st.B_perp = pb.B;
  st.Ch_perp = pb.Ch;
  st.K = Mat::Zero(n, p);
  st.Kh = Mat::Zero(p, nh);
  st.denom = spectral_norm_product(pb.B, pb.Ch);
  return st;
}

void cfadi_expand(const NareProblem& pb, UnradiState& st, Complex shift, Side side) {
  if (shift.real() >= kShiftRealPartMax) {
    throw NumericalError("cfadi_expand: shift fails the negative-real-part guard");
  }
  const Index m = pb.m();
  const double gamma = std::sqrt(-2.0 * shift.real());

  if (is_real_shift(shift)) {
    Mat s_block = -shift.real() * Mat::Identity(m, m);
    Mat l_block = -gamma * Mat::Identity(m, m);
    if (side == Side::v) {
      Mat y = plain_solve(pb, shift, st.script_B, Side::v);
      st.script_B += gamma * gamma * (pb.E * y);
      extend_sl(st.Svl, st.Lvl, l_block, s_block);
      Mat vl = gamma * y;
      append_cols(st.Vlyap, vl);
      append_cols(st.Cr_lyap, Mat(pb.C * vl));
    } else {
      Mat z = plain_solve(pb, shift, Mat(st.script_Ch.transpose()), Side::w);
      st.script_Ch += gamma * gamma * (z.transpose() * pb.Eh);
      extend_sl(st.Swl, st.Lwl, l_block, s_block);
      Mat wl = gamma * z;
      append_cols(st.Whlyap, wl);
      append_rows(st.Bhr_lyap, Mat(wl.transpose() * pb.Bh));
    }
    return;
  }

  // Complex-pair head: one real 2m-block covers the shift and its conjugate.
  const double delta = shift.real() / shift.imag();
  const double bt = std::sqrt(1.0 + delta * delta) / (2.0 * delta);
  Mat core(2, 2);
  core << 1.0, bt, -bt, 0.0;
  Mat s_block = gamma * gamma * kron_with_identity(core, m);
  Mat l_row(1, 2);
  l_row << -std::sqrt(2.0) * gamma, 0.0;
  Mat l_block = kron_with_identity(l_row, m);

  if (side == Side::v) {
    CMat y = plain_solve_complex(pb, shift, st.script_B, Side::v);
    Mat combo = y.real() + delta * y.imag();
    st.script_B += 2.0 * gamma * gamma * (pb.E * combo);
    Mat block(pb.n(), 2 * m);
    block << std::sqrt(2.0) * gamma * combo,
        std::sqrt(2.0) * gamma * std::sqrt(delta * delta + 1.0) * y.imag();
    extend_sl(st.Svl, st.Lvl, l_block, s_block);
    append_cols(st.Vlyap, block);
    append_cols(st.Cr_lyap, Mat(pb.C * block));
  } else {
    CMat z = plain_solve_complex(pb, shift, Mat(st.script_Ch.transpose()), Side::w);
    Mat combo = z.real() + delta * z.imag();
    st.script_Ch += 2.0 * gamma * gamma * (combo.transpose() * pb.Eh);
    Mat block(pb.nh(), 2 * m);
    block << std::sqrt(2.0) * gamma * combo,
        std::sqrt(2.0) * gamma * std::sqrt(delta * delta + 1.0) * z.imag();
    extend_sl(st.Swl, st.Lwl, l_block, s_block);
    append_cols(st.Whlyap, block);
    append_rows(st.Bhr_lyap, Mat(block.transpose() * pb.Bh));
  }
}

namespace {

// Coefficient matrices of the growing transform systems (eqs of Proposition 2),
// evaluated against the already-extended lyap blocks and the previous
// iteration's reduced NARE blocks.
struct TransformSystems {
  Mat Mv;  // -(Svl)^T - [Tv;0] Xbar Bhr Cr_lyap   (shift term added per solve)
  Mat Mw;
  Mat rv;  // (Lvl)^T - [Tv;0] Br
  Mat rw;  // (Lwl)^T - [Tw;0] Chr^T
};

TransformSystems transform_systems(const UnradiState& st) {
  const Index new_dim = st.Vlyap.cols();
  const Index old_dim = st.Tv.cols();
  TransformSystems ts;
  Mat Tvc = Mat::Zero(new_dim, old_dim);
  Mat Twc = Mat::Zero(new_dim, old_dim);
  if (old_dim > 0) {
    Tvc.topRows(old_dim) = st.Tv;
    Twc.topRows(old_dim) = st.Tw;
  }
  ts.Mv = -st.Svl.transpose();
  ts.Mw = -st.Swl.transpose();
  ts.rv = st.Lvl.transpose();
  ts.rw = st.Lwl.transpose();
  if (old_dim > 0) {
    ts.Mv -= Tvc * st.Xbar * st.Bhr * st.Cr_lyap;
    ts.Mw -= Twc * st.Xbar.transpose() * st.Cr.transpose() * st.Bhr_lyap.transpose();
    ts.rv -= Tvc * st.Br;
    ts.rw -= Twc * st.Chr.transpose();
  }
  return ts;
}

Mat solve_transform_real(const Mat& M, double shift, const Mat& rhs) {
  Mat sys = M + shift * Mat::Identity(M.rows(), M.cols());
  Eigen::FullPivLU<Mat> lu(sys);
  if (!lu.isInvertible()) {
    throw NumericalError("compute_transform: singular transform system (shift collision)");
  }
  return lu.solve(rhs);
}

CMat solve_transform_complex(const Mat& M, Complex shift, const Mat& rhs) {
  CMat sys = M.cast<Complex>() + shift * CMat::Identity(M.rows(), M.cols());
  Eigen::FullPivLU<CMat> lu(sys);
  if (!lu.isInvertible()) {
    throw NumericalError("compute_transform: singular transform system (shift collision)");
  }
  return lu.solve(rhs.cast<Complex>());
}

void extend_T(Mat& T, const Mat& t_block, Index old_dim) {
  const Index new_dim = t_block.rows();
  Mat grown = Mat::Zero(new_dim, old_dim + t_block.cols());
  if (old_dim > 0) grown.topLeftCorner(old_dim, old_dim) = T;
  grown.rightCols(t_block.cols()) = t_block;
  T = grown;
}

}  // namespace

TransformBlocks compute_transform(UnradiState& st, CaseId case_id, const ShiftSequence& shifts,
                                  Index k) {
  const Index old_dim = st.Tv.cols();
  TransformSystems ts = transform_systems(st);
  TransformBlocks tb;
  const Complex a = shifts.alphas[k], b = shifts.betas[k];

  switch (case_id) {
    case CaseId::I: {
      tb.t_v = solve_transform_real(ts.Mv, a.real(), ts.rv);
      tb.t_w = solve_transform_real(ts.Mw, b.real(), ts.rw);
      break;
    }
    case CaseId::II: {
      CMat tv = solve_transform_complex(ts.Mv, a, ts.rv);
      CMat tw = solve_transform_complex(ts.Mw, b, ts.rw);
      tb.t_v.resize(tv.rows(), 2 * tv.cols());
      tb.t_v << tv.real(), tv.imag();
      tb.t_w.resize(tw.rows(), 2 * tw.cols());
      tb.t_w << tw.real(), tw.imag();
      break;
    }
    case CaseId::III: {
      CMat tv = solve_transform_complex(ts.Mv, a, ts.rv);
      Mat tw = solve_transform_real(ts.Mw, b.real(), ts.rw);
      Mat tw1 = solve_transform_real(ts.Mw, shifts.betas[k + 1].real(), tw);
      tb.t_v.resize(tv.rows(), 2 * tv.cols());
      tb.t_v << tv.real(), tv.imag();
      tb.t_w.resize(tw.rows(), 2 * tw.cols());
      tb.t_w << tw, tw1;
      break;
    }
    case CaseId::IV: {
      Mat tv = solve_transform_real(ts.Mv, a.real(), ts.rv);
      Mat tv1 = solve_transform_real(ts.Mv, shifts.alphas[k + 1].real(), tv);
      CMat tw = solve_transform_complex(ts.Mw, b, ts.rw);
      tb.t_v.resize(tv.rows(), 2 * tv.cols());
      tb.t_v << tv, tv1;
      tb.t_w.resize(tw.rows(), 2 * tw.cols());
      tb.t_w << tw.real(), tw.imag();
      break;
    }
  }
  extend_T(st.Tv, tb.t_v, old_dim);
  extend_T(st.Tw, tb.t_w, old_dim);
  return tb;
}

void unradi_step(const NareProblem& pb, UnradiState& st, const ShiftSequence& shifts) {
  const Index k = st.next_slot;
  const Index m = pb.m();
  const CaseId case_id = classify_case(shifts, k);
  const Complex a = shifts.alphas[k], b = shifts.betas[k];

  // CF-ADI expansions; Cases III/IV run the second real solve against the
  // already-updated script residual.
  switch (case_id) {
    case CaseId::I:
      cfadi_expand(pb, st, Complex(a.real(), 0.0), Side::v);
      cfadi_expand(pb, st, Complex(b.real(), 0.0), Side::w);
      break;
    case CaseId::II:
      cfadi_expand(pb, st, a, Side::v);
      cfadi_expand(pb, st, b, Side::w);
      break;
    case CaseId::III:
      cfadi_expand(pb, st, Complex(b.real(), 0.0), Side::w);
      cfadi_expand(pb, st, Complex(shifts.betas[k + 1].real(), 0.0), Side::w);
      cfadi_expand(pb, st, a, Side::v);
      break;
    case CaseId::IV:
      cfadi_expand(pb, st, Complex(a.real(), 0.0), Side::v);
      cfadi_expand(pb, st, Complex(shifts.alphas[k + 1].real(), 0.0), Side::v);
      cfadi_expand(pb, st, b, Side::w);
      break;
  }

  TransformBlocks tb = compute_transform(st, case_id, shifts, k);

  Mat v_n = st.Vlyap * tb.t_v;
  Mat w_n = st.Whlyap * tb.t_w;
  Mat bhr = w_n.transpose() * pb.Bh;
  Mat cr = pb.C * v_n;
  append_rows(st.Bhr, bhr);
  append_cols(st.Cr, cr);

  Mat coupling = bhr * cr;
  Mat x = compute_x(case_id, shifts, k, coupling);

  st.K += (pb.E * v_n) * x * bhr;
  st.Kh += cr * x * (w_n.transpose() * pb.Eh);
  append_rows(st.Br, Mat(-x.leftCols(m)));
  append_cols(st.Chr, Mat(-x.topRows(m)));
  blkdiag_append(st.Xbar, x);
  st.B_perp += (pb.E * v_n) * x.leftCols(m);
  st.Ch_perp += x.topRows(m) * (w_n.transpose() * pb.Eh);

  st.cases.push_back(case_id);
  st.residual_history.push_back(
      st.denom == 0.0 ? 0.0 : spectral_norm_product(st.B_perp, st.Ch_perp) / st.denom);
  st.iteration += 1;
  st.next_slot += case_slots(case_id);
}

UnradiResult unradi_solve(const NareProblem& pb, const SolverConfig& cfg,
                          std::optional<ShiftSequence> user_shifts) {
  DimensionReport rep = validate(pb);
  if (!rep.ok()) throw InvalidInputError("unradi_solve: " + rep.violations.front());
  check_config(cfg, pb.m());

  const bool auto_mode = !user_shifts.has_value() || user_shifts->slots() == 0;
  ShiftSequence shifts;
  if (auto_mode) {
    shifts.append(cfg.initial_alpha, cfg.initial_beta, ShiftOrigin::user);
  } else {
    shifts = *user_shifts;
  }
  check_stabilizing(shifts);

  UnradiState st = unradi_init(pb);
  UnradiResult out;
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&t0]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  auto finish = [&](bool converged) {
    LowRankSolution sol;
    sol.V = st.Vlyap * st.Tv;
    sol.Xbar = st.Xbar;
    sol.W = st.Whlyap * st.Tw;
    sol.K = st.K;
    sol.Kh = st.Kh;
    sol.B_perp = st.B_perp;
    sol.Ch_perp = st.Ch_perp;
    for (Index k = 0; k < st.next_slot; ++k) {
      sol.shifts_used.append(shifts.alphas[k], shifts.betas[k], shifts.origins[k]);
    }
    sol.cases = st.cases;
    sol.converged = converged;
    sol.final_residual =
        st.residual_history.empty() ? (st.denom == 0.0 ? 0.0 : 1.0) : st.residual_history.back();
    if (st.Vlyap.cols() == 0) {
      sol.V = Mat(pb.n(), 0);
      sol.W = Mat(pb.nh(), 0);
    }
    out.solution = std::move(sol);
    out.lyapunov = {st.Vlyap, st.Whlyap};
    out.Tv = st.Tv;
    out.Tw = st.Tw;
  };

  if (st.denom == 0.0) {
    finish(true);
    out.solution.final_residual = 0.0;
    return out;
  }

  ShiftGenerator generator(pb.m(), cfg.rank_max, cfg.initial_alpha);
  double res = 1.0;
  while (res >= cfg.tol && st.next_slot < cfg.max_slots) {
    if (st.next_slot >= shifts.slots()) break;
    const Index k0 = st.next_slot;
    unradi_step(pb, st, shifts);
    res = st.residual_history.back();
    out.record.push_back({st.iteration, st.cases.back(), shifts.alphas[k0], shifts.betas[k0],
                          res, elapsed()});

    // Shift generation sees the reconstructed NARE blocks, as in N-RADI.
    const Index block_cols = st.Vlyap.cols() - k0 * pb.m();
    Mat vi = (st.Vlyap * st.Tv).rightCols(block_cols);
    Mat wi = (st.Whlyap * st.Tw).rightCols(block_cols);
    if (auto_mode && res >= cfg.tol && st.next_slot < cfg.max_slots &&
        st.next_slot >= shifts.slots()) {
      for (Complex s : generator.generate(pb, vi, wi, st.B_perp, st.Ch_perp)) {
        shifts.append(s, s, ShiftOrigin::automatic);
      }
      check_stabilizing(shifts);
    } else {
      generator.observe(vi, wi);
    }
  }

  finish(res < cfg.tol);
  return out;
}

}  // namespace naradi
