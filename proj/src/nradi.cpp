#include "naradi/nradi.hpp"

#include <chrono>
#include <cmath>

#include "naradi/shifts.hpp"

namespace naradi {

void ShiftSequence::append(Complex alpha, Complex beta, ShiftOrigin origin) {
  alphas.push_back(alpha);
  betas.push_back(beta);
  origins.push_back(origin);
}

void check_stabilizing(const ShiftSequence& shifts) {
  for (Index k = 0; k < shifts.slots(); ++k) {
    if (shifts.alphas[k].real() >= kShiftRealPartMax ||
        shifts.betas[k].real() >= kShiftRealPartMax) {
      throw NumericalError("all ADI shifts must have negative real parts");
    }
  }
}

std::string to_string(AlgorithmKind a) {
  return a == AlgorithmKind::nradi ? "nradi" : "unradi";
}

AlgorithmKind algorithm_from_string(const std::string& s) {
  if (s == "nradi") return AlgorithmKind::nradi;
  if (s == "unradi") return AlgorithmKind::unradi;
  throw InvalidInputError("unknown algorithm '" + s + "' (expected nradi or unradi)");
}

void check_config(const SolverConfig& cfg, Index m) {
  if (!(cfg.tol >= 0.0 && cfg.tol <= 1.0)) {
    throw InvalidInputError("tolerance must lie in [0, 1]");
  }
  if (cfg.max_slots < 1) throw InvalidInputError("max_slots must be at least 1");
  if (cfg.rank_max < m) throw InvalidInputError("rank_max must be at least m");
}

namespace {

bool conjugate_pair(Complex a, Complex b) {
  return std::abs(b - std::conj(a)) <= 1e-12 * std::max(1.0, std::abs(a));
}

[[noreturn]] void ordering_error() {
  throw NumericalError("ADI shifts are not ordered properly");
}

}  // namespace

CaseId classify_case(const ShiftSequence& s, Index k) {
  if (k < 0 || k >= s.slots()) throw InvalidInputError("classify_case: slot index out of range");
  const Complex a = s.alphas[k], b = s.betas[k];
  const bool ra = is_real_shift(a), rb = is_real_shift(b);
  const bool has_next = k + 1 < s.slots();

  if (ra && rb) return CaseId::I;
  if (!ra && !rb) {
    if (!has_next || !conjugate_pair(a, s.alphas[k + 1]) || !conjugate_pair(b, s.betas[k + 1])) {
      ordering_error();
    }
    return CaseId::II;
  }
  if (!ra) {  // alpha complex pair, both betas real
    if (!has_next || !conjugate_pair(a, s.alphas[k + 1]) || !is_real_shift(s.betas[k + 1])) {
      ordering_error();
    }
    return CaseId::III;
  }
  // alpha_k, alpha_{k+1} real, beta complex pair
  if (!has_next || !is_real_shift(s.alphas[k + 1]) || !conjugate_pair(b, s.betas[k + 1])) {
    ordering_error();
  }
  return CaseId::IV;
}

namespace {

template <typename Rhs>
Rhs smw_apply(const ShiftedFactorization& base, const Mat& K, const Mat& C, const Rhs& rhs) {
  const Index q = rhs.cols();
  const Index p = C.rows();
  Rhs aug(rhs.rows(), q + p);
  aug.leftCols(q) = rhs;
  aug.rightCols(p) = K.template cast<typename Rhs::Scalar>();
  Rhs solved = base.solve(aug);
  Rhs Xs = solved.leftCols(q);
  Rhs Y = solved.rightCols(p);
  Rhs S = Rhs::Identity(p, p) - C.template cast<typename Rhs::Scalar>() * Y;
  Eigen::FullPivLU<Rhs> lu(S);
  if (!lu.isInvertible()) {
    throw NumericalError("smw_solve: midmatrix I - C Y singular (feedback-shifted pencil)");
  }
  return Xs + Y * lu.solve(C.template cast<typename Rhs::Scalar>() * Xs);
}

}  // namespace

Mat smw_solve(const ShiftedFactorization& base, const Mat& K, const Mat& C, const Mat& rhs) {
  return smw_apply<Mat>(base, K, C, rhs);
}

CMat smw_solve(const ShiftedFactorization& base, const Mat& K, const Mat& C, const CMat& rhs) {
  return smw_apply<CMat>(base, K, C, rhs);
}

namespace {

Mat invert_q(const Mat& Q, const char* which) {
  Eigen::FullPivLU<Mat> lu(Q);
  if (!lu.isInvertible()) {
    throw NumericalError(std::string("compute_x: singular q-matrix in ") + which +
                         " (colliding {-alpha} and {beta} spectra)");
  }
  return lu.inverse();
}

}  // namespace

Mat compute_x_case1(double alpha, double beta, const Mat& G) {
  const Index m = G.rows();
  Mat Q = Mat::Identity(m, m) + G;
  return -(alpha + beta) * invert_q(Q, "Case I");
}

Mat compute_x_case2(Complex alpha, Complex beta, const Mat& G) {
  const Index m = G.rows() / 2;
  const double ar = alpha.real(), ai = alpha.imag();
  const double br = beta.real(), bi = beta.imag();
  Mat I = Mat::Identity(m, m);
  Mat G11 = G.topLeftCorner(m, m), G12 = G.topRightCorner(m, m);
  Mat G21 = G.bottomLeftCorner(m, m), G22 = G.bottomRightCorner(m, m);

  const double s = ar + br;
  const double d_r = s * s + ai * ai - bi * bi;
  const double d_i = 2.0 * s * bi;
  const double dd = d_r * d_r + d_i * d_i;
  Mat n1r = -s * I - (s * G11 - bi * G21) - ai * G12;
  Mat n1i = -bi * I - (s * G21 + bi * G11) - ai * G22;
  Mat n2r = ai * I + ai * G11 - (s * G12 - bi * G22);
  Mat n2i = ai * G21 - (s * G22 + bi * G12);

  Mat Q(2 * m, 2 * m);
  Q.topLeftCorner(m, m) = (n1r * d_r + n1i * d_i) / dd;
  Q.topRightCorner(m, m) = (n2r * d_r + n2i * d_i) / dd;
  Q.bottomLeftCorner(m, m) = (n1i * d_r - n1r * d_i) / dd;
  Q.bottomRightCorner(m, m) = (n2i * d_r - n2r * d_i) / dd;
  return invert_q(Q, "Case II");
}

Mat compute_x_case3(Complex alpha, double beta0, double beta1, const Mat& G) {
  const Index m = G.rows() / 2;
  const double ar = alpha.real(), ai = alpha.imag();
  Mat I = Mat::Identity(m, m);
  Mat G11 = G.topLeftCorner(m, m), G12 = G.topRightCorner(m, m);
  Mat G21 = G.bottomLeftCorner(m, m), G22 = G.bottomRightCorner(m, m);

  const double sa = ar + beta0;
  const double mu = ar + beta1;
  const double da = sa * sa + ai * ai;
  const double ea = mu * mu + ai * ai;

  Mat Q(2 * m, 2 * m);
  Q.topLeftCorner(m, m) = -(sa / da) * I - (sa / da) * G11 - (ai / da) * G12;
  Q.topRightCorner(m, m) = (ai / da) * I + (ai / da) * G11 - (sa / da) * G12;
  Q.bottomLeftCorner(m, m) = ((ai * ai - sa * mu) / (da * ea)) * (I + G11) -
                             (ai * (sa + mu) / (da * ea)) * G12 - (mu / ea) * G21 -
                             (ai / ea) * G22;
  Q.bottomRightCorner(m, m) = (ai * (sa + mu) / (da * ea)) * (I + G11) +
                              ((ai * ai - sa * mu) / (da * ea)) * G12 + (ai / ea) * G21 -
                              (mu / ea) * G22;
  return invert_q(Q, "Case III");
}

Mat compute_x_case4(double alpha0, double alpha1, Complex beta, const Mat& G) {
  const Index m = G.rows() / 2;
  const double br = beta.real(), bi = beta.imag();
  Mat I = Mat::Identity(m, m);
  Mat G11 = G.topLeftCorner(m, m), G12 = G.topRightCorner(m, m);
  Mat G21 = G.bottomLeftCorner(m, m), G22 = G.bottomRightCorner(m, m);

  const double sb = alpha0 + br;
  const double mu = alpha1 + br;
  // delta_b in every q11 denominator; the displayed mu_b variant does not
  // solve the block Sylvester equation.
  const double db = sb * sb + bi * bi;
  const double eb = mu * mu + bi * bi;

  Mat Q(2 * m, 2 * m);
  Q.topLeftCorner(m, m) = -(sb / db) * I - (sb / db) * G11 - (bi / db) * G21;
  Q.topRightCorner(m, m) = ((bi * bi - sb * mu) / (db * eb)) * (I + G11) -
                           (bi * (sb + mu) / (db * eb)) * G21 - (mu / eb) * G12 -
                           (bi / eb) * G22;
  Q.bottomLeftCorner(m, m) = (bi / db) * I + (bi / db) * G11 - (sb / db) * G21;
  Q.bottomRightCorner(m, m) = (bi * (sb + mu) / (db * eb)) * (I + G11) +
                              ((bi * bi - sb * mu) / (db * eb)) * G21 + (bi / eb) * G12 -
                              (mu / eb) * G22;
  return invert_q(Q, "Case IV");
}

Mat compute_x(CaseId case_id, const ShiftSequence& shifts, Index k, const Mat& coupling) {
  switch (case_id) {
    case CaseId::I:
      return compute_x_case1(shifts.alphas[k].real(), shifts.betas[k].real(), coupling);
    case CaseId::II:
      return compute_x_case2(shifts.alphas[k], shifts.betas[k], coupling);
    case CaseId::III:
      return compute_x_case3(shifts.alphas[k], shifts.betas[k].real(),
                             shifts.betas[k + 1].real(), coupling);
    case CaseId::IV:
      return compute_x_case4(shifts.alphas[k].real(), shifts.alphas[k + 1].real(),
                             shifts.betas[k], coupling);
  }
  throw InvalidInputError("compute_x: unknown case");
}

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

struct CaseBlocks {
  Mat sv, lv, sw, lw;
};

CaseBlocks nradi_case_blocks(CaseId case_id, const ShiftSequence& shifts, Index k, Index m) {
  CaseBlocks cb;
  const Complex a = shifts.alphas[k], b = shifts.betas[k];
  Mat lv1(1, 2);
  lv1 << -1.0, 0.0;
  switch (case_id) {
    case CaseId::I:
      cb.sv = -a.real() * Mat::Identity(m, m);
      cb.lv = -Mat::Identity(m, m);
      cb.sw = -b.real() * Mat::Identity(m, m);
      cb.lw = -Mat::Identity(m, m);
      break;
    case CaseId::II: {
      Mat rot_a(2, 2), rot_b(2, 2);
      rot_a << -a.real(), -a.imag(), a.imag(), -a.real();
      rot_b << -b.real(), -b.imag(), b.imag(), -b.real();
      cb.sv = kron_with_identity(rot_a, m);
      cb.sw = kron_with_identity(rot_b, m);
      cb.lv = kron_with_identity(lv1, m);
      cb.lw = cb.lv;
      break;
    }
    case CaseId::III: {
      Mat rot_a(2, 2), tri_b(2, 2);
      rot_a << -a.real(), -a.imag(), a.imag(), -a.real();
      tri_b << -b.real(), 1.0, 0.0, -shifts.betas[k + 1].real();
      cb.sv = kron_with_identity(rot_a, m);
      cb.sw = kron_with_identity(tri_b, m);
      cb.lv = kron_with_identity(lv1, m);
      cb.lw = cb.lv;
      break;
    }
    case CaseId::IV: {
      Mat tri_a(2, 2), rot_b(2, 2);
      tri_a << -a.real(), 1.0, 0.0, -shifts.alphas[k + 1].real();
      rot_b << -b.real(), -b.imag(), b.imag(), -b.real();
      cb.sv = kron_with_identity(tri_a, m);
      cb.sw = kron_with_identity(rot_b, m);
      cb.lv = kron_with_identity(lv1, m);
      cb.lw = cb.lv;
      break;
    }
  }
  return cb;
}

}  // namespace

SolverState nradi_init(const NareProblem& pb, const SolverConfig& cfg) {
  SolverState st;
  st.B_perp = pb.B;
  st.Ch_perp = pb.Ch;
  st.K = Mat::Zero(pb.n(), pb.p());
  st.Kh = Mat::Zero(pb.p(), pb.nh());
  st.V = Mat(pb.n(), 0);
  st.W = Mat(pb.nh(), 0);
  st.Xbar = Mat(0, 0);
  st.emit_interp = cfg.emit_interp;
  st.interp.Lv = Mat(pb.m(), 0);
  st.interp.Lw = Mat(pb.m(), 0);
  st.denom = spectral_norm_product(pb.B, pb.Ch);
  return st;
}

double relative_residual(const SolverState& st) {
  if (st.denom == 0.0) return 0.0;
  return spectral_norm_product(st.B_perp, st.Ch_perp) / st.denom;
}

void nradi_step(const NareProblem& pb, SolverState& st, const ShiftSequence& shifts) {
  const Index k = st.next_slot;
  const Index m = pb.m();
  const CaseId case_id = classify_case(shifts, k);
  const Complex a = shifts.alphas[k], b = shifts.betas[k];

  Mat vi, wi;
  switch (case_id) {
    case CaseId::I: {
      ShiftedFactorization fa(pb.A, pb.E, Complex(a.real(), 0.0));
      ShiftedFactorization fb(SpMat(pb.Ah.transpose()), SpMat(pb.Eh.transpose()),
                              Complex(b.real(), 0.0));
      vi = smw_solve(fa, st.K, pb.C, st.B_perp);
      wi = smw_solve(fb, Mat(st.Kh.transpose()), Mat(pb.Bh.transpose()),
                     Mat(st.Ch_perp.transpose()));
      break;
    }
    case CaseId::II: {
      ShiftedFactorization fa(pb.A, pb.E, a);
      ShiftedFactorization fb(SpMat(pb.Ah.transpose()), SpMat(pb.Eh.transpose()), b);
      CMat y = smw_solve(fa, st.K, pb.C, CMat(st.B_perp.cast<Complex>()));
      CMat z = smw_solve(fb, Mat(st.Kh.transpose()), Mat(pb.Bh.transpose()),
                         CMat(st.Ch_perp.transpose().cast<Complex>()));
      vi.resize(pb.n(), 2 * m);
      vi << y.real(), y.imag();
      wi.resize(pb.nh(), 2 * m);
      wi << z.real(), z.imag();
      break;
    }
    case CaseId::III: {
      ShiftedFactorization fa(pb.A, pb.E, a);
      ShiftedFactorization fb(SpMat(pb.Ah.transpose()), SpMat(pb.Eh.transpose()),
                              Complex(b.real(), 0.0));
      ShiftedFactorization fb1(SpMat(pb.Ah.transpose()), SpMat(pb.Eh.transpose()),
                               Complex(shifts.betas[k + 1].real(), 0.0));
      CMat y = smw_solve(fa, st.K, pb.C, CMat(st.B_perp.cast<Complex>()));
      Mat z = smw_solve(fb, Mat(st.Kh.transpose()), Mat(pb.Bh.transpose()),
                        Mat(st.Ch_perp.transpose()));
      Mat z1 = smw_solve(fb1, Mat(st.Kh.transpose()), Mat(pb.Bh.transpose()),
                         Mat(pb.Eh.transpose() * z));
      vi.resize(pb.n(), 2 * m);
      vi << y.real(), y.imag();
      wi.resize(pb.nh(), 2 * m);
      wi << z, z1;
      break;
    }
    case CaseId::IV: {
      ShiftedFactorization fa(pb.A, pb.E, Complex(a.real(), 0.0));
      ShiftedFactorization fa1(pb.A, pb.E, Complex(shifts.alphas[k + 1].real(), 0.0));
      ShiftedFactorization fb(SpMat(pb.Ah.transpose()), SpMat(pb.Eh.transpose()), b);
      Mat y = smw_solve(fa, st.K, pb.C, st.B_perp);
      Mat y1 = smw_solve(fa1, st.K, pb.C, Mat(pb.E * y));
      CMat z = smw_solve(fb, Mat(st.Kh.transpose()), Mat(pb.Bh.transpose()),
                         CMat(st.Ch_perp.transpose().cast<Complex>()));
      vi.resize(pb.n(), 2 * m);
      vi << y, y1;
      wi.resize(pb.nh(), 2 * m);
      wi << z.real(), z.imag();
      break;
    }
  }

  Mat bhr = wi.transpose() * pb.Bh;  // (m|2m) x p
  Mat cr = pb.C * vi;                // p x (m|2m)
  Mat coupling = bhr * cr;
  Mat x = compute_x(case_id, shifts, k, coupling);

  if (st.emit_interp) {
    CaseBlocks cb = nradi_case_blocks(case_id, shifts, k, m);
    if (st.V.cols() == 0) {
      st.interp.Sv = cb.sv;
      st.interp.Sw = cb.sw;
    } else {
      Mat top_v = st.Xbar * (st.interp.Lw.transpose() * cb.lv +
                             (st.W.transpose() * pb.Bh) * (pb.C * vi));
      Mat top_w = st.Xbar.transpose() * (st.interp.Lv.transpose() * cb.lw +
                                         (st.V.transpose() * pb.C.transpose()) *
                                             (pb.Bh.transpose() * wi));
      Mat Sv_new = Mat::Zero(st.interp.Sv.rows() + cb.sv.rows(),
                             st.interp.Sv.cols() + cb.sv.cols());
      Sv_new.topLeftCorner(st.interp.Sv.rows(), st.interp.Sv.cols()) = st.interp.Sv;
      Sv_new.topRightCorner(top_v.rows(), top_v.cols()) = top_v;
      Sv_new.bottomRightCorner(cb.sv.rows(), cb.sv.cols()) = cb.sv;
      st.interp.Sv = Sv_new;
      Mat Sw_new = Mat::Zero(st.interp.Sw.rows() + cb.sw.rows(),
                             st.interp.Sw.cols() + cb.sw.cols());
      Sw_new.topLeftCorner(st.interp.Sw.rows(), st.interp.Sw.cols()) = st.interp.Sw;
      Sw_new.topRightCorner(top_w.rows(), top_w.cols()) = top_w;
      Sw_new.bottomRightCorner(cb.sw.rows(), cb.sw.cols()) = cb.sw;
      st.interp.Sw = Sw_new;
    }
    append_cols(st.interp.Lv, cb.lv);
    append_cols(st.interp.Lw, cb.lw);
  }

  append_cols(st.V, vi);
  append_cols(st.W, wi);
  blkdiag_append(st.Xbar, x);
  st.K += (pb.E * vi) * x * bhr;
  st.Kh += cr * x * (wi.transpose() * pb.Eh);
  st.B_perp += (pb.E * vi) * x.leftCols(m);
  st.Ch_perp += x.topRows(m) * (wi.transpose() * pb.Eh);

  st.cases.push_back(case_id);
  st.residual_history.push_back(relative_residual(st));
  st.iteration += 1;
  st.next_slot += case_slots(case_id);
}

namespace {

LowRankSolution finish_solution(const NareProblem& pb, SolverState&& st,
                                const ShiftSequence& shifts, bool converged) {
  LowRankSolution sol;
  sol.V = std::move(st.V);
  sol.Xbar = std::move(st.Xbar);
  sol.W = std::move(st.W);
  sol.K = std::move(st.K);
  sol.Kh = std::move(st.Kh);
  sol.B_perp = std::move(st.B_perp);
  sol.Ch_perp = std::move(st.Ch_perp);
  for (Index k = 0; k < st.next_slot; ++k) {
    sol.shifts_used.append(shifts.alphas[k], shifts.betas[k], shifts.origins[k]);
  }
  sol.cases = std::move(st.cases);
  sol.converged = converged;
  sol.final_residual =
      st.residual_history.empty() ? (st.denom == 0.0 ? 0.0 : 1.0) : st.residual_history.back();
  if (st.emit_interp) sol.interp = std::move(st.interp);
  (void)pb;
  return sol;
}

}  // namespace

SolveResult nradi_solve(const NareProblem& pb, const SolverConfig& cfg,
                        std::optional<ShiftSequence> user_shifts) {
  DimensionReport rep = validate(pb);
  if (!rep.ok()) throw InvalidInputError("nradi_solve: " + rep.violations.front());
  check_config(cfg, pb.m());

  const bool auto_mode = !user_shifts.has_value() || user_shifts->slots() == 0;
  ShiftSequence shifts;
  if (auto_mode) {
    shifts.append(cfg.initial_alpha, cfg.initial_beta, ShiftOrigin::user);
  } else {
    shifts = *user_shifts;
  }
  check_stabilizing(shifts);

  SolverState st = nradi_init(pb, cfg);
  SolveResult out;
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&t0]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  if (st.denom == 0.0) {
    out.solution = finish_solution(pb, std::move(st), shifts, /*converged=*/true);
    out.solution.final_residual = 0.0;
    return out;
  }

  ShiftGenerator generator(pb.m(), cfg.rank_max, cfg.initial_alpha);
  double res = 1.0;
  while (res >= cfg.tol && st.next_slot < cfg.max_slots) {
    if (st.next_slot >= shifts.slots()) break;  // user list exhausted
    const Index k0 = st.next_slot;
    nradi_step(pb, st, shifts);
    res = st.residual_history.back();
    out.record.push_back({st.iteration, st.cases.back(), shifts.alphas[k0], shifts.betas[k0],
                          res, elapsed()});

    const Index block_cols = st.V.cols() - (k0 * pb.m());
    Mat vi = st.V.rightCols(block_cols);
    Mat wi = st.W.rightCols(block_cols);
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

  const bool converged = res < cfg.tol;
  out.solution = finish_solution(pb, std::move(st), shifts, converged);
  return out;
}

Mat densify_solution(const LowRankSolution& sol, Index entry_cap) {
  const Index n = sol.V.rows(), nh = sol.W.rows();
  if (n * nh > entry_cap) {
    throw InvalidInputError("densify_solution: n*nh exceeds the configured entry cap");
  }
  if (sol.width() == 0) return Mat::Zero(n, nh);
  return sol.V * sol.Xbar * sol.W.transpose();
}

}  // namespace naradi
