#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "naradi/nradi.hpp"
#include "naradi/oracle.hpp"
#include "naradi/problem.hpp"
#include "naradi/unradi.hpp"

namespace py = pybind11;
using namespace naradi;

namespace {

SolverConfig make_config(double tol, long max_iters, long rank_max, Complex init_shift,
                         bool emit_interp, const std::string& algo) {
  SolverConfig cfg;
  cfg.tol = tol;
  cfg.max_slots = max_iters;
  cfg.rank_max = rank_max;
  cfg.initial_alpha = init_shift;
  cfg.initial_beta = init_shift;
  cfg.emit_interp = emit_interp;
  cfg.algorithm = algorithm_from_string(algo);
  return cfg;
}

std::optional<ShiftSequence> make_shifts(const std::vector<Complex>& alphas,
                                         const std::vector<Complex>& betas) {
  if (alphas.empty()) return std::nullopt;
  if (alphas.size() != betas.size()) {
    throw InvalidInputError("alpha and beta shift lists must have equal length");
  }
  ShiftSequence seq;
  for (size_t i = 0; i < alphas.size(); ++i) {
    seq.append(alphas[i], betas[i], ShiftOrigin::user);
  }
  return seq;
}

py::dict solution_dict(const LowRankSolution& sol, const ConvergenceRecord& record) {
  py::dict d;
  d["V"] = sol.V;
  d["Xbar"] = sol.Xbar;
  d["W"] = sol.W;
  d["K"] = sol.K;
  d["Kh"] = sol.Kh;
  d["converged"] = sol.converged;
  d["final_residual"] = sol.final_residual;
  d["alphas"] = sol.shifts_used.alphas;
  d["betas"] = sol.shifts_used.betas;
  std::vector<double> residuals;
  residuals.reserve(record.size());
  for (const auto& row : record) residuals.push_back(row.residual);
  d["residuals"] = residuals;
  std::vector<int> cases;
  cases.reserve(sol.cases.size());
  for (CaseId c : sol.cases) cases.push_back(static_cast<int>(c));
  d["cases"] = cases;
  return d;
}

py::dict report_dict(const VerificationReport& rep) {
  py::dict d;
  py::list checks;
  for (const auto& c : rep.checks) {
    py::dict e;
    e["name"] = c.name;
    e["value"] = c.value;
    e["threshold"] = c.threshold;
    e["pass"] = c.pass;
    e["skipped"] = c.skipped;
    checks.append(e);
  }
  d["checks"] = checks;
  d["overall"] = rep.overall;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Low-rank ADI solvers for nonsymmetric algebraic Riccati equations";

  py::register_exception<InvalidInputError>(m, "InvalidInputError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<NareProblem>(m, "NareProblem")
      .def_property_readonly("n", &NareProblem::n)
      .def_property_readonly("nh", &NareProblem::nh)
      .def_property_readonly("m", &NareProblem::m)
      .def_property_readonly("p", &NareProblem::p)
      .def_property_readonly("E", [](const NareProblem& pb) { return Mat(pb.E); })
      .def_property_readonly("A", [](const NareProblem& pb) { return Mat(pb.A); })
      .def_readonly("B", &NareProblem::B)
      .def_readonly("C", &NareProblem::C)
      .def_property_readonly("Eh", [](const NareProblem& pb) { return Mat(pb.Eh); })
      .def_property_readonly("Ah", [](const NareProblem& pb) { return Mat(pb.Ah); })
      .def_readonly("Bh", &NareProblem::Bh)
      .def_readonly("Ch", &NareProblem::Ch);

  m.def("gen_heat", &gen_heat, py::arg("n"), py::arg("nh"), py::arg("m"), py::arg("p"),
        py::arg("seed"), "Generate a reproducible heat-family NARE problem");
  m.def("load_problem", &load_problem, py::arg("dir"));
  m.def("save_problem", &save_problem, py::arg("dir"), py::arg("problem"));
  m.def(
      "embed_lyapunov",
      [](const Mat& A, const Mat& E, const Mat& B) {
        return embed_lyapunov(A.sparseView(), E.sparseView(), B);
      },
      py::arg("A"), py::arg("E"), py::arg("B"));
  m.def(
      "embed_sylvester",
      [](const Mat& A, const Mat& E, const Mat& Ah, const Mat& Eh, const Mat& B, const Mat& Ch) {
        return embed_sylvester(A.sparseView(), E.sparseView(), Ah.sparseView(), Eh.sparseView(),
                               B, Ch);
      },
      py::arg("A"), py::arg("E"), py::arg("Ah"), py::arg("Eh"), py::arg("B"), py::arg("Ch"));

  m.def(
      "solve",
      [](const NareProblem& pb, const std::string& algo, double tol, long max_iters,
         long rank_max, Complex init_shift, bool emit_interp, const std::vector<Complex>& alphas,
         const std::vector<Complex>& betas) {
        SolverConfig cfg = make_config(tol, max_iters, rank_max, init_shift, emit_interp, algo);
        auto shifts = make_shifts(alphas, betas);
        if (cfg.algorithm == AlgorithmKind::nradi) {
          SolveResult res = nradi_solve(pb, cfg, shifts);
          py::dict d = solution_dict(res.solution, res.record);
          if (res.solution.interp) {
            d["Sv"] = res.solution.interp->Sv;
            d["Lv"] = res.solution.interp->Lv;
            d["Sw"] = res.solution.interp->Sw;
            d["Lw"] = res.solution.interp->Lw;
          }
          return d;
        }
        UnradiResult res = unradi_solve(pb, cfg, shifts);
        py::dict d = solution_dict(res.solution, res.record);
        d["Vlyap"] = res.lyapunov.Vlyap;
        d["Whlyap"] = res.lyapunov.Whlyap;
        d["Tv"] = res.Tv;
        d["Tw"] = res.Tw;
        return d;
      },
      py::arg("problem"), py::arg("algo") = "nradi", py::arg("tol") = 1e-10,
      py::arg("max_iters") = 100, py::arg("rank_max") = 14,
      py::arg("init_shift") = Complex(-1e-3, 0.0), py::arg("emit_interp") = false,
      py::arg("alphas") = std::vector<Complex>{}, py::arg("betas") = std::vector<Complex>{},
      "Run N-RADI or UN-RADI; empty shift lists select automatic generation");

  m.def(
      "dense_solve",
      [](const NareProblem& pb) {
        DenseNareSolution sol = dense_nare_solve(pb);
        py::dict d;
        d["X"] = sol.X;
        d["residual_norm"] = sol.residual_norm;
        return d;
      },
      py::arg("problem"), "Dense invariant-subspace oracle solution");

  m.def(
      "dense_residual",
      [](const NareProblem& pb, const Mat& X) {
        auto [R, nrm] = dense_residual(pb, X);
        return py::make_tuple(R, nrm);
      },
      py::arg("problem"), py::arg("X"));

  m.def(
      "verify",
      [](const NareProblem& pb, const Mat& V, const Mat& Xbar, const Mat& W, bool dense) {
        LowRankSolution sol;
        sol.V = V;
        sol.Xbar = Xbar;
        sol.W = W;
        Mat E(pb.E), Eh(pb.Eh);
        Mat Xt = V * Xbar * W.transpose();
        sol.K = E * Xt * pb.Bh;
        sol.Kh = pb.C * Xt * Eh;
        VerifyOptions opts;
        opts.with_dense_oracle = dense;
        return report_dict(verify_report(pb, sol, nullptr, opts));
      },
      py::arg("problem"), py::arg("V"), py::arg("Xbar"), py::arg("W"), py::arg("dense") = false,
      "Identity checks on raw factors (no interpolation data)");
}
