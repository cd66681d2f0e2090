"""Low-rank ADI solvers for nonsymmetric algebraic Riccati equations."""

from ._core import (
    InvalidInputError,
    NareProblem,
    NumericalError,
    dense_residual,
    dense_solve,
    embed_lyapunov,
    embed_sylvester,
    gen_heat,
    load_problem,
    save_problem,
    solve,
    verify,
)

__all__ = [
    "InvalidInputError",
    "NareProblem",
    "NumericalError",
    "dense_residual",
    "dense_solve",
    "embed_lyapunov",
    "embed_sylvester",
    "gen_heat",
    "load_problem",
    "save_problem",
    "solve",
    "verify",
]
