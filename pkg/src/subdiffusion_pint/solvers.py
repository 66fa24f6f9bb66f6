"""Top-level all-at-once solvers for the linear and semilinear problems."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .krylov import KrylovConfig, KrylovResult, bicgstab
from .preconditioners import (
    apply_p1_inverse,
    apply_p_alpha_inverse,
    build_p1,
    build_p_alpha,
    default_alpha,
)
from .system import (
    AllAtOnceSystem,
    apply_M11,
    apply_M21,
    apply_M22,
    assemble_forcing,
    rhs_eta,
)

__all__ = ["LinearSolve", "solve_linear"]


@dataclass
class LinearSolve:
    solution: np.ndarray
    sub1: KrylovResult
    sub2: KrylovResult

    @property
    def iterations(self) -> tuple[float, float]:
        return (self.sub1.iterations, self.sub2.iterations)

    @property
    def converged(self) -> bool:
        return self.sub1.converged and self.sub2.converged


def solve_linear(sys: AllAtOnceSystem, precondition: bool = True, alpha: Optional[float] = None,
                 config: KrylovConfig = KrylovConfig(), half_spectrum: bool = True,
                 callback=None) -> LinearSolve:
    """Solve the first subproblem, then the second with the coupling moved right.

    With ``precondition`` the two BiCGSTAB runs use ``P1`` and ``P_alpha``;
    ``alpha`` defaults to ``min(1e-4, tau_tilde / 2)``.
    """
    eta1, eta2 = rhs_eta(sys)
    f1, f2 = assemble_forcing(sys)
    prec1 = prec2 = None
    if precondition:
        p1 = build_p1(sys.weights, sys.op)
        a = default_alpha(sys.mesh.tau_tilde) if alpha is None else alpha
        pa = build_p_alpha(sys.weights, sys.op, a)
        prec1 = lambda v: apply_p1_inverse(p1, v)  # noqa: E731
        prec2 = lambda v: apply_p_alpha_inverse(pa, v, half_spectrum)  # noqa: E731

    res1 = bicgstab(lambda v: apply_M11(sys, v), eta1 + f1, prec1, config, callback)
    rhs2 = eta2 + f2 - apply_M21(sys, res1.solution)
    res2 = bicgstab(lambda v: apply_M22(sys, v), rhs2, prec2, config, callback)
    return LinearSolve(np.vstack([res1.solution, res2.solution]), res1, res2)
