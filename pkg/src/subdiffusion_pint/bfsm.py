"""Block forward substitution: sequential time marching of the L1 scheme.

This is the reference the all-at-once solvers are checked against.  Each
level costs one sine-diagonal solve plus an O(k) history sum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .spatial import dst2
from .system import AllAtOnceSystem, assemble_forcing, rhs_eta

__all__ = ["NewtonDivergence", "bfsm_linear", "bfsm_semilinear", "BfsmReport"]


class NewtonDivergence(RuntimeError):
    def __init__(self, message: str, step: Optional[int] = None, residual: float = float("nan")):
        super().__init__(message)
        self.step = step
        self.residual = residual


def _shifted_solve(sys: AllAtOnceSystem, shift: float, rhs: np.ndarray) -> np.ndarray:
    """Solve ``(shift I - B) z = rhs``."""
    z = dst2(sys.op, rhs)
    z /= shift - sys.op.eig_full
    return dst2(sys.op, z, "inverse")


def _stacked(sys: AllAtOnceSystem):
    A = sys.weights.full()
    eta1, eta2 = rhs_eta(sys)
    f1, f2 = assemble_forcing(sys)
    return A, np.vstack([eta1, eta2]) + np.vstack([f1, f2])


def bfsm_linear(sys: AllAtOnceSystem, check: Optional[Callable[[int], None]] = None) -> np.ndarray:
    """All levels ``u^1 .. u^M`` stacked as an ``(M, n_space)`` array.

    ``check(k)`` is called before level ``k`` and may raise to abort.
    """
    A, rhs = _stacked(sys)
    u = np.zeros_like(rhs)
    for k in range(sys.M):
        if check is not None:
            check(k + 1)
        known = rhs[k] - A[k, :k] @ u[:k]
        u[k] = _shifted_solve(sys, A[k, k], known)
    return u


@dataclass
class BfsmReport:
    solution: np.ndarray
    newton_counts: np.ndarray

    @property
    def iter1(self) -> float:
        """Mean number of Newton steps per time level."""
        return float(np.mean(self.newton_counts))


def bfsm_semilinear(sys: AllAtOnceSystem, g: Optional[Callable[[np.ndarray], np.ndarray]],
                    step_rtol: float = 1e-10, max_iter: int = 200,
                    check: Optional[Callable[[int], None]] = None) -> BfsmReport:
    """Sequential solve of ``delta_t u^k = B u^k + g(u^k) + f^k``.

    Each level runs a modified Newton iteration whose Jacobian is frozen to
    ``a_0^{(k)} I - B``, started from the previous level and stopped when
    ``||update|| / ||start|| <= step_rtol``.
    """
    if g is None:
        return BfsmReport(bfsm_linear(sys, check), np.zeros(sys.M, dtype=int))
    A, rhs = _stacked(sys)
    u = np.zeros_like(rhs)
    counts = np.zeros(sys.M, dtype=int)
    prev = sys.u0
    for k in range(sys.M):
        if check is not None:
            check(k + 1)
        a0 = A[k, k]
        known = rhs[k] - A[k, :k] @ u[:k]
        w = prev.copy()
        ref = np.linalg.norm(w)
        for it in range(1, max_iter + 1):
            # residual of (a0 I - B) w - g(w) - known, with (a0 I - B) w applied spectrally
            lin = dst2(sys.op, dst2(sys.op, w) * (a0 - sys.op.eig_full), "inverse")
            update = _shifted_solve(sys, a0, lin - g(w) - known)
            w = w - update
            unorm = np.linalg.norm(update)
            if not np.isfinite(unorm):
                raise NewtonDivergence(f"non-finite update at level {k + 1}", step=k + 1)
            if ref == 0.0:
                ref = np.linalg.norm(w)
            if unorm <= step_rtol * ref:
                break
        else:
            raise NewtonDivergence(f"modified Newton did not converge at level {k + 1}",
                                   step=k + 1, residual=unorm)
        counts[k] = it
        u[k] = w
        prev = w
    return BfsmReport(u, counts)
