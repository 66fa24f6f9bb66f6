"""Right-preconditioned BiCGSTAB on arbitrary array-shaped unknowns."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = ["KrylovConfig", "KrylovResult", "bicgstab"]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class KrylovConfig:
    rtol: float = 1e-9
    maxit: int = 1000
    record_history: bool = True

    def __post_init__(self):
        if not 0.0 < self.rtol < 1.0:
            raise ValueError(f"rtol must lie in (0, 1), got {self.rtol}")
        if self.maxit < 1:
            raise ValueError(f"maxit must be >= 1, got {self.maxit}")


@dataclass
class KrylovResult:
    solution: np.ndarray
    iterations: float
    converged: bool
    residual_history: list[float] = field(default_factory=list)
    breakdown: Optional[str] = None

    @property
    def exceeded_maxit(self) -> bool:
        return not self.converged and self.breakdown is None


def _dot(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.vdot(a.ravel(), b.ravel()).real)


def bicgstab(matvec: Callable[[np.ndarray], np.ndarray], b: np.ndarray,
             precond: Optional[Callable[[np.ndarray], np.ndarray]] = None,
             config: KrylovConfig = KrylovConfig(),
             callback: Optional[Callable[[float, float], None]] = None) -> KrylovResult:
    """Solve ``A x = b`` from a zero initial guess.

    The preconditioner is applied to the search directions (``A P^{-1} y = b``,
    ``x = P^{-1} y``), so the monitored residual is the true residual
    ``b - A x`` regardless of ``precond``.  Convergence means
    ``||r_k|| / ||r_0|| <= rtol``.  Iterations are counted as full steps
    (two products with ``A`` each); a step that converges after its first
    half still counts as one, so counts are whole numbers.

    ``callback(iteration, relres)`` is called after every half step and may
    raise to abort the solve.
    """
    b = np.asarray(b, dtype=float)
    x = np.zeros_like(b)
    apply_prec = precond if precond is not None else (lambda v: v)

    r = b.copy()
    r0_norm = np.linalg.norm(r)
    history = [1.0] if config.record_history else []
    if not np.isfinite(r0_norm):
        raise ValueError("right-hand side is not finite")
    if r0_norm == 0.0:
        return KrylovResult(solution=x, iterations=0.0, converged=True, residual_history=history)

    tol = config.rtol * r0_norm
    r_hat = r.copy()
    rho_old = alpha = omega = 1.0
    v = np.zeros_like(b)
    p = np.zeros_like(b)

    for it in range(1, config.maxit + 1):
        rho = _dot(r_hat, r)
        if rho == 0.0:
            return KrylovResult(x, float(it - 1), False, history, breakdown="rho")
        if it == 1:
            p = r.copy()
        else:
            beta = (rho / rho_old) * (alpha / omega)
            p = r + beta * (p - omega * v)
        p_hat = apply_prec(p)
        v = matvec(p_hat)
        denom = _dot(r_hat, v)
        if denom == 0.0:
            return KrylovResult(x, float(it - 1), False, history, breakdown="rho")
        alpha = rho / denom
        s = r - alpha * v
        s_norm = np.linalg.norm(s)
        if config.record_history:
            history.append(s_norm / r0_norm)
        if callback is not None:
            callback(float(it), s_norm / r0_norm)
        if s_norm <= tol:
            x = x + alpha * p_hat
            return KrylovResult(x, float(it), True, history)

        s_hat = apply_prec(s)
        t = matvec(s_hat)
        tt = _dot(t, t)
        if tt == 0.0:
            return KrylovResult(x + alpha * p_hat, float(it), False, history, breakdown="omega")
        omega = _dot(t, s) / tt
        x = x + alpha * p_hat + omega * s_hat
        r = s - omega * t
        r_norm = np.linalg.norm(r)
        if config.record_history:
            history.append(r_norm / r0_norm)
        if callback is not None:
            callback(float(it), r_norm / r0_norm)
        if r_norm <= tol:
            return KrylovResult(x, float(it), True, history)
        if omega == 0.0:
            return KrylovResult(x, float(it), False, history, breakdown="omega")
        rho_old = rho

    log.info("BiCGSTAB stopped after %d iterations, relres %.3e", config.maxit, r_norm / r0_norm)
    return KrylovResult(x, float(config.maxit), False, history)
