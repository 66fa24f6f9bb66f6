"""All-at-once modified Newton for the semilinear problem.

The nonlinear system ``M u - G(u) = eta + f`` is split exactly like the
linear one.  Each subproblem iterates

    M11 U = G1(u),   u <- u - U        (inner solve preconditioned by P1)
    M22 U = G2(u),   u <- u - U        (inner solve preconditioned by P_alpha)

i.e. the Jacobian is frozen to the linear block.  Starting values come from
a cheap linearised time-stepping run on a coarser time mesh.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import interp1d

from .bfsm import NewtonDivergence, _shifted_solve
from .krylov import KrylovConfig, bicgstab
from .mesh import assemble_weight_table, build_mesh, default_split
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

__all__ = [
    "NewtonConfig",
    "SubproblemStats",
    "NewtonReport",
    "coarse_initial_guess",
    "newton_subproblem1",
    "newton_subproblem2",
    "solve_semilinear",
]

Nonlinearity = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class NewtonConfig:
    step_rtol: float = 1e-10
    max_outer: int = 200
    inner: KrylovConfig = KrylovConfig(rtol=1e-6)
    coarsening: int = 2
    alpha: Optional[float] = None
    precondition: bool = True

    def __post_init__(self):
        if self.step_rtol <= 0:
            raise ValueError("step_rtol must be positive")
        if self.max_outer < 1:
            raise ValueError("max_outer must be >= 1")
        if self.coarsening < 1:
            raise ValueError("coarsening factor must be >= 1")


@dataclass
class SubproblemStats:
    outer: int = 0
    inner_counts: list[float] = field(default_factory=list)
    converged: bool = False

    @property
    def inner_avg(self) -> float:
        return float(np.mean(self.inner_counts)) if self.inner_counts else 0.0


@dataclass
class NewtonReport:
    sub1: SubproblemStats
    sub2: SubproblemStats

    @property
    def iter_outer(self) -> tuple[int, int]:
        return (self.sub1.outer, self.sub2.outer)

    @property
    def iter_inner_avg(self) -> tuple[float, float]:
        return (self.sub1.inner_avg, self.sub2.inner_avg)

    @property
    def converged(self) -> tuple[bool, bool]:
        return (self.sub1.converged, self.sub2.converged)


def _linearised_march(sys: AllAtOnceSystem, g: Optional[Nonlinearity]) -> np.ndarray:
    # delta_t u^k = B u^k + g(u^{k-1}) + f^k, one sine-diagonal solve per level
    A = sys.weights.full()
    eta1, eta2 = rhs_eta(sys)
    f1, f2 = assemble_forcing(sys)
    rhs = np.vstack([eta1, eta2]) + np.vstack([f1, f2])
    u = np.zeros_like(rhs)
    prev = sys.u0
    for k in range(sys.M):
        known = rhs[k] - A[k, :k] @ u[:k]
        if g is not None:
            known = known + g(prev)
        u[k] = _shifted_solve(sys, A[k, k], known)
        prev = u[k]
    return u


def coarse_initial_guess(sys: AllAtOnceSystem, g: Optional[Nonlinearity],
                         coarsening: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Starting values for both subproblems.

    The linearised scheme is marched on a time mesh with ``M // coarsening``
    steps (same grading exponent and split recipe, same spatial grid) and
    interpolated linearly in time onto the fine mesh.  Falls back to zeros
    when either subproblem has fewer than two levels or the coarse mesh
    cannot be built.
    """
    M, M0, ns = sys.M, sys.M0, sys.n_space
    zero = (np.zeros((M0, ns)), np.zeros((M - M0, ns)))
    if M0 < 2 or M - M0 < 2:
        return zero
    mesh = sys.mesh
    if coarsening == 1:
        coarse = sys
    else:
        Mc = M // coarsening
        if Mc < 2:
            return zero
        T0_frac, M0c = default_split(Mc, mesh.r)
        T0c = mesh.T0 if mesh.T0 < mesh.T else T0_frac * mesh.T
        cmesh = build_mesh(mesh.T, T0c, Mc, M0c, mesh.r)
        coarse = AllAtOnceSystem(mesh=cmesh, weights=assemble_weight_table(cmesh, sys.weights.beta),
                                 op=sys.op, u0=sys.u0, forcing=sys.forcing)
    uc = _linearised_march(coarse, g)
    if coarse is sys:
        u = uc
    else:
        values = np.vstack([sys.u0[None, :], uc])
        u = interp1d(coarse.mesh.points, values, axis=0, kind="linear",
                     assume_sorted=True)(mesh.points[1:])
    return u[:M0].copy(), u[M0:].copy()


def _newton_loop(apply_lin, residual, precond, guess, cfg: NewtonConfig, linear: bool,
                 callback=None) -> tuple[np.ndarray, SubproblemStats]:
    stats = SubproblemStats()
    u = np.array(guess, dtype=float)
    ref = np.linalg.norm(u)
    unorm = np.inf
    for _ in range(cfg.max_outer):
        rhs = residual(u)
        if not np.all(np.isfinite(rhs)):
            raise NewtonDivergence(f"non-finite residual at outer step {stats.outer + 1}",
                                   step=stats.outer + 1)
        res = bicgstab(apply_lin, rhs, precond, cfg.inner, callback=callback)
        stats.outer += 1
        stats.inner_counts.append(res.iterations)
        u = u - res.solution
        if linear:
            stats.converged = res.converged
            return u, stats
        unorm = np.linalg.norm(res.solution)
        if ref == 0.0:
            ref = np.linalg.norm(u)
        if unorm <= cfg.step_rtol * ref:
            stats.converged = True
            return u, stats
    raise NewtonDivergence(f"modified Newton did not converge in {cfg.max_outer} iterations",
                           residual=unorm)


def _G(g: Optional[Nonlinearity], u: np.ndarray) -> np.ndarray:
    return np.zeros_like(u) if g is None else g(u)


def newton_subproblem1(sys: AllAtOnceSystem, g: Optional[Nonlinearity], guess: np.ndarray,
                       cfg: NewtonConfig = NewtonConfig(), callback=None):
    """Solve ``M11 u1 - G(u1) = eta1 + f1``.

    With ``g=None`` the problem is linear: one outer step from a zero start
    is exact, and the inner solve is the plain linear solve.
    """
    eta1, _ = rhs_eta(sys)
    f1, _ = assemble_forcing(sys)
    p1 = build_p1(sys.weights, sys.op) if cfg.precondition else None
    precond = (lambda v: apply_p1_inverse(p1, v)) if p1 is not None else None
    if g is None:
        guess = np.zeros_like(eta1)

    def residual(u):
        return apply_M11(sys, u) - _G(g, u) - eta1 - f1

    return _newton_loop(lambda v: apply_M11(sys, v), residual, precond, guess, cfg,
                        linear=g is None, callback=callback)


def newton_subproblem2(sys: AllAtOnceSystem, g: Optional[Nonlinearity], u1: np.ndarray,
                       guess: np.ndarray, cfg: NewtonConfig = NewtonConfig(), callback=None):
    """Solve ``M22 u2 - G(u2) = eta2 + f2 - M21 u1`` for given ``u1``."""
    _, eta2 = rhs_eta(sys)
    _, f2 = assemble_forcing(sys)
    known = eta2 + f2 - apply_M21(sys, u1)
    precond = None
    if cfg.precondition:
        alpha = cfg.alpha if cfg.alpha is not None else default_alpha(sys.mesh.tau_tilde)
        pa = build_p_alpha(sys.weights, sys.op, alpha)
        precond = lambda v: apply_p_alpha_inverse(pa, v)  # noqa: E731
    if g is None:
        guess = np.zeros_like(eta2)

    def residual(u):
        return apply_M22(sys, u) - _G(g, u) - known

    return _newton_loop(lambda v: apply_M22(sys, v), residual, precond, guess, cfg,
                        linear=g is None, callback=callback)


def solve_semilinear(sys: AllAtOnceSystem, g: Optional[Nonlinearity],
                     cfg: NewtonConfig = NewtonConfig(), callback=None):
    """Both subproblems in sequence; returns the stacked solution and a report."""
    guess1, guess2 = coarse_initial_guess(sys, g, cfg.coarsening)
    u1, s1 = newton_subproblem1(sys, g, guess1, cfg, callback)
    u2, s2 = newton_subproblem2(sys, g, u1, guess2, cfg, callback)
    return np.vstack([u1, u2]), NewtonReport(s1, s2)
