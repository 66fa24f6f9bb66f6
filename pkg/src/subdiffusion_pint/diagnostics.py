"""Dense, desk-scale diagnostics for the two preconditioners.

Everything here assembles explicit matrices and is therefore guarded by size
limits; production solves never call into this module.  Spectra are also
available through a per-mode reduction (all operators are block diagonal in
the sine basis), which reaches the sizes used for plotting.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .mesh import WeightTable
from .preconditioners import build_p1, build_p_alpha, default_alpha
from .spatial import SpatialOperator, laplacian_matrix
from .system import AllAtOnceSystem

__all__ = [
    "SizeGuardError",
    "SDDViolation",
    "SpectrumDump",
    "BoundReport",
    "dense_assemble",
    "sine_basis_matrix",
    "nilpotency_check",
    "q_inf_norm",
    "palpha_distance",
    "bound_constant",
    "decay_profile",
    "spectrum",
    "write_spectrum_csv",
    "write_decay_csv",
    "write_bound_csv",
]

MAX_TIME_LEVELS = 64
MAX_SPACE_SIZE = 1024
SPECTRUM_TAGS = ("M11", "P1invM11", "M22", "PalphaInvM22")


class SizeGuardError(ValueError):
    pass


class SDDViolation(ArithmeticError):
    pass


def _guard(n_time: int, n_space: int) -> None:
    if n_time > MAX_TIME_LEVELS or n_space > MAX_SPACE_SIZE:
        raise SizeGuardError(
            f"dense assembly refused for {n_time} time levels x {n_space} unknowns "
            f"(limits {MAX_TIME_LEVELS} x {MAX_SPACE_SIZE})")


def _kron_system(Atime: np.ndarray, B: np.ndarray) -> np.ndarray:
    return np.kron(Atime, np.eye(B.shape[0])) - np.kron(np.eye(Atime.shape[0]), B)


def _alpha_for(sys: AllAtOnceSystem, alpha: Optional[float]) -> float:
    return default_alpha(sys.mesh.tau_tilde) if alpha is None else alpha


def dense_assemble(sys: AllAtOnceSystem, which: str, alpha: Optional[float] = None) -> np.ndarray:
    """Explicit Kronecker form of one block operator.

    ``which`` is one of ``M``, ``M11``, ``M21``, ``M22``, ``P1``, ``Palpha``.
    """
    M, ns = sys.M, sys.n_space
    _guard(M, ns)
    B = laplacian_matrix(sys.op)
    w = sys.weights
    if which == "M":
        return _kron_system(w.full(), B)
    if which == "M11":
        return _kron_system(w.A11, B)
    if which == "M21":
        return np.kron(w.A21, np.eye(ns))
    if which == "M22":
        return _kron_system(w.A22(), B)
    if which == "P1":
        return _kron_system(build_p1(w, sys.op).tri(), B)
    if which == "Palpha":
        pa = build_p_alpha(w, sys.op, _alpha_for(sys, alpha))
        return _kron_system(pa.circulant_matrix(), B)
    raise ValueError(f"unknown block {which!r}")


def sine_basis_matrix(op: SpatialOperator) -> np.ndarray:
    """Dense ``Q = Q_y (x) Q_x``."""

    def q(n):
        i = np.arange(1, n)
        return np.sqrt(2.0 / n) * np.sin(np.outer(i, i) * np.pi / n)

    return np.kron(q(op.Ny), q(op.Nx))


def nilpotency_check(sys: AllAtOnceSystem, p1=None) -> tuple[float, float, int]:
    """Eigenvalue spread and nilpotency of ``P1^{-1} M11``.

    Returns ``(max |lambda - 1|, ||(P1^{-1}M11 - I)^p||_F / ||P1^{-1}M11||_F, p)``
    with ``p = ceil(M0/3)``.

    The preconditioned matrix is formed densely and then conjugated by the
    orthogonal ``I (x) Q``.  In that basis it is a permuted direct sum of
    ``M0 x M0`` lower-triangular matrices, so its eigenvalues are read off
    the diagonal instead of going through a general eigensolver, whose
    error on the underlying Jordan blocks would be of order ``eps**(1/p)``.
    If the computed matrix does not have that structure the general
    eigensolver is used after all.
    """
    M0, ns = sys.M0, sys.n_space
    _guard(M0, ns)
    if p1 is None:
        p1 = build_p1(sys.weights, sys.op)
    B = laplacian_matrix(sys.op)
    P = _kron_system(p1.tri(), B)
    K = np.linalg.solve(P, _kron_system(sys.weights.A11, B))
    power = math.ceil(M0 / 3)
    X = K - np.eye(K.shape[0])
    nil = np.linalg.norm(np.linalg.matrix_power(X, power)) / np.linalg.norm(K)

    Qt = np.kron(np.eye(M0), sine_basis_matrix(sys.op))
    Ks = Qt @ K @ Qt
    # reorder unknowns mode-major so that each mode is one M0 x M0 block
    perm = np.arange(M0 * ns).reshape(M0, ns).T.ravel()
    Kp = Ks[np.ix_(perm, perm)]
    # the read-off is only valid if everything outside the lower-triangular
    # per-mode blocks is rounding noise
    mask = np.kron(np.eye(ns), np.tril(np.ones((M0, M0)))).astype(bool)
    if np.abs(Kp[~mask]).max(initial=0.0) > 1e-10 * np.abs(Kp).max():
        eigs = np.linalg.eigvals(K)
        return float(np.max(np.abs(eigs - 1.0))), float(nil), power
    eigs = []
    for m in range(ns):
        blk = Kp[m * M0:(m + 1) * M0, m * M0:(m + 1) * M0]
        eigs.append(np.diag(blk))
    eigs = np.concatenate(eigs)
    return float(np.max(np.abs(eigs - 1.0))), float(nil), power


def q_inf_norm(sys: AllAtOnceSystem, W: np.ndarray) -> float:
    """``|| (I (x) Q^T) W (I (x) Q) ||_inf`` for a dense block operator ``W``."""
    ns = sys.n_space
    n = W.shape[0] // ns
    if W.shape != (n * ns, n * ns):
        raise ValueError(f"operator of shape {W.shape} is not a square block matrix over {ns} unknowns")
    _guard(n, ns)
    Qb = np.kron(np.eye(n), sine_basis_matrix(sys.op))
    return float(np.max(np.abs(Qb.T @ W @ Qb).sum(axis=1)))


def palpha_distance(omega: np.ndarray, eigs: Iterable[float], alpha: float) -> float:
    """``||I - P_alpha^{-1} M22||_{Q,inf}`` mode by mode.

    In the sine basis the operator splits into one ``n x n`` matrix
    ``I - (A22^alpha - mu I)^{-1} (A22 - mu I)`` per eigenvalue ``mu`` of
    ``B``; the norm is the largest of their row-sum norms.
    """
    pa = build_p_alpha(np.asarray(omega), None, alpha)
    Ca = pa.circulant_matrix()
    n = Ca.shape[0]
    A22 = np.tril(Ca)
    best = 0.0
    for mu in np.unique(np.asarray(list(eigs))):
        E = np.eye(n) - np.linalg.solve(Ca - mu * np.eye(n), A22 - mu * np.eye(n))
        best = max(best, float(np.abs(E).sum(axis=1).max()))
    return best


@dataclass(frozen=True)
class BoundReport:
    """Bound ``lhs <= C * alpha`` for the alpha-circulant preconditioner.

    ``C`` uses the closed-form double sum for ``||L_eps Atilde||_inf``,
    which is the row sum of the *last* row only.  ``C_rowmax`` replaces it
    with the true maximum row sum; the two differ when ``eps`` is small.
    """

    epsilon_max: float
    C: float
    alpha: float
    lhs: Optional[float] = None
    C_rowmax: Optional[float] = None

    @property
    def rhs(self) -> float:
        return self.C * self.alpha

    @property
    def rhs_rowmax(self) -> Optional[float]:
        return None if self.C_rowmax is None else self.C_rowmax * self.alpha

    @property
    def holds(self) -> Optional[bool]:
        return None if self.lhs is None else self.lhs <= self.rhs


def _sdd_recursions(W: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = W.shape[0]
    absW = np.abs(W)
    d = np.abs(np.diag(W))
    z = np.empty(n)
    h = np.empty(n)
    for i in range(n):
        ratio = absW[i, :i] / d[:i]
        z[i] = 1.0 + ratio @ z[:i]
        h[i] = ratio @ h[:i] + absW[i, i + 1:].sum()
    return z, h


def bound_constant(weights, alpha: float, lhs: Optional[float] = None) -> BoundReport:
    """Constant ``C`` with ``||I - P_alpha^{-1} M22||_{Q,inf} <= C alpha``.

    ``weights`` may be a :class:`WeightTable` or the vector ``omega``.
    Raises :class:`SDDViolation` if ``L_eps A22^alpha`` is not strictly
    diagonally dominant, which would make the inverse-norm estimate invalid.
    """
    omega = np.asarray(weights.omega if isinstance(weights, WeightTable) else weights, dtype=float)
    n = omega.size
    if n < 2:
        raise ValueError("the bound needs at least two uniform levels")
    eps = -omega[1] / omega[0]
    Ca = build_p_alpha(omega, None, alpha).circulant_matrix()
    idx = np.arange(n)
    diff = idx[:, None] - idx[None, :]
    L = np.where(diff >= 0, eps ** np.maximum(diff, 0), 0.0)
    R = L @ Ca
    diag = np.diag(R)
    if np.any(diag <= 0):
        raise SDDViolation("R has a non-positive diagonal entry")
    z, h = _sdd_recursions(R)
    denom = 1.0 - h / diag
    if np.any(denom <= 0):
        raise SDDViolation(f"R is not strictly diagonally dominant (min margin {denom.min():.3e})")
    inv_bound = np.max(z / diag) / np.min(denom)
    tail = np.abs(omega)
    tail_sum = sum(eps**k * tail[n - k:].sum() for k in range(1, n))
    Atilde = (Ca - np.tril(Ca)) / alpha
    row_max = np.abs(L @ Atilde).sum(axis=1).max()
    return BoundReport(epsilon_max=float(eps), C=float(inv_bound * tail_sum),
                       alpha=float(alpha), lhs=lhs, C_rowmax=float(inv_bound * row_max))


def decay_profile(sys: AllAtOnceSystem) -> np.ndarray:
    """Largest weight magnitude on each block sub-diagonal of ``M11``.

    Row ``d`` holds ``max_k |A11[k, k-d]|``; the Laplacian only touches
    ``d = 0`` and is left out.
    """
    M0 = sys.M0
    _guard(M0, sys.n_space)
    A11 = sys.weights.A11
    return np.array([np.abs(np.diag(A11, -d)).max() for d in range(M0)])


@dataclass
class SpectrumDump:
    matrix_tag: str
    eigenvalues: np.ndarray
    params: dict = field(default_factory=dict)


def spectrum(sys: AllAtOnceSystem, tag: str, alpha: Optional[float] = None,
             params: Optional[dict] = None) -> SpectrumDump:
    """Eigenvalues of one of :data:`SPECTRUM_TAGS`.

    The operator is reduced to one small time matrix per Laplacian
    eigenvalue (exact, since ``I (x) Q`` block-diagonalises all four), and
    each small matrix goes to a dense general eigensolver.
    """
    if tag not in SPECTRUM_TAGS:
        raise ValueError(f"unknown spectrum tag {tag!r}")
    w = sys.weights
    mus = sys.op.eig_full
    out = []
    if tag in ("M11", "P1invM11"):
        A = w.A11
        T = build_p1(w, sys.op).tri()
        for mu in mus:
            Am = A - mu * np.eye(A.shape[0])
            if tag == "M11":
                out.append(np.linalg.eigvals(Am))
            else:
                K = solve_triangular(T - mu * np.eye(A.shape[0]), Am, lower=True)
                out.append(np.linalg.eigvals(K))
    else:
        A = w.A22()
        n = A.shape[0]
        a = _alpha_for(sys, alpha)
        Ca = build_p_alpha(w, sys.op, a).circulant_matrix()
        for mu in mus:
            Am = A - mu * np.eye(n)
            if tag == "M22":
                out.append(np.linalg.eigvals(Am))
            else:
                out.append(np.linalg.eigvals(np.linalg.solve(Ca - mu * np.eye(n), Am)))
    return SpectrumDump(matrix_tag=tag, eigenvalues=np.concatenate(out), params=dict(params or {}))


def write_spectrum_csv(path, dump: SpectrumDump) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["re", "im"])
        for lam in dump.eigenvalues:
            writer.writerow([repr(float(np.real(lam))), repr(float(np.imag(lam)))])
    return path


def write_decay_csv(path, profile: Sequence[float]) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["diagonal_index", "max_abs"])
        for d, v in enumerate(profile):
            writer.writerow([d, repr(float(v))])
    return path


def write_bound_csv(path, reports: Sequence[BoundReport]) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["alpha", "epsilon_max", "C", "rhs", "C_rowmax", "lhs", "holds"])
        for rep in reports:
            writer.writerow([rep.alpha, rep.epsilon_max, rep.C, rep.rhs,
                             "" if rep.C_rowmax is None else rep.C_rowmax,
                             "" if rep.lhs is None else rep.lhs,
                             "" if rep.holds is None else int(rep.holds)])
    return path
