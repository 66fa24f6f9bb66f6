"""Hybrid graded/uniform time mesh and L1 quadrature weights.

The time interval ``[0, T]`` is split at ``T0``. On ``[0, T0]`` the points
follow ``t_k = T0 (k/M0)^r``; on ``[T0, T]`` the step is constant.  The L1
discretisation of the Caputo-type memory term on such a mesh produces a
lower-triangular matrix ``A`` whose trailing block is Toeplitz; the
functions here build every piece of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma

__all__ = [
    "TimeMesh",
    "WeightTable",
    "kernel_xi",
    "build_mesh",
    "default_split",
    "graded_weights",
    "uniform_weights",
    "uniform_b",
    "assemble_weight_table",
    "l1_matrix",
]


def kernel_xi(gamma_order: float, t):
    """Weakly singular kernel ``t**(gamma-1) / Gamma(gamma)`` for ``t > 0``."""
    if gamma_order <= 0:
        raise ValueError(f"kernel order must be positive: {gamma_order}")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise ValueError("kernel_xi is only defined for t > 0")
    out = t_arr ** (gamma_order - 1.0) / gamma(gamma_order)
    return float(out) if out.ndim == 0 else out


def _power_difference(upper, lower, p: float):
    """``upper**p - lower**p`` for ``upper > lower >= 0`` without cancellation."""
    upper = np.asarray(upper, dtype=float)
    lower = np.asarray(lower, dtype=float)
    out = np.empty(np.broadcast(upper, lower).shape)
    upper, lower = np.broadcast_arrays(upper, lower)
    zero = lower == 0.0
    out[zero] = upper[zero] ** p
    nz = ~zero
    ratio = (upper[nz] - lower[nz]) / lower[nz]
    out[nz] = lower[nz] ** p * np.expm1(p * np.log1p(ratio))
    return out


@dataclass(frozen=True)
class TimeMesh:
    T: float
    T0: float
    M: int
    M0: int
    r: float
    points: np.ndarray
    steps: np.ndarray

    @property
    def tau_tilde(self) -> float:
        return (self.T - self.T0) / (self.M - self.M0)


def build_mesh(T: float, T0: float, M: int, M0: int, r: float) -> TimeMesh:
    """Graded points on ``[0, T0]`` followed by uniform points on ``[T0, T]``."""
    if not 0.0 < T0 < T:
        raise ValueError(f"need 0 < T0 < T, got T0={T0}, T={T}")
    if not 1 <= M0 < M:
        raise ValueError(f"need 1 <= M0 < M, got M0={M0}, M={M}")
    if r < 1.0:
        raise ValueError(f"grading exponent must be >= 1, got r={r}")
    M, M0 = int(M), int(M0)
    k = np.arange(M0 + 1, dtype=float)
    graded = T0 * (k / M0) ** r
    tau_tilde = (T - T0) / (M - M0)
    uniform = T0 + np.arange(1, M - M0 + 1, dtype=float) * tau_tilde
    points = np.concatenate([graded, uniform])
    points[0] = 0.0
    points[M0] = T0
    points[M] = T
    steps = np.diff(points)
    # the uniform part is stored exactly so that A22 stays Toeplitz
    steps[M0:] = tau_tilde
    points.setflags(write=False)
    steps.setflags(write=False)
    return TimeMesh(T=float(T), T0=float(T0), M=M, M0=M0, r=float(r),
                    points=points, steps=steps)


def default_split(M: int, r: float) -> tuple[float, int]:
    """Split recipe ``T0 = 2**-r``, ``M0 = ceil(r M / (2**r - 1 + r))``."""
    if M < 2:
        raise ValueError(f"need M >= 2, got {M}")
    if r < 1.0:
        raise ValueError(f"grading exponent must be >= 1, got r={r}")
    T0 = 2.0 ** (-r)
    # the ratio is computed as r*M first so that exact integer cases stay exact
    M0 = math.ceil(r * M / (2.0 ** r - 1.0 + r))
    M0 = min(max(M0, 1), M - 1)
    return T0, M0


def graded_weights(mesh: TimeMesh, beta: float, k: int) -> np.ndarray:
    """L1 weights of time level ``k`` on an arbitrary mesh.

    Returns ``w`` with ``w[l-1] = a_{k-l}^{(k)}`` for ``l = 1..k``, i.e. the
    average of ``xi_{1-beta}(t_k - s)`` over the ``l``-th interval.
    """
    if not 1 <= k <= mesh.M:
        raise IndexError(f"time level out of range: 1 <= {k} <= {mesh.M}")
    t = mesh.points
    tk = t[k]
    upper = tk - t[:k]
    lower = tk - t[1:k + 1]
    lower[-1] = 0.0
    p = 1.0 - beta
    return _power_difference(upper, lower, p) / (gamma(2.0 - beta) * mesh.steps[:k])


def uniform_b(beta: float, tau_tilde: float, n: int) -> np.ndarray:
    """Uniform-step weights ``b_0 .. b_{n-1}``."""
    ell = np.arange(n, dtype=float)
    scale = tau_tilde ** (-beta) / gamma(2.0 - beta)
    return scale * _power_difference(ell + 1.0, ell, 1.0 - beta)


def uniform_weights(beta: float, tau_tilde: float, n: int) -> np.ndarray:
    """First column ``omega_0 .. omega_{n-1}`` of the Toeplitz block."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if tau_tilde <= 0:
        raise ValueError(f"step must be positive, got {tau_tilde}")
    b = uniform_b(beta, tau_tilde, n)
    omega = np.empty(n)
    omega[0] = b[0]
    omega[1:] = np.diff(b)
    return omega


@dataclass(frozen=True)
class WeightTable:
    """All coefficients of the lower-triangular time matrix ``A``.

    ``A11`` is ``M0 x M0``, ``A21`` is ``(M-M0) x M0`` and the Toeplitz block
    ``A22`` is generated by ``omega``.  ``eta_coeffs[k-1]`` multiplies the
    initial value in the right-hand side of level ``k``.
    """

    beta: float
    mesh: TimeMesh
    A11: np.ndarray
    A21: np.ndarray
    omega: np.ndarray
    eta_coeffs: np.ndarray

    @property
    def M(self) -> int:
        return self.mesh.M

    @property
    def M0(self) -> int:
        return self.mesh.M0

    def A22(self) -> np.ndarray:
        from scipy.linalg import toeplitz

        n = self.omega.size
        return toeplitz(self.omega, np.zeros(n))

    def full(self) -> np.ndarray:
        """Dense ``M x M`` matrix ``A`` assembled from the blocks."""
        M, M0 = self.M, self.M0
        A = np.zeros((M, M))
        A[:M0, :M0] = self.A11
        A[M0:, :M0] = self.A21
        A[M0:, M0:] = self.A22()
        return A


def _l1_row(w: np.ndarray) -> np.ndarray:
    # w[l-1] = a_{k-l}; the coefficient of u^l is a_{k-l} - a_{k-l-1}
    row = np.empty_like(w)
    row[:-1] = w[:-1] - w[1:]
    row[-1] = w[-1]
    return row


def assemble_weight_table(mesh: TimeMesh, beta: float) -> WeightTable:
    if not 0.0 < beta < 1.0:
        raise ValueError(f"fractional order must lie in (0, 1), got {beta}")
    M, M0 = mesh.M, mesh.M0
    n2 = M - M0
    omega = uniform_weights(beta, mesh.tau_tilde, n2)
    b = uniform_b(beta, mesh.tau_tilde, n2)

    A11 = np.zeros((M0, M0))
    A21 = np.zeros((n2, M0))
    eta = np.empty(M)
    for k in range(1, M + 1):
        w = graded_weights(mesh, beta, k)
        eta[k - 1] = w[0]
        if k <= M0:
            A11[k - 1, :k] = _l1_row(w)
        else:
            j = k - M0
            cols = w[:M0 + 1].copy()
            # interval M0+1 is uniform: its weight is b_{j-1} exactly
            cols[M0] = b[j - 1]
            A21[j - 1] = cols[:M0] - cols[1:]
    for arr in (A11, A21, omega, eta):
        arr.setflags(write=False)
    return WeightTable(beta=float(beta), mesh=mesh, A11=A11, A21=A21,
                       omega=omega, eta_coeffs=eta)


def l1_matrix(mesh: TimeMesh, beta: float) -> np.ndarray:
    """Dense ``A`` built row by row from :func:`graded_weights` alone.

    No block structure is used, so this serves as a cross-check of
    :func:`assemble_weight_table`.
    """
    A = np.zeros((mesh.M, mesh.M))
    for k in range(1, mesh.M + 1):
        A[k - 1, :k] = _l1_row(graded_weights(mesh, beta, k))
    return A
