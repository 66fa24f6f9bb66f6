"""Inverse-apply operators for the two subproblems.

``P1`` keeps the main and two sub-diagonals of ``A11``; in the sine basis it
is block lower-tridiagonal with diagonal blocks, so ``P1^{-1} v`` is a
forward substitution over time.  ``P_alpha`` replaces the Toeplitz block
``A22`` by its alpha-circulant completion, which is diagonalised by a scaled
FFT in time; every frequency then needs one shifted Laplacian solve, done by
division in the sine basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft

from .mesh import WeightTable
from .spatial import SpatialOperator, apply_B, dst2
from .system import toeplitz_lower_matvec

__all__ = [
    "NumericalBreakdown",
    "P1Preconditioner",
    "PAlphaPreconditioner",
    "build_p1",
    "apply_p1",
    "apply_p1_inverse",
    "build_p_alpha",
    "apply_p_alpha",
    "apply_p_alpha_inverse",
    "half_spectrum_solve",
    "full_spectrum_solve",
    "default_alpha",
]

IMAG_TOL = 1e-9


class NumericalBreakdown(ArithmeticError):
    pass


@dataclass(frozen=True)
class P1Preconditioner:
    main: np.ndarray
    sub1: np.ndarray
    sub2: np.ndarray
    op: SpatialOperator

    @property
    def M0(self) -> int:
        return self.main.size

    def tri(self) -> np.ndarray:
        """Dense ``tri(A11)``."""
        n = self.M0
        T = np.diag(self.main)
        k = np.arange(n)
        T[k[1:], k[1:] - 1] = self.sub1[1:]
        T[k[2:], k[2:] - 2] = self.sub2[2:]
        return T


def build_p1(weights: WeightTable, op: SpatialOperator) -> P1Preconditioner:
    A11 = weights.A11
    M0 = A11.shape[0]
    if M0 < 1:
        raise ValueError("P1 needs at least one graded level")
    main = np.diag(A11).copy()
    # sub1[k] is the entry (k, k-1); the leading slots are unused padding
    sub1 = np.zeros(M0)
    sub2 = np.zeros(M0)
    sub1[1:] = np.diag(A11, -1)
    sub2[2:] = np.diag(A11, -2)
    if np.any(main <= 0):
        raise ValueError("A11 has a non-positive diagonal entry")
    return P1Preconditioner(main=main, sub1=sub1, sub2=sub2, op=op)


def apply_p1(p1: P1Preconditioner, v: np.ndarray) -> np.ndarray:
    """Forward product ``P1 v``."""
    out = p1.main[:, None] * v - apply_B(p1.op, v)
    out[1:] += p1.sub1[1:, None] * v[:-1]
    out[2:] += p1.sub2[2:, None] * v[:-2]
    return out


def apply_p1_inverse(p1: P1Preconditioner, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v)
    if v.shape != (p1.M0, p1.op.size):
        raise ValueError(f"block vector of shape {v.shape}, expected {(p1.M0, p1.op.size)}")
    lam = p1.op.eig_full
    z = dst2(p1.op, v)
    for k in range(p1.M0):
        if k >= 1:
            z[k] -= p1.sub1[k] * z[k - 1]
        if k >= 2:
            z[k] -= p1.sub2[k] * z[k - 2]
        z[k] /= p1.main[k] - lam
    return dst2(p1.op, z, "inverse")


def default_alpha(tau_tilde: float) -> float:
    return min(1e-4, 0.5 * tau_tilde)


@dataclass(frozen=True)
class PAlphaPreconditioner:
    alpha: float
    omega: np.ndarray
    lambda_alpha: np.ndarray
    theta_scaling: np.ndarray
    op: SpatialOperator

    @property
    def n(self) -> int:
        return self.omega.size

    def circulant_matrix(self) -> np.ndarray:
        """Dense ``A22^alpha = A22 + alpha * Atilde``."""
        n = self.n
        C = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                C[i, j] = self.omega[i - j] if i >= j else self.alpha * self.omega[n + i - j]
        return C


def build_p_alpha(weights: WeightTable, op: SpatialOperator, alpha: float) -> PAlphaPreconditioner:
    omega = np.asarray(weights.omega if isinstance(weights, WeightTable) else weights, dtype=float)
    n = omega.size
    if n < 1:
        raise ValueError("P_alpha needs at least one uniform level")
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    # Theta_alpha = diag(alpha^{-(k-1)/n}), k = 1..n
    theta = alpha ** (-np.arange(n) / n)
    lam = np.fft.fft(omega / theta)
    if np.any(lam.real <= 0):
        raise AssertionError(
            f"alpha-circulant eigenvalue with non-positive real part: min {lam.real.min():.3e}")
    for arr in (theta, lam, omega):
        arr.setflags(write=False)
    return PAlphaPreconditioner(alpha=float(alpha), omega=omega, lambda_alpha=lam,
                                theta_scaling=theta, op=op)


def apply_p_alpha(pa: PAlphaPreconditioner, v: np.ndarray) -> np.ndarray:
    """Forward product ``P_alpha v`` via the alpha-circulant matvec."""
    n = pa.n
    a = pa.alpha
    # A22^alpha v = A22 v + alpha * Atilde v, Atilde strictly upper with the wrapped omegas
    out = toeplitz_lower_matvec(pa.omega, v)
    if n > 1:
        # (Atilde v)_i = sum_{j>i} omega_{n+i-j} v_j
        wrapped = np.zeros(n)
        wrapped[1:] = pa.omega[:0:-1]  # wrapped[d] = omega_{n-d}
        upper = toeplitz_lower_matvec(wrapped, v[::-1].reshape(n, -1))[::-1]
        out = out + a * upper
    return out.reshape(v.shape) - apply_B(pa.op, v)


def _scale_and_transform(pa: PAlphaPreconditioner, v: np.ndarray) -> np.ndarray:
    # Step (a) plus the sine transform that diagonalises B
    v = np.asarray(v, dtype=float)
    if v.shape != (pa.n, pa.op.size):
        raise ValueError(f"block vector of shape {v.shape}, expected {(pa.n, pa.op.size)}")
    return dst2(pa.op, v / pa.theta_scaling[:, None])


def full_spectrum_solve(pa: PAlphaPreconditioner, rhs_blocks: np.ndarray) -> np.ndarray:
    """Step (b) on all ``n`` frequencies; input/output in the sine basis, time domain."""
    z1 = scipy.fft.fft(rhs_blocks, axis=0, workers=pa.op.workers)
    z1 /= pa.lambda_alpha[:, None] - pa.op.eig_full[None, :]
    z2 = scipy.fft.ifft(z1, axis=0, workers=pa.op.workers)
    norm = np.linalg.norm(z2)
    if np.linalg.norm(z2.imag) > IMAG_TOL * max(norm, np.finfo(float).tiny):
        raise NumericalBreakdown(
            f"imaginary residue {np.linalg.norm(z2.imag):.3e} exceeds {IMAG_TOL:g} * {norm:.3e}")
    return z2.real


def half_spectrum_solve(pa: PAlphaPreconditioner, rhs_blocks: np.ndarray) -> np.ndarray:
    """Step (b) on the first ``ceil((n+1)/2)`` frequencies only.

    The right-hand side is real, so the remaining frequencies are complex
    conjugates and are never formed.
    """
    n = pa.n
    n_half = math.ceil((n + 1) / 2)
    z1 = scipy.fft.rfft(rhs_blocks, axis=0, workers=pa.op.workers)
    assert z1.shape[0] == n_half
    z1 /= pa.lambda_alpha[:n_half, None] - pa.op.eig_full[None, :]
    return scipy.fft.irfft(z1, n=n, axis=0, workers=pa.op.workers)


def apply_p_alpha_inverse(pa: PAlphaPreconditioner, v: np.ndarray, half_spectrum: bool = True) -> np.ndarray:
    z = _scale_and_transform(pa, v)
    z = half_spectrum_solve(pa, z) if half_spectrum else full_spectrum_solve(pa, z)
    z = dst2(pa.op, z, "inverse")
    return z * pa.theta_scaling[:, None]
