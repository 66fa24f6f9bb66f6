"""Five-point Dirichlet Laplacian on a rectangle and its sine-basis diagonalisation.

Fields are flat vectors of length ``(Nx-1)(Ny-1)`` with the x index running
fastest, i.e. ``v.reshape(Ny-1, Nx-1)[j, i]`` is the value at ``(x_{i+1}, y_{j+1})``.
Any leading axes are treated as a batch of fields (one per time level).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft

__all__ = ["SpatialOperator", "build_operator", "apply_B", "dst2", "laplacian_matrix"]


@dataclass(frozen=True)
class SpatialOperator:
    Nx: int
    Ny: int
    domain: tuple[float, float, float, float]
    kappa: float
    hx: float
    hy: float
    eig_x: np.ndarray
    eig_y: np.ndarray
    eig_full: np.ndarray
    workers: int | None = field(default=None, compare=False)

    @property
    def size(self) -> int:
        return (self.Nx - 1) * (self.Ny - 1)

    @property
    def shape2d(self) -> tuple[int, int]:
        return (self.Ny - 1, self.Nx - 1)

    def grid(self) -> tuple[np.ndarray, np.ndarray]:
        """Interior node coordinates as flat arrays in field ordering."""
        xL, _, yL, _ = self.domain
        x = xL + self.hx * np.arange(1, self.Nx)
        y = yL + self.hy * np.arange(1, self.Ny)
        X, Y = np.meshgrid(x, y)
        return X.ravel(), Y.ravel()


def build_operator(Nx: int, Ny: int, domain=(0.0, 1.0, 0.0, 1.0), kappa: float = 1.0,
                   workers: int | None = None) -> SpatialOperator:
    """``domain = (xL, xR, yL, yR)``; ``Nx``, ``Ny`` are the numbers of cells."""
    if Nx < 2 or Ny < 2:
        raise ValueError(f"need Nx, Ny >= 2, got {Nx}, {Ny}")
    if kappa <= 0:
        raise ValueError(f"diffusion coefficient must be positive, got {kappa}")
    xL, xR, yL, yR = map(float, domain)
    if not (xR > xL and yR > yL):
        raise ValueError(f"degenerate domain {domain}")
    hx = (xR - xL) / Nx
    hy = (yR - yL) / Ny
    i = np.arange(1, Nx)
    j = np.arange(1, Ny)
    eig_x = -4.0 * kappa / hx**2 * np.sin(i * np.pi / (2 * Nx)) ** 2
    eig_y = -4.0 * kappa / hy**2 * np.sin(j * np.pi / (2 * Ny)) ** 2
    eig_full = (eig_y[:, None] + eig_x[None, :]).ravel()
    for arr in (eig_x, eig_y, eig_full):
        arr.setflags(write=False)
    return SpatialOperator(Nx=int(Nx), Ny=int(Ny), domain=(xL, xR, yL, yR),
                           kappa=float(kappa), hx=hx, hy=hy, eig_x=eig_x,
                           eig_y=eig_y, eig_full=eig_full, workers=workers)


def _as_grid(op: SpatialOperator, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v)
    if v.shape[-1] != op.size:
        raise ValueError(f"field length {v.shape[-1]} does not match operator size {op.size}")
    return v.reshape(v.shape[:-1] + op.shape2d)


def apply_B(op: SpatialOperator, v: np.ndarray) -> np.ndarray:
    """Five-point stencil ``kappa * (d_xx + d_yy)`` with zero boundary values."""
    u = _as_grid(op, v)
    out = -2.0 * (1.0 / op.hx**2 + 1.0 / op.hy**2) * u
    out[..., :, 1:] += u[..., :, :-1] / op.hx**2
    out[..., :, :-1] += u[..., :, 1:] / op.hx**2
    out[..., 1:, :] += u[..., :-1, :] / op.hy**2
    out[..., :-1, :] += u[..., 1:, :] / op.hy**2
    out *= op.kappa
    return out.reshape(np.shape(v))


def dst2(op: SpatialOperator, v: np.ndarray, direction: str = "forward") -> np.ndarray:
    """Apply ``Q = Q_y (x) Q_x`` (orthonormal DST-I in both directions).

    ``Q`` is symmetric and orthogonal, so ``forward`` and ``inverse`` are
    the same map; the argument only documents intent at call sites.
    """
    if direction not in ("forward", "inverse"):
        raise ValueError(f"unknown direction {direction!r}")
    u = _as_grid(op, v)
    out = scipy.fft.dstn(u, type=1, axes=(-2, -1), norm="ortho", workers=op.workers)
    return out.reshape(np.shape(v))


def laplacian_matrix(op: SpatialOperator) -> np.ndarray:
    """Dense ``B = kappa (I_y (x) B_x + B_y (x) I_x)`` for small test problems."""
    nx, ny = op.Nx - 1, op.Ny - 1

    def tridiag(n, h):
        return (np.diag(-2.0 * np.ones(n)) + np.diag(np.ones(n - 1), 1)
                + np.diag(np.ones(n - 1), -1)) / h**2

    return op.kappa * (np.kron(np.eye(ny), tridiag(nx, op.hx))
                       + np.kron(tridiag(ny, op.hy), np.eye(nx)))
