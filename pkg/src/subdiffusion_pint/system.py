"""All-at-once space-time system and its 2x2 block split.

Block vectors are 2-D arrays of shape ``(n_blocks, n_space)``: row ``k`` holds
the spatial field of one time level.  The full system reads
``(A (x) I - I (x) B) u = eta + f``; splitting ``A`` at ``M0`` gives

    M11 u1 = eta1 + f1
    M22 u2 = eta2 + f2 - M21 u1
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .mesh import TimeMesh, WeightTable
from .spatial import SpatialOperator, apply_B

__all__ = [
    "AllAtOnceSystem",
    "rhs_eta",
    "assemble_forcing",
    "apply_M11",
    "apply_M21",
    "apply_M22",
    "apply_M",
    "toeplitz_lower_matvec",
    "FFT_THRESHOLD",
]

# below this many uniform levels the M22 product uses direct traversal
FFT_THRESHOLD = 16

Forcing = Callable[[np.ndarray, np.ndarray, float], np.ndarray]


@dataclass
class AllAtOnceSystem:
    """Mesh, weights, spatial operator, initial value and source term.

    ``forcing`` is a callable ``f(x, y, t)`` evaluated on interior nodes;
    ``None`` means a zero source.  With ``store_forcing`` the evaluated
    blocks are cached for repeat solves.
    """

    mesh: TimeMesh
    weights: WeightTable
    op: SpatialOperator
    u0: np.ndarray
    forcing: Optional[Forcing] = None
    store_forcing: bool = False
    _forcing_cache: Optional[tuple] = field(default=None, repr=False)

    def __post_init__(self):
        self.u0 = np.asarray(self.u0, dtype=float).ravel()
        if self.u0.size != self.op.size:
            raise ValueError(f"initial value has {self.u0.size} entries, expected {self.op.size}")
        if self.weights.mesh is not self.mesh and self.weights.M != self.mesh.M:
            raise ValueError("weights and mesh disagree on M")

    @property
    def M(self) -> int:
        return self.mesh.M

    @property
    def M0(self) -> int:
        return self.mesh.M0

    @property
    def n_space(self) -> int:
        return self.op.size


def _check(v: np.ndarray, nblocks: int, ns: int) -> np.ndarray:
    v = np.asarray(v)
    if v.shape != (nblocks, ns):
        raise ValueError(f"block vector of shape {v.shape}, expected {(nblocks, ns)}")
    return v


def rhs_eta(sys: AllAtOnceSystem) -> tuple[np.ndarray, np.ndarray]:
    eta = sys.weights.eta_coeffs[:, None] * sys.u0[None, :]
    return eta[:sys.M0], eta[sys.M0:]


def assemble_forcing(sys: AllAtOnceSystem) -> tuple[np.ndarray, np.ndarray]:
    if sys._forcing_cache is not None:
        return sys._forcing_cache
    M, ns = sys.M, sys.n_space
    f = np.zeros((M, ns))
    if sys.forcing is not None:
        x, y = sys.op.grid()
        for k in range(1, M + 1):
            f[k - 1] = np.broadcast_to(sys.forcing(x, y, sys.mesh.points[k]), (ns,))
    out = (f[:sys.M0], f[sys.M0:])
    if sys.store_forcing:
        sys._forcing_cache = out
    return out


def apply_M11(sys: AllAtOnceSystem, v: np.ndarray) -> np.ndarray:
    v = _check(v, sys.M0, sys.n_space)
    return sys.weights.A11 @ v - apply_B(sys.op, v)


def apply_M21(sys: AllAtOnceSystem, v: np.ndarray) -> np.ndarray:
    v = _check(v, sys.M0, sys.n_space)
    return sys.weights.A21 @ v


def toeplitz_lower_matvec(col: np.ndarray, v: np.ndarray, method: str = "auto") -> np.ndarray:
    """Product of the lower-triangular Toeplitz matrix with first column ``col``
    and each column of ``v`` (shape ``(n, ...)``).

    ``method="fft"`` embeds the Toeplitz matrix in a circulant of size ``2n``;
    ``"direct"`` forms the dense triangle.
    """
    n = col.size
    if method == "auto":
        method = "direct" if n < FFT_THRESHOLD else "fft"
    if method == "direct":
        from scipy.linalg import toeplitz

        return toeplitz(col, np.zeros(n)) @ v.reshape(n, -1)
    if method != "fft":
        raise ValueError(f"unknown method {method!r}")
    L = 2 * n
    fc = np.fft.rfft(col, n=L)
    fv = np.fft.rfft(v.reshape(n, -1), n=L, axis=0)
    return np.fft.irfft(fc[:, None] * fv, n=L, axis=0)[:n]


def apply_M22(sys: AllAtOnceSystem, v: np.ndarray, method: str = "auto") -> np.ndarray:
    n2 = sys.M - sys.M0
    v = _check(v, n2, sys.n_space)
    return toeplitz_lower_matvec(sys.weights.omega, v, method) - apply_B(sys.op, v)


def apply_M(sys: AllAtOnceSystem, v: np.ndarray) -> np.ndarray:
    """Unsplit product ``M v`` assembled from the three block products."""
    v = _check(v, sys.M, sys.n_space)
    v1, v2 = v[:sys.M0], v[sys.M0:]
    return np.vstack([apply_M11(sys, v1), apply_M21(sys, v1) + apply_M22(sys, v2)])
