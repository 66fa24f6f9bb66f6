"""Problem registry: the two benchmark problems plus user-registered ones.

A :class:`Problem` bundles the domain, final time, diffusion coefficient,
initial value, source term, optional nonlinearity and optional exact
solution.  :func:`make_system` turns a problem and discretisation
parameters into an :class:`~subdiffusion_pint.system.AllAtOnceSystem`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import gamma

from .mesh import assemble_weight_table, build_mesh, default_split
from .spatial import build_operator
from .system import AllAtOnceSystem

__all__ = [
    "Problem",
    "problem_example1",
    "problem_example2",
    "register_problem",
    "get_problem",
    "make_system",
    "fisher",
]


@dataclass(frozen=True)
class Problem:
    name: str
    domain: tuple[float, float, float, float]
    T: float
    kappa: float
    initial: Callable[[np.ndarray, np.ndarray], np.ndarray]
    forcing: Optional[Callable[[np.ndarray, np.ndarray, float], np.ndarray]] = None
    nonlinearity: Optional[Callable[[np.ndarray], np.ndarray]] = None
    exact: Optional[Callable[[np.ndarray, np.ndarray, float], np.ndarray]] = None

    @property
    def is_linear(self) -> bool:
        return self.nonlinearity is None


def _xi(order: float, t: float) -> float:
    # kernel extended by its limit 0 at t = 0 (valid for order > 1)
    return 0.0 if t == 0.0 else t ** (order - 1.0) / gamma(order)


def problem_example1(beta: float) -> Problem:
    """Two Gaussian bumps on ``[-4, 10]^2`` with a manufactured exact solution."""
    if not 0.0 < beta < 1.0:
        raise ValueError(f"fractional order must lie in (0, 1), got {beta}")
    sigma = 2.2 - beta
    kappa = 1.0
    c = 1.0 / math.sqrt(2.0 * math.pi)

    def bumps(x, y):
        r1 = x**2 + y**2
        r2 = (x - 3.0) ** 2 + (y - 3.0) ** 2
        return np.exp(-r1 / 2.0) + np.exp(-r2 / 2.0)

    def laplacian_bumps(x, y):
        r1 = x**2 + y**2
        r2 = (x - 3.0) ** 2 + (y - 3.0) ** 2
        return (r1 - 2.0) * np.exp(-r1 / 2.0) + (r2 - 2.0) * np.exp(-r2 / 2.0)

    def exact(x, y, t):
        return c * (1.0 + _xi(1.0 + sigma, t)) * bumps(x, y)

    def forcing(x, y, t):
        return (c * _xi(1.0 + sigma - beta, t) * bumps(x, y)
                - kappa * c * (1.0 + _xi(1.0 + sigma, t)) * laplacian_bumps(x, y))

    return Problem(name="example1", domain=(-4.0, 10.0, -4.0, 10.0), T=1.0, kappa=kappa,
                   initial=lambda x, y: exact(x, y, 0.0), forcing=forcing, exact=exact)


def fisher(u: np.ndarray) -> np.ndarray:
    return u * (1.0 - u)


def problem_example2() -> Problem:
    """Time-fractional Fisher equation on ``[0, pi]^2``."""
    return Problem(name="example2", domain=(0.0, math.pi, 0.0, math.pi), T=1.0, kappa=1.0,
                   initial=lambda x, y: np.sin(x) * np.sin(y), nonlinearity=fisher)


_REGISTRY: dict[str, Callable[..., Problem]] = {
    "example1": problem_example1,
    "example2": lambda beta=None: problem_example2(),
}


def register_problem(name: str, factory: Callable[..., Problem]) -> None:
    """Make ``factory(beta)`` available under ``name`` (used by ``--problem``)."""
    _REGISTRY[name] = factory


def get_problem(name: str, beta: float) -> Problem:
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown problem {name!r}; known: {sorted(_REGISTRY)}") from None
    return factory(beta)


def make_system(problem: Problem, beta: float, M: int, N: int, r: float,
                T0: Optional[float] = None, M0: Optional[int] = None,
                workers: Optional[int] = None, store_forcing: bool = True) -> AllAtOnceSystem:
    """Discretise ``problem`` with ``N x N`` cells and ``M`` time steps.

    ``T0`` and ``M0`` default to the split recipe of :func:`default_split`
    (scaled to the problem's final time).
    """
    dT0, dM0 = default_split(M, r)
    T0 = dT0 * problem.T if T0 is None else T0
    M0 = dM0 if M0 is None else M0
    mesh = build_mesh(problem.T, T0, M, M0, r)
    weights = assemble_weight_table(mesh, beta)
    op = build_operator(N, N, problem.domain, problem.kappa, workers=workers)
    x, y = op.grid()
    u0 = problem.initial(x, y)
    return AllAtOnceSystem(mesh=mesh, weights=weights, op=op, u0=u0,
                           forcing=problem.forcing, store_forcing=store_forcing)
