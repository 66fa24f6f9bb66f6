"""Parallel-in-time preconditioned solvers for 2D subdiffusion equations.

The time derivative is a Caputo-type memory term discretised by the L1
scheme on a mesh that is graded on ``[0, T0]`` and uniform on ``[T0, T]``.
All time levels are solved at once: the graded block with a block
lower-tridiagonal preconditioner, the uniform (Toeplitz) block with an
alpha-circulant preconditioner applied by FFT in time.
"""

from .bfsm import bfsm_linear, bfsm_semilinear
from .krylov import KrylovConfig, KrylovResult, bicgstab
from .mesh import (
    TimeMesh,
    WeightTable,
    assemble_weight_table,
    build_mesh,
    default_split,
    graded_weights,
    kernel_xi,
    uniform_weights,
)
from .newton import NewtonConfig, coarse_initial_guess, solve_semilinear
from .preconditioners import (
    apply_p1_inverse,
    apply_p_alpha_inverse,
    build_p1,
    build_p_alpha,
    default_alpha,
)
from .problems import Problem, get_problem, make_system, problem_example1, problem_example2, register_problem
from .runner import RunConfig, SolveReport, run, solve
from .solvers import solve_linear
from .spatial import SpatialOperator, apply_B, build_operator, dst2
from .system import AllAtOnceSystem, apply_M, apply_M11, apply_M21, apply_M22

__all__ = [
    "bfsm_linear",
    "bfsm_semilinear",
    "KrylovConfig",
    "KrylovResult",
    "bicgstab",
    "TimeMesh",
    "WeightTable",
    "assemble_weight_table",
    "build_mesh",
    "default_split",
    "graded_weights",
    "kernel_xi",
    "uniform_weights",
    "NewtonConfig",
    "coarse_initial_guess",
    "solve_semilinear",
    "apply_p1_inverse",
    "apply_p_alpha_inverse",
    "build_p1",
    "build_p_alpha",
    "default_alpha",
    "Problem",
    "get_problem",
    "make_system",
    "problem_example1",
    "problem_example2",
    "register_problem",
    "RunConfig",
    "SolveReport",
    "run",
    "solve",
    "solve_linear",
    "SpatialOperator",
    "apply_B",
    "build_operator",
    "dst2",
    "AllAtOnceSystem",
    "apply_M",
    "apply_M11",
    "apply_M21",
    "apply_M22",
]

__version__ = "0.1.0"
