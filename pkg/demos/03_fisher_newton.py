"""
A semilinear problem: time-fractional Fisher equation
=====================================================

With g(u) = u (1 - u) each subproblem is nonlinear.  A modified Newton
iteration keeps the Jacobian frozen at the linear operator, so the same
preconditioners apply at every outer step.  A cheap starting guess comes
from a linearised march on a coarser time mesh.
"""

import numpy as np

from subdiffusion_pint import (
    NewtonConfig,
    bfsm_semilinear,
    coarse_initial_guess,
    make_system,
    problem_example2,
    solve_semilinear,
)
from subdiffusion_pint.problems import fisher

beta, r, n = 0.5, 2.0, 32
sys = make_system(problem_example2(), beta, M=n, N=n, r=r)

g1, g2 = coarse_initial_guess(sys, fisher)
ref = bfsm_semilinear(sys, fisher)
guess = np.vstack([g1, g2])
print(f"coarse guess relative error: {np.abs(guess - ref.solution).max() / np.abs(ref.solution).max():.2e}")
print(f"sequential Newton steps per level: {ref.iter1:.2f}")

u, report = solve_semilinear(sys, fisher, NewtonConfig())
print("outer iterations:", report.iter_outer)
print("average inner iterations:", tuple(round(v, 1) for v in report.iter_inner_avg))
print(f"difference to sequential solve: {np.abs(u - ref.solution).max() / np.abs(ref.solution).max():.1e}")
