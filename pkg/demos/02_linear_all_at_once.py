"""
Solving all time levels at once
===============================

Example 1 has a manufactured exact solution, two Gaussian bumps growing in
time.  We solve it three ways: sequential block forward substitution,
BiCGSTAB on the all-at-once system, and BiCGSTAB with the two
preconditioners (block tridiagonal for the graded part, alpha-circulant
for the uniform part).
"""

import time

import numpy as np

from subdiffusion_pint import bfsm_linear, make_system, problem_example1, solve_linear

beta, r, n = 0.5, 2.0, 32
problem = problem_example1(beta)
sys = make_system(problem, beta, M=n, N=n, r=r)
x, y = sys.op.grid()
exact = problem.exact(x, y, problem.T)

t0 = time.perf_counter()
u_seq = bfsm_linear(sys)
print(f"sequential:        {time.perf_counter() - t0:.3f} s")

for precondition in (False, True):
    t0 = time.perf_counter()
    res = solve_linear(sys, precondition=precondition)
    label = "preconditioned" if precondition else "plain BiCGSTAB"
    print(f"{label:18s} {time.perf_counter() - t0:.3f} s, iterations {res.iterations}")

diff = np.abs(res.solution - u_seq).max() / np.abs(u_seq).max()
print(f"all-at-once vs sequential: {diff:.1e}")
print(f"error at final time: {np.abs(res.solution[-1] - exact).max():.3e}")

# Doubling both M and N should cut the error by about four (second order
# in space, and the grading keeps the time error in step).
for m in (16, 32, 64):
    s = make_system(problem, beta, m, m, r)
    u = solve_linear(s).solution[-1]
    xx, yy = s.op.grid()
    print(f"M = N = {m:3d}: max error {np.abs(u - problem.exact(xx, yy, 1.0)).max():.3e}")
