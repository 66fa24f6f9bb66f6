"""
Iteration-count tables
======================

Runs the three methods over the (beta, r) grid used throughout the
benchmarks and prints the results table.  The largest grid size defaults
to 64; pass a larger one as the first argument (expect minutes at 256).
The same sweep can be run from the command line, e.g.::

    subdiffusion-pint --problem example1 --method p --M 128 --N 128 --out results
"""

import sys

from subdiffusion_pint import RunConfig, solve
from subdiffusion_pint.runner import format_table

n_max = int(sys.argv[1]) if len(sys.argv) > 1 else 64
grid = [(0.1, 2), (0.5, 2), (0.9, 2), (0.1, 3), (0.5, 3), (0.9, 3)]
sizes = [n for n in (32, 64, 128, 256, 512) if n <= n_max]

for problem in ("example1", "example2"):
    reports = []
    for beta, r in grid:
        for n in sizes:
            for method in ("bfsm", "i", "p"):
                # plain BiCGSTAB is slow at larger sizes; the budget marks it '--'
                cfg = RunConfig(problem=problem, beta=beta, r=r, M=n, N=n, method=method,
                                time_budget=120.0)
                reports.append(solve(cfg)[0])
    print(problem)
    print(format_table(reports))
    print()
