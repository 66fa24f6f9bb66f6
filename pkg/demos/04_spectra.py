"""
Where the eigenvalues go
========================

Per Laplacian mode the four block operators reduce to small time matrices,
so their spectra are cheap to compute even at M = N = 32.  After
preconditioning the graded block has every eigenvalue at 1, and the
uniform block clusters tightly around 1.  Plots are written if matplotlib
is installed.
"""

import numpy as np

from subdiffusion_pint import make_system, problem_example1
from subdiffusion_pint.diagnostics import SPECTRUM_TAGS, spectrum

sys = make_system(problem_example1(0.9), 0.9, 32, 32, 3.0)
dumps = {tag: spectrum(sys, tag) for tag in SPECTRUM_TAGS}
for tag, d in dumps.items():
    ev = d.eigenvalues
    print(f"{tag:13s} real part in [{ev.real.min():.3g}, {ev.real.max():.3g}], "
          f"max |lambda - 1| = {np.abs(ev - 1).max():.3g}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    pass
else:
    fig, axes = plt.subplots(2, 2, figsize=(8, 8))
    for ax, (tag, d) in zip(axes.ravel(), dumps.items()):
        ax.plot(d.eigenvalues.real, d.eigenvalues.imag, ".", ms=3)
        ax.set_title(tag)
    fig.tight_layout()
    fig.savefig("spectra.png", dpi=120)
    print("wrote spectra.png")
