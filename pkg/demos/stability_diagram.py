"""Absolute-instability threshold F_c(v, delta1) from the pinch-point analysis.

Between f = 1 and f = F_c the homogeneous solution is convectively
unstable: perturbations grow but walk off, and only noise sustains a
pattern. F_c grows with the walk-off rate v and with |delta1| shrinking.

Run from the repository root:  python3 demos/stability_diagram.py
"""
import pathlib

import numpy as np

import dopo
from dopo import plots

OUT = pathlib.Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

delta1 = np.linspace(-1.0, -0.05, 30)
rows = dopo.stability_diagram(delta1, [0.2, 0.42, 0.6])
plots.stability_plot(OUT / "stability_diagram.svg",
                     [r for r in rows if r["converged"]])

for v in (0.2, 0.42, 0.6):
    fc = dopo.absolute_threshold(v, -0.25)
    print(f"v={v:4.2f}, delta1=-0.25: F_c = {fc:.5f}")

mark = dopo.classify(1.025, 0.42, -0.25)
print(f"f=1.025 at (v, delta1)=(0.42, -0.25): {mark.regime} "
      f"(F_c = {mark.f_abs:.4f})")
print(f"figure written to {OUT}")
