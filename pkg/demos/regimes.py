"""Space-time portraits of the three regimes.

Below threshold the signal is microscopic noise. In the convective regime
(1 < f < F_c) walk-off advects growing perturbations out of the pumped
stripe, so the pattern exists only because noise keeps re-seeding it.
Above F_c growth outruns advection and the pattern persists on its own.

Run from the repository root:  python3 demos/regimes.py
Figures land in demos/out/.
"""
import pathlib

import dopo
from dopo import plots

OUT = pathlib.Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

fc = dopo.absolute_threshold(0.42, -0.25)
print(f"absolute threshold F_c = {fc:.4f}")

for label, f in (("below", 0.995), ("convective", 1.02), ("absolute", 1.08)):
    params = dopo.SimParams(f=f, seed=7).with_supergaussian()
    rec = dopo.TrajectoryRecorder(store_field=True, space_stride=2,
                                  accumulate_far_field=True)
    res = dopo.Simulation(params).run(1500.0, rec)
    grid = res.grid
    x = grid.x[::2]
    plots.spacetime_plot(OUT / f"near_{label}.svg", res.times, x,
                         res.field_frames,
                         title=f"Re(signal), f={f} ({label})")
    print(f"f={f:5.3f} ({label:10s}): max|signal| = "
          f"{abs(res.field_frames[-1]).max():.3e}, "
          f"dominant k = {grid.k[res.dominant_mode(k_min=0.05)]:+.3f}")

print(f"figures written to {OUT}")
