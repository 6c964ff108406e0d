"""
Fourier knots
=============

Build a few preset knots, look at their spectra, and measure arc length.
"""
import numpy as np

from mobknot import arc_distance, evaluate, preset, roundness

# a (2,3) torus knot lives in modes 1, 2, 3 and 5
trefoil = preset("torus_knot", p=2, q=3)
amp = np.abs(trefoil.coeffs).max(axis=(0, 2))
print("nonzero modes:", np.flatnonzero(amp > 1e-12))

f = evaluate(trefoil)
print("length %.10f, diameter %.4f" % (f.total_len, f.diameter))
print("arc distance from t=0 to t=1/4: %.10f" % arc_distance(f, 0, f.n // 4))

# roundness is zero only on circles
for name, params in [("circle", {}), ("ellipse", {}), ("perturbed_circle", {"amplitude": 0.05})]:
    print("%-17s roundness %.2e" % (name, roundness(evaluate(preset(name, **params)))))
