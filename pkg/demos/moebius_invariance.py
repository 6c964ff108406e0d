"""
Möbius words
============

Random compact-preserving Möbius maps leave the energy alone, rescale the
potential V by |T'|^-2 and keep circles round.
"""
import numpy as np

from mobknot import (energy_E_cosine, evaluate, potential_V_cosine, preset,
                     random_compact_preserving, roundness, transform_curve)

f = evaluate(preset("ellipse"))
v = potential_V_cosine(f).v
e = energy_E_cosine(f).value

for seed in range(5):
    T = random_compact_preserving(seed, f)
    img = evaluate(transform_curve(T, f.curve))
    fac = T.conformal_factor(f.points)
    dv = np.max(np.abs(potential_V_cosine(img).v - v / fac ** 2))
    de = abs(energy_E_cosine(img).value - e) / e
    print("word %d (%d maps): V residual %.1e, relative E change %.1e"
          % (seed, len(T.word), dv, de))

c = preset("circle", center=(0.3, 0.0, 0.1), normal=(1, 1, 2))
T = random_compact_preserving(7, evaluate(c))
print("image of a circle, roundness %.1e" % roundness(evaluate(transform_curve(T, c))))
