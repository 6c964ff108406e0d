"""
Flowing to a round circle
=========================

A wobbly circle relaxes under the V^3-weighted flow; the energy falls
monotonically to zero and the flow commutes with a Möbius map.
"""
import numpy as np

from mobknot import (FlowConfig, evaluate, invariance_probe, preset, random_compact_preserving,
                     run_flow)

start = preset("perturbed_circle", amplitude=0.2, mode=3, kind="normal")
trace = run_flow(start, FlowConfig())
e = trace.column("E")
print("%d steps, stopped on %s" % (len(e), trace.reason))
for k in range(0, len(e), 15):
    print("step %3d  E %.6e  roundness %.2e" % (k, e[k], trace.column("roundness")[k]))

T = random_compact_preserving(0, evaluate(start))
probe = invariance_probe(start, T, FlowConfig(max_move=0.02), steps=30)
print("worst T(flow f) vs flow(T f) distance over 30 steps: %.1e" % np.max(probe["hausdorff"]))
