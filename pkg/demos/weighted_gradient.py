"""
Gradients and weights
=====================

The L2 gradient of the energy is checked against a finite difference and
against the finite-part route; dividing by V^3 makes it commute with
Möbius maps.
"""
import numpy as np

from mobknot import (directional_derivative, evaluate, grad_E_hadamard, grad_E_pv, l2_inner,
                     potential_V_cosine, preset, pushforward, random_compact_preserving,
                     random_normal_field, transform_curve, weight_V3, weighted_gradient)

f = evaluate(preset("perturbed_circle", amplitude=0.2, mode=3, kind="normal"))
G = grad_E_pv(f)
u = random_normal_field(f, seed=1)
print("dE[u] by finite difference %.8f, (u, G) %.8f"
      % (directional_derivative(f.curve, u), l2_inner(u, G.g)))

had = grad_E_hadamard(f)
print("route gap %.1e" % np.max(had.residual))

gw = weighted_gradient(G, weight_V3(potential_V_cosine(f)), f)
T = random_compact_preserving(3, f)
img = evaluate(transform_curve(T, f.curve))
gi = weighted_gradient(grad_E_pv(img), weight_V3(potential_V_cosine(img)), img)
gap = np.max(np.abs(gi.vectors - pushforward(T, f, gw).vectors)) / np.max(np.abs(gi.vectors))
print("equivariance gap of the V^3-weighted gradient %.1e" % gap)
