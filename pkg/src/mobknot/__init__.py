"""Möbius invariant knot energies on spectral Fourier knots.

Curves, Möbius transformations, the conformal angle and regularized
potential V, energies, weighted metrics, the energy gradient and its
invariant descent flow.
"""
from .curve import (KnotCurve, arc_distance, KnotError, ReparamMap, SampledKnot, circle, ellipse, evaluate,
                    from_samples, perturbed_circle, preset, reparametrize, resample_by_arclength,
                    roundness, torus_knot)
from .moebius import (Homothety, MoebiusTransform, PoleError, Rotation, SphereInversion,
                      Translation, pushforward, random_compact_preserving, transform_curve)
from .conformal import (angle_field, conformal_angle, kernel_potential, kernel_potential_at,
                        potential_V_cosine, potential_V_hadamard)
from .energy import (MuKernel, energy_E_cosine, energy_E_fhw, energy_E_from_V, energy_E_mu,
                     energy_from_weight)
from .metric import (TangentField, WeightFunction, frenet, l2_inner, project_normal, weight,
                     weight_V3, weighted_inner)
from .gradient import (J_operator, directional_derivative, grad_E_hadamard, grad_E_pv,
                       random_normal_field, u_components, weighted_gradient)
from .flow import FlowConfig, invariance_probe, run_flow

__version__ = "0.1.0"
