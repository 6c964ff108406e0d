"""
Three ways to the energy
========================

The cosine formula, the Freedman-He-Wang style subtraction and the
integral of the potential all give the same number.  The conformal-angle
kernels give other Möbius invariant energies.
"""
from mobknot import (MuKernel, energy_E_cosine, energy_E_fhw, energy_E_from_V, energy_E_mu,
                     evaluate, potential_V_cosine, potential_V_hadamard, preset)

f = evaluate(preset("torus_knot"))
print("cosine        %.12f" % energy_E_cosine(f).value)
print("subtraction   %.12f" % energy_E_fhw(f).value)
print("from V        %.12f" % energy_E_from_V(potential_V_cosine(f), f).value)
print("finite part   %.12f" % energy_E_from_V(potential_V_hadamard(f), f).value)

for tag in ("abs_sine", "acyclicity"):
    print("E_mu %-10s %.10f" % (tag, energy_E_mu(f, MuKernel(tag))))
