"""
An EPR pair with one half sent into a CTC
==========================================

Two chronology-respecting qubits are prepared as a Bell pair, and the second
one is swapped into the CTC. The Deutsch consistency condition then
has a single solution, and the CR qubits come out maximally mixed and
uncorrelated.
"""

import numpy as np

from deutschctc import DensityMatrix, SelectionRule, solve
from deutschctc.scenarios import build_epr_interaction, ket

# The interaction: Hadamard and CNOT on the CR pair, then an exchange
# between the second CR qubit and the CTC qubit.
u = build_epr_interaction()
rho_cr = DensityMatrix.pure(ket("00"))

report = solve(u, rho_cr, SelectionRule("max_entropy"), scenario_id="epr")

# M maps every CTC input to I/2, so its spectrum is 1 followed by zeros.
print("spectrum of M:", np.round(report.spectrum.values.real, 12))

# One fixed point, and it is the maximally mixed state.
print("free directions:", report.fixed_set.subspace_dim)
print("rho_CTC =\n", np.round(report.selected_ctc.mat.real, 12))

# The Bell correlations are gone: the CR output is I/4 and a product state.
ent = report.entanglement
print("CR output is I/4:", np.allclose(report.cr_output.mat, np.eye(4) / 4))
print(f"concurrence = {ent.concurrence:.3g}, product = {ent.is_product}, "
      f"entropy = {ent.entropy_bits:.6f} bits")
