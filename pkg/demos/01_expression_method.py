"""
Reduced density matrices by the expression method
=================================================

Each diagonal entry of a marginal is a list of amplitudes, ordered by the
global index they come from. Off-diagonal entries pair those lists term by
term, so the marginal never needs the full density matrix.
"""

import numpy as np

from wmarginals import PureState, diagonal_expressions, rdm_from_density, rdm_from_pure

# (|001> + i|111>)/sqrt(2) on three qubits
s = 1 / np.sqrt(2)
psi = PureState(3, np.array([0, s, 0, 0, 0, 0, 0, 1j * s]))

# the four diagonal expressions of the marginal on qubits 1 and 2
for e in diagonal_expressions(psi, (1, 2)):
    print(f"R_{e.rdm_index}{e.rdm_index}: suffixes {e.suffixes.tolist()}, terms {np.round(e.terms, 3).tolist()}")

r = rdm_from_pure(psi, (1, 2))
print(np.round(r.entries, 3))

# the conventional partial trace of |psi><psi| agrees
conventional = rdm_from_density(psi.projector(), (1, 2))
print("max difference:", np.abs(r.entries - conventional.entries).max())
