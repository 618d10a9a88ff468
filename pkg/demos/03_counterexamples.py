"""
Marginals that do not pin the state down
========================================

Multiplying whole blocks of W coefficients by separate phases leaves every
marginal inside a block untouched. When no supplied pair crosses the
blocks, two different states share the data.
"""

import numpy as np

from wmarginals import (
    MarginalSet,
    ghz_state,
    make_w,
    marginal_residual,
    phase_twist,
    rdm_from_pure,
    reconstruct_mixed,
    uniform_w,
)

w4 = uniform_w(4)
twisted = phase_twist(w4, [[3, 4], [1, 2]], [0.7, 1.7])
base = make_w(w4)
for pair in [(1, 2), (3, 4), (1, 3)]:
    res = marginal_residual(rdm_from_pure(twisted, pair), rdm_from_pure(base, pair))
    print(f"pair {pair}: residual {res:.2e}")
print("overlap with W4:", base.fidelity(twisted))

# five qubits with four marginals: the last qubit is never touched
w5 = uniform_w(5)
pairs = [(1, 2), (1, 3), (2, 3), (3, 4)]
twisted = phase_twist(w5, [[1, 2, 3, 4], [5]], [0.0, 1.0])
print("max residual on the four pairs:",
      max(marginal_residual(rdm_from_pure(twisted, p), rdm_from_pure(make_w(w5), p)) for p in pairs))
print("verdict:", reconstruct_mixed(MarginalSet.from_w(w5, pairs)).verdict.value)

# GHZ marginals carry two-excitation weight, so they are rejected at once
ghz = ghz_state(4, 1 / np.sqrt(2), 1 / np.sqrt(2))
ms = MarginalSet.from_rdms([rdm_from_pure(ghz, p) for p in MarginalSet.from_w(uniform_w(4)).pair_list()])
print("GHZ:", reconstruct_mixed(ms).message)
