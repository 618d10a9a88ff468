"""
Recovering a W state from its pair marginals
============================================

All pair marginals fix a W state among every state, pure or mixed. Among
pure states the marginals sharing one party already suffice.
"""

import numpy as np

from wmarginals import MarginalSet, random_w, reconstruct_mixed, reconstruct_pure, star_pairs

rng = np.random.default_rng(7)
c = random_w(6, rng)
print("source coefficients:", np.round(c.c, 3))

report = reconstruct_mixed(MarginalSet.from_w(c))
print(report.verdict.value, "fidelity", c.fidelity(report.coefficients))
print("gauge:", report.phase_convention)

star = MarginalSet.from_w(c, star_pairs(6))
report = reconstruct_pure(star)
print(report.verdict.value, "fidelity", c.fidelity(report.coefficients))
print("phase chain:", report.diagnostics["phase_chain"])

# leave out one pair and the mixed-state route declines to answer
short = MarginalSet.from_w(c).restrict(MarginalSet.from_w(c).pair_list()[:-1])
report = reconstruct_mixed(short)
print(report.verdict.value, "-", report.message)

# a large register: marginals are built analytically
big = random_w(400, rng)
report = reconstruct_mixed(MarginalSet.from_w(big))
print("n=400:", report.verdict.value, "max residual", report.max_residual)
