"""
Probing uniqueness numerically
==============================

The kernel of the marginal map holds every direction that leaves the chosen
marginals fixed. A competing state must also stay positive, which confines
it to a small support subspace. The oracle samples that restricted kernel
and checks positivity exactly; a multi-start fit looks for other pure
states directly.
"""

from wmarginals import MarginalSet, multistart_pure_fit, star_pairs, uniform_w, uniqueness_evidence

for n, pairs, label in [
    (3, None, "W3, all pairs"),
    (4, None, "W4, all pairs"),
    (4, [(1, 2), (3, 4)], "W4, pairs 12 and 34"),
    (4, star_pairs(4), "W4, star pairs"),
]:
    ev = uniqueness_evidence(uniform_w(n), pairs, samples=10_000, seed=0)
    print(f"{label}: kernel dim {ev.null_space_dim}, restricted {ev.support_kernel_dim}, "
          f"feasible {ev.feasible_directions}")

for label, ms in [
    ("W5 all pairs", MarginalSet.from_w(uniform_w(5))),
    ("W4 pairs 12, 34", MarginalSet.from_w(uniform_w(4), [(1, 2), (3, 4)])),
]:
    rep = multistart_pure_fit(ms, starts=10, seed=1)
    exact = [m for m in rep.minimizers if m.residual < 1e-8]
    print(f"{label}: {len(exact)} distinct exact fits from {rep.starts} starts")
