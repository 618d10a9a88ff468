import numpy as np
import pytest

from wmarginals.bitindex import all_pairs, star_pairs
from wmarginals.ptrace import rdm_from_pure
from wmarginals.reconstruct import (
    MarginalSet,
    Verdict,
    check_w_form,
    fix_gauge,
    gram_rank1_factor,
    reconstruct_mixed,
    reconstruct_pure,
)
from wmarginals.states import Rdm, WCoefficients, ghz_state, random_w, uniform_w, w_bipartite_marginal

S2 = 1 / np.sqrt(2)


def ghz_marginals(n, a, b, pairs=None):
    psi = ghz_state(n, a, b)
    return MarginalSet.from_rdms([rdm_from_pure(psi, p) for p in (pairs or all_pairs(n))])


# -- check_w_form ----------------------------------------------------------------

def test_w_form_passes(rng):
    for _ in range(20):
        c = random_w(5, rng)
        ok, dev = check_w_form(w_bipartite_marginal(c, 2, 4))
        assert ok, dev


def test_w_form_ghz_fails():
    m = rdm_from_pure(ghz_state(3, S2, S2), (1, 2))
    np.testing.assert_allclose(m.entries, np.diag([0.5, 0, 0, 0.5]), atol=1e-15)
    ok, dev = check_w_form(m)
    assert not ok and dev["entry_33"] == pytest.approx(0.5)


def test_w_form_maximally_mixed_fails():
    ok, dev = check_w_form(Rdm((1, 2), np.eye(4) / 4, 3))
    assert not ok and dev["entry_33"] == pytest.approx(0.25)


def test_w_form_cauchy_schwarz():
    m = np.diag([0.4, 0.3, 0.3, 0]).astype(complex)
    m[1, 2] = m[2, 1] = 0.3
    assert check_w_form(Rdm((1, 2), m, 3))[0]
    m = m.copy()
    m[1, 2] = m[2, 1] = 0.1  # mixed but still W-template shaped
    ok, dev = check_w_form(Rdm((1, 2), m, 3))
    assert ok and dev["cauchy_schwarz"] == 0


def test_w_form_wrong_shape():
    with pytest.raises(ValueError):
        check_w_form(Rdm((1,), np.eye(2) / 2, 3))


# -- gram factor -------------------------------------------------------------------

def test_gram_uniform():
    fac = gram_rank1_factor(np.full((3, 3), 1 / 3, dtype=complex))
    assert fac.ok
    assert abs(abs(np.vdot(fac.vector, np.full(3, 1 / np.sqrt(3)))) - 1) < 1e-12


def test_gram_identity_rejected():
    fac = gram_rank1_factor(np.eye(2, dtype=complex))
    assert not fac.ok and "modulus" in fac.defect


def test_gram_zero_coefficient():
    a, b = 0.6, 0.8j
    c = np.array([a, b, 0])
    fac = gram_rank1_factor(np.outer(c, c.conj()))
    assert fac.ok
    assert abs(abs(np.vdot(fac.vector, c)) - 1) < 1e-12
    assert fac.vector[2] == 0


def test_gram_disconnected_pattern():
    c = np.array([0.5, 0.5, 0.5, 0.5j])
    pattern = np.zeros((4, 4), dtype=bool)
    pattern[0, 1] = pattern[2, 3] = True
    fac = gram_rank1_factor(np.outer(c, c.conj()), pattern)
    assert fac.vector is None and "indeterminate" in fac.defect
    assert [set(x) for x in fac.components] == [{1, 2}, {3, 4}]


def test_gram_cycle_inconsistency():
    c = np.array([0.6, 0.6, 0.52915026])
    g = np.outer(c, c.conj()).astype(complex)
    g[1, 2] *= np.exp(0.5j)
    g[2, 1] = np.conj(g[1, 2])
    fac = gram_rank1_factor(g)
    assert not fac.ok and "cycle" in fac.defect


def test_gram_sparse_tree(rng):
    c = random_w(7, rng).c
    pattern = np.zeros((7, 7), dtype=bool)
    for k in range(6):
        pattern[k, k + 1] = True  # path graph
    fac = gram_rank1_factor(np.outer(c, c.conj()), pattern)
    assert fac.ok and len(fac.tree) == 6
    assert abs(abs(np.vdot(fac.vector, c)) - 1) < 1e-12


# -- fix_gauge -------------------------------------------------------------------------

def test_fix_gauge_example():
    out = fix_gauge(WCoefficients([1j * S2, S2, 0]))
    np.testing.assert_allclose(out.c, [S2, -1j * S2, 0], atol=1e-15)


def test_fix_gauge_idempotent_and_invariant(rng):
    for _ in range(50):
        c = random_w(6, rng)
        g = fix_gauge(c)
        assert np.abs(fix_gauge(g).c - g.c).max() < 1e-15
        rotated = WCoefficients(c.c * np.exp(1j * rng.uniform(0, 2 * np.pi)))
        assert np.abs(fix_gauge(rotated).c - g.c).max() < 1e-14


# -- MarginalSet ---------------------------------------------------------------------------

def test_marginal_set_swapped_pair():
    c = WCoefficients(np.array([0.6, 0.8j, 0]))
    m = w_bipartite_marginal(c, 1, 2).entries
    perm = [0, 2, 1, 3]
    ms = MarginalSet(3, [(2, 1)], [m[perm][:, perm]])
    np.testing.assert_allclose(ms[(1, 2)].entries, m)


def test_marginal_set_rejects():
    with pytest.raises(ValueError):
        MarginalSet(3, [(1, 2), (2, 1)], np.stack([np.eye(4) / 4] * 2))
    with pytest.raises(ValueError):
        MarginalSet(3, [(1, 4)], [np.eye(4) / 4])


# -- reconstruct_mixed ------------------------------------------------------------------

def test_mixed_uniform_w3():
    rep = reconstruct_mixed(MarginalSet.from_w(uniform_w(3)))
    assert rep.verdict is Verdict.UNIQUE_W
    np.testing.assert_allclose(rep.coefficients.c, np.full(3, 1 / np.sqrt(3)), atol=1e-14)
    assert rep.max_residual < 1e-12


def test_mixed_ghz3():
    rep = reconstruct_mixed(ghz_marginals(3, S2, S2))
    assert rep.verdict is Verdict.INCONSISTENT and rep.step == "step1"
    assert rep.diagnostics["pair"] == (1, 2)


def test_mixed_random_n6_with_zero(rng):
    for zero in ([], [4]):
        c = random_w(6, rng, zero_parties=zero)
        rep = reconstruct_mixed(MarginalSet.from_w(c))
        assert rep.ok, rep.message
        assert c.fidelity(rep.coefficients) >= 1 - 1e-9


def test_mixed_missing_pair():
    ms = MarginalSet.from_w(uniform_w(5))
    pairs = all_pairs(5)[:-1]
    rep = reconstruct_mixed(ms.restrict(pairs))
    assert rep.verdict is Verdict.INSUFFICIENT and rep.step == "step2"
    assert rep.diagnostics["missing_pairs"] == [(4, 5)]


def test_mixed_rejects_vacuum_mixture():
    # p|W><W| + (1-p)|0><0| has W-shaped marginals but moduli summing to p
    c = uniform_w(4)
    ms = MarginalSet.from_w(c)
    mats = ms.matrices * 0.9
    mats[:, 0, 0] += 0.1
    rep = reconstruct_mixed(MarginalSet(4, ms.pairs, mats))
    assert rep.verdict is Verdict.INCONSISTENT and rep.step == "step3"


def test_mixed_rejects_incoherent_mixture():
    # mixture of two W states with different relative phases: moduli agree, Gram is not rank one
    a = WCoefficients(np.array([0.5, 0.5, 0.5, 0.5]))
    b = WCoefficients(np.array([0.5, 0.5, 0.5j, 0.5j]))
    mats = 0.5 * MarginalSet.from_w(a).matrices + 0.5 * MarginalSet.from_w(b).matrices
    rep = reconstruct_mixed(MarginalSet(4, MarginalSet.from_w(a).pairs, mats))
    assert rep.verdict is Verdict.INCONSISTENT and rep.step == "step5"


def test_mixed_invalid_input():
    ms = MarginalSet.from_w(uniform_w(3))
    mats = ms.matrices.copy()
    mats[0, 0, 1] = 0.1
    rep = reconstruct_mixed(MarginalSet(3, ms.pairs, mats))
    assert rep.verdict is Verdict.INCONSISTENT and rep.step == "input"


def test_mixed_report_fields(rng):
    rep = reconstruct_mixed(MarginalSet.from_w(random_w(4, rng)))
    assert rep.phase_convention
    assert set(rep.residuals) == set(all_pairs(4))
    assert "gram" in rep.diagnostics and rep.diagnostics["rank1_defect"] < 1e-12
    assert any("mixed" in a for a in rep.assumptions)


def test_mixed_perturbation_detected(rng):
    delta = 1e-3
    for trial in range(100):
        c = random_w(5, rng)
        ms = MarginalSet.from_w(c)
        mats = ms.matrices.copy()
        p = int(rng.integers(len(ms)))
        i, j = (int(x) for x in rng.integers(0, 4, size=2))
        if trial % 2:
            mats[p, i, j] += delta
        else:
            # Hermitian-preserving corruption
            mats[p, i, j] += delta
            if i != j:
                mats[p, j, i] += delta
        rep = reconstruct_mixed(MarginalSet(5, ms.pairs, mats))
        assert rep.verdict is Verdict.INCONSISTENT or rep.max_residual >= delta / 2


# -- reconstruct_pure -------------------------------------------------------------------

def test_pure_uniform_w4():
    rep = reconstruct_pure(MarginalSet.from_w(uniform_w(4), star_pairs(4)))
    assert rep.ok and rep.max_residual < 1e-12
    np.testing.assert_allclose(rep.coefficients.c, np.full(4, 0.5), atol=1e-14)


def test_pure_random_phase_w8(rng):
    c = WCoefficients(np.exp(1j * rng.uniform(0, 2 * np.pi, 8)) / np.sqrt(8))
    rep = reconstruct_pure(MarginalSet.from_w(c, star_pairs(8)))
    assert rep.ok and c.fidelity(rep.coefficients) >= 1 - 1e-9
    assert len(rep.diagnostics["phase_chain"]) == 7
    assert "c_1 real positive" in rep.phase_convention
    assert any("pure" in a for a in rep.assumptions)


def test_pure_from_rdm_list(rng):
    c = random_w(5, rng)
    rep = reconstruct_pure([w_bipartite_marginal(c, 1, k) for k in range(2, 6)])
    assert rep.ok and c.fidelity(rep.coefficients) >= 1 - 1e-9


def test_pure_ghz3():
    rep = reconstruct_pure(ghz_marginals(3, S2, S2, star_pairs(3)))
    assert rep.verdict is Verdict.INCONSISTENT and rep.step == "step1"


def test_pure_hub_zero():
    c = WCoefficients(np.array([0, 0.6, 0.8]))
    rep = reconstruct_pure(MarginalSet.from_w(c, star_pairs(3)))
    assert rep.verdict is Verdict.INSUFFICIENT and "hub" in rep.message


def test_pure_missing_star():
    rep = reconstruct_pure(MarginalSet.from_w(uniform_w(4), [(1, 2), (1, 3), (2, 4)]))
    assert rep.verdict is Verdict.INSUFFICIENT and rep.diagnostics["missing_pairs"] == [(1, 4)]


def test_pure_ignores_extra_pairs(rng):
    c = random_w(4, rng)
    rep = reconstruct_pure(MarginalSet.from_w(c))
    assert rep.ok and rep.diagnostics["ignored_pairs"] == 3
    assert set(rep.residuals) == set(star_pairs(4))


def test_pure_step4_catches_incoherent_hub_data():
    c = uniform_w(4)
    ms = MarginalSet.from_w(c, star_pairs(4))
    mats = ms.matrices.copy()
    mats[1, 1, 2] *= 0.5
    mats[1, 2, 1] *= 0.5
    rep = reconstruct_pure(MarginalSet(4, ms.pairs, mats))
    assert rep.verdict is Verdict.INCONSISTENT and rep.step == "step4"


def test_gauge_invariance(rng):
    c = random_w(6, rng)
    rotated = WCoefficients(c.c * np.exp(0.77j))
    for rec, pairs in ((reconstruct_mixed, None), (reconstruct_pure, star_pairs(6))):
        a = rec(MarginalSet.from_w(c, pairs)).coefficients.c
        b = rec(MarginalSet.from_w(rotated, pairs)).coefficients.c
        assert np.abs(a - b).max() < 1e-12


def test_round_trip_property(rng):
    for n in range(2, 11):
        for _ in range(10):
            zeros = [int(rng.integers(2, n + 1))] if rng.random() < 0.2 else []
            c = random_w(n, rng, zero_parties=zeros)
            rm = reconstruct_mixed(MarginalSet.from_w(c))
            rp = reconstruct_pure(MarginalSet.from_w(c, star_pairs(n)))
            assert rm.ok and c.fidelity(rm.coefficients) >= 1 - 1e-9
            assert rp.ok and c.fidelity(rp.coefficients) >= 1 - 1e-9


def test_ghz_negative_control_range(rng):
    for n in range(2, 9):
        for _ in range(5):
            b2 = rng.uniform(0.01, 1)
            a = np.sqrt(1 - b2) * np.exp(1j * rng.uniform(0, 6.3))
            b = np.sqrt(b2) * np.exp(1j * rng.uniform(0, 6.3))
            assert reconstruct_mixed(ghz_marginals(n, a, b)).step == "step1"
            assert reconstruct_pure(ghz_marginals(n, a, b, star_pairs(n))).step == "step1"
