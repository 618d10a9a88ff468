import itertools

import numpy as np
import pytest
from conftest import random_pure

from wmarginals.bitindex import to_bits
from wmarginals.errors import CapExceededError
from wmarginals.ptrace import (
    diagonal_expressions,
    marginal_residual,
    partial_trace,
    rdm_from_density,
    rdm_from_pure,
)
from wmarginals.states import DensityMatrix, PureState, Rdm, WCoefficients, make_w, random_w, w_bipartite_marginal, w_density
from wmarginals.oracle import twist_coefficients

S2 = 1 / np.sqrt(2)
FIXTURE = PureState(3, np.array([0, S2, 0, 0, 0, 0, 0, 1j * S2]))


def loop_partial_trace(rho, n, parties):
    """Textbook double loop over basis pairs agreeing on the traced-out bits."""
    keep = [p - 1 for p in parties]
    rest = [q for q in range(n) if q not in keep]
    out = np.zeros((1 << len(keep),) * 2, dtype=complex)
    for a in range(1 << n):
        ba = to_bits(a, n)
        for b in range(1 << n):
            bb = to_bits(b, n)
            if all(ba[q] == bb[q] for q in rest):
                x = int("".join(str(ba[q]) for q in keep), 2)
                y = int("".join(str(bb[q]) for q in keep), 2)
                out[x, y] += rho[a, b]
    return out


def test_fixture_expressions():
    exprs = diagonal_expressions(FIXTURE, (1, 2))
    assert exprs[0].suffixes.tolist() == [0, 1]
    np.testing.assert_array_equal(exprs[0].terms, [0, S2])
    assert exprs[3].suffixes.tolist() == [6, 7]
    np.testing.assert_array_equal(exprs[3].terms, [0, 1j * S2])
    assert [e.value() for e in exprs] == pytest.approx([0.5, 0, 0, 0.5], abs=1e-15)


def test_fixture_rdm():
    r = rdm_from_pure(FIXTURE, (1, 2)).entries
    expected = np.zeros((4, 4), dtype=complex)
    expected[0, 0] = expected[3, 3] = 0.5
    expected[0, 3] = -0.5j
    expected[3, 0] = 0.5j
    assert np.abs(r - expected).max() <= 1e-15
    assert r[2, 3] == 0


def test_full_subset_is_identity_expression(rng):
    psi = random_pure(4, rng)
    exprs = diagonal_expressions(psi, (1, 2, 3, 4))
    assert all(e.terms.size == 1 and e.terms[0] == psi.amplitudes[i] for i, e in enumerate(exprs))
    np.testing.assert_allclose(rdm_from_pure(psi, (1, 2, 3, 4)).entries, psi.projector().entries, atol=1e-15)


def test_least_suffix_first(rng):
    psi = random_pure(5, rng)
    for e in diagonal_expressions(psi, (2, 4)):
        assert e.terms.size == 8
        assert e.suffixes[0] == min(e.suffixes)


def test_partial_trace_vs_loop(rng):
    for n in range(1, 5):
        a = rng.standard_normal((1 << n, 1 << n)) + 1j * rng.standard_normal((1 << n, 1 << n))
        for m in range(1, n + 1):
            for parties in itertools.combinations(range(1, n + 1), m):
                np.testing.assert_allclose(partial_trace(a, n, parties), loop_partial_trace(a, n, parties), atol=1e-12)


def test_expression_vs_conventional_exhaustive(rng):
    for n in range(1, 7):
        for _ in range(5):
            psi = random_pure(n, rng)
            rho = psi.projector()
            for m in range(1, n + 1):
                for parties in itertools.combinations(range(1, n + 1), m):
                    a = rdm_from_pure(psi, parties)
                    b = rdm_from_density(rho, parties)
                    assert marginal_residual(a, b) < 1e-12


def test_w_round_trip(rng):
    c = random_w(5, rng)
    rho = w_density(c)
    for j, k in [(1, 2), (2, 5), (3, 4)]:
        assert marginal_residual(rdm_from_density(rho, (j, k)), w_bipartite_marginal(c, j, k)) < 1e-12
        assert marginal_residual(rdm_from_pure(make_w(c), (j, k)), w_bipartite_marginal(c, j, k)) < 1e-12


def test_maximally_mixed():
    r = rdm_from_density(DensityMatrix(2, np.eye(4) / 4), (1,))
    np.testing.assert_allclose(r.entries, np.eye(2) / 2)


def test_trace_hermitian_psd(rng):
    for n in range(2, 9):
        psi = random_pure(n, rng)
        parties = tuple(sorted(rng.choice(np.arange(1, n + 1), size=rng.integers(1, n + 1), replace=False).tolist()))
        r = rdm_from_pure(psi, parties).entries
        assert abs(np.trace(r) - 1) < 1e-12
        assert np.abs(r - r.conj().T).max() < 1e-14
        assert np.linalg.eigvalsh(r).min() >= -1e-10


def test_nesting_consistency(rng):
    for _ in range(100):
        n = int(rng.integers(2, 9))
        psi = random_pure(n, rng)
        outer = sorted(rng.choice(np.arange(1, n + 1), size=rng.integers(1, n + 1), replace=False).tolist())
        inner = sorted(rng.choice(outer, size=rng.integers(1, len(outer) + 1), replace=False).tolist())
        big = rdm_from_pure(psi, outer)
        # position of each inner party inside the outer subset, relabelled 1..m
        local = [outer.index(p) + 1 for p in inner]
        via = partial_trace(big.entries, len(outer), local)
        direct = rdm_from_pure(psi, inner).entries
        assert np.abs(via - direct).max() < 1e-12


def test_density_vs_pure_random(rng):
    for n in range(1, 9):
        psi = random_pure(n, rng)
        rho = psi.projector()
        s = tuple(range(1, n + 1, 2))
        assert marginal_residual(rdm_from_density(rho, s), rdm_from_pure(psi, s)) < 1e-12


def test_invalid_subsets(rng):
    psi = random_pure(3, rng)
    for bad in [(), (2, 1), (1, 1), (0,), (4,)]:
        with pytest.raises(ValueError):
            rdm_from_pure(psi, bad)
    with pytest.raises(CapExceededError):
        partial_trace(np.zeros((1, 1)), 13, (1,))


def test_residual():
    a = Rdm((1, 2), np.eye(4) / 4, 3)
    assert marginal_residual(a, a) == 0
    e = np.eye(4) / 4
    e[0, 0] += 1e-3
    b = Rdm((1, 2), e, 3, validate=False)
    assert marginal_residual(a, b) == pytest.approx(1e-3, abs=1e-18)
    with pytest.raises(ValueError):
        marginal_residual(a, Rdm((1, 3), np.eye(4) / 4, 3))


def test_residual_phase_twist_13():
    c = WCoefficients(np.array([0.3, 0.5 + 0.2j, 0.4, 0.6 - 0.3j]) / np.linalg.norm([0.3, 0.5 + 0.2j, 0.4, 0.6 - 0.3j]))
    theta, phi = 0.4, 1.7
    # blocks: parties {3,4} get theta, parties {1,2} get phi
    twisted = make_w(twist_coefficients(c, [[3, 4], [1, 2]], [theta, phi]))
    res = marginal_residual(rdm_from_pure(twisted, (1, 3)), rdm_from_pure(make_w(c), (1, 3)))
    expected = abs(c[1] * np.conj(c[3])) * abs(np.exp(1j * (phi - theta)) - 1)
    assert res == pytest.approx(expected, abs=1e-14)
