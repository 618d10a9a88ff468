"""Partial traces.

The main path (:func:`rdm_from_pure`) follows the diagonal-expression
construction: for each diagonal entry of the reduced matrix, list the
contributing amplitudes in ascending order of their global index; an
off-diagonal entry ``(i, j)`` is then the termwise pairing
``sum_k p_k * conj(q_k)`` of expressions ``i`` and ``j``.

:func:`partial_trace` is the conventional tensor-reshape partial trace. It
shares no code with the expression path and serves as its oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bitindex import check_party, enumerate_suffixes, to_bits
from .errors import CapExceededError
from .states import DENSE_MATRIX_CAP, DensityMatrix, PureState, Rdm


@dataclass(frozen=True, eq=False)
class DiagonalExpression:
    """Ordered amplitudes ``p_k`` whose squared moduli sum to one RDM diagonal."""

    rdm_index: int
    suffixes: np.ndarray
    terms: np.ndarray

    def value(self) -> float:
        return float(np.sum(np.abs(self.terms) ** 2))


def _check_subset(parties: Sequence[int], n: int) -> tuple[int, ...]:
    parties = tuple(check_party(p, n) for p in parties)
    if not parties:
        raise ValueError("party subset must be non-empty")
    if any(a >= b for a, b in zip(parties, parties[1:])):
        raise ValueError(f"party subset must be sorted without repeats, got {parties}")
    return parties


def diagonal_expressions(psi: PureState, parties: Sequence[int]) -> list[DiagonalExpression]:
    parties = _check_subset(parties, psi.n)
    m = len(parties)
    out = []
    for i in range(1 << m):
        suffixes = enumerate_suffixes(parties, to_bits(i, m), psi.n)
        out.append(DiagonalExpression(i, suffixes, psi.amplitudes[suffixes]))
    return out


def rdm_from_expressions(exprs: Sequence[DiagonalExpression]) -> np.ndarray:
    """Assemble the RDM from aligned diagonal expressions.

    Row ``i`` of ``terms`` holds ``p_k`` for expression ``i``; the k-th terms of
    two expressions correspond because both lists are in ascending suffix
    order over the same free-place counter.
    """
    terms = np.stack([e.terms for e in exprs])
    return terms @ terms.conj().T


def rdm_from_pure(psi: PureState, parties: Sequence[int]) -> Rdm:
    parties = _check_subset(parties, psi.n)
    matrix = rdm_from_expressions(diagonal_expressions(psi, parties))
    return Rdm(parties, matrix, psi.n, psi.tol)


def partial_trace(matrix: np.ndarray, n: int, parties: Sequence[int]) -> np.ndarray:
    """Trace out every party not in ``parties`` from a ``2**n`` square matrix.

    Works for any square operator (not only density matrices), which the
    marginal-map oracle relies on.
    """
    parties = _check_subset(parties, n)
    if n > DENSE_MATRIX_CAP:
        raise CapExceededError(f"partial_trace is capped at {DENSE_MATRIX_CAP} qubits")
    keep = [p - 1 for p in parties]
    drop = [q for q in range(n) if q not in keep]
    t = np.asarray(matrix).reshape((2,) * (2 * n))
    t = t.transpose(keep + drop + [n + q for q in keep] + [n + q for q in drop])
    dk, dd = 1 << len(keep), 1 << len(drop)
    return np.trace(t.reshape(dk, dd, dk, dd), axis1=1, axis2=3)


def rdm_from_density(rho: DensityMatrix, parties: Sequence[int]) -> Rdm:
    parties = _check_subset(parties, rho.n)
    return Rdm(parties, partial_trace(rho.entries, rho.n, parties), rho.n, rho.tol)


def marginal_residual(a: Rdm, b: Rdm) -> float:
    """Largest entrywise deviation between two marginals on the same parties."""
    if a.parties != b.parties or a.ambient_n != b.ambient_n:
        raise ValueError(
            f"marginals live on different subsets: {a.parties}/{a.ambient_n} vs {b.parties}/{b.ambient_n}"
        )
    return float(np.abs(a.entries - b.entries).max())
