"""State containers and the analytic W-state constructions.

Two-qubit marginals are always written over the ordered basis
``|00>, |01>, |10>, |11>`` (0-based rows 0..3), so the "last" diagonal entry of
a pair marginal is ``[3, 3]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bitindex import canonical_pair, check_party, single_one_index
from .errors import CapExceededError, InvalidStateError

DENSE_VECTOR_CAP = 20
DENSE_MATRIX_CAP = 12


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared by every check in the package.

    ``zero_tol`` governs entries that must vanish and ``consistency_tol``
    governs agreement between quantities read from different marginals.
    All marginal entries live in [0, 1], so absolute tolerances are used.
    """

    norm_tol: float = 1e-10
    herm_tol: float = 1e-10
    psd_tol: float = 1e-9
    zero_tol: float = 1e-8
    consistency_tol: float = 1e-8


DEFAULT_TOL = Tolerances()


def _as_complex_vector(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.complex128)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d sequence, got shape {arr.shape}")
    return arr


def check_density(matrix: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> None:
    """Raise :class:`InvalidStateError` unless ``matrix`` is a density matrix."""
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InvalidStateError(f"density matrix must be square, got {matrix.shape}")
    herm = np.abs(matrix - matrix.conj().T).max(initial=0.0)
    if herm > tol.herm_tol:
        raise InvalidStateError(f"not Hermitian (deviation {herm:.3g})")
    tr = np.trace(matrix).real
    if abs(tr - 1.0) > tol.norm_tol:
        raise InvalidStateError(f"trace is {tr!r}, expected 1")
    lam = np.linalg.eigvalsh(matrix).min()
    if lam < -tol.psd_tol:
        raise InvalidStateError(f"not PSD (minimum eigenvalue {lam:.3g})")


@dataclass(frozen=True, eq=False)
class PureState:
    """Amplitude vector ``a_i`` of an ``n``-qubit pure state.

    ``amplitudes[i]`` multiplies the basis state whose big-endian bits spell ``i``.
    """

    n: int
    amplitudes: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        if self.n > DENSE_VECTOR_CAP:
            raise CapExceededError(f"dense state vectors are capped at {DENSE_VECTOR_CAP} qubits")
        amps = _as_complex_vector(self.amplitudes)
        if amps.shape[0] != 1 << self.n:
            raise ValueError(f"need {1 << self.n} amplitudes for n={self.n}, got {amps.shape[0]}")
        norm = np.vdot(amps, amps).real
        if abs(norm - 1.0) > self.tol.norm_tol:
            raise InvalidStateError(f"state norm^2 is {norm!r}, expected 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def projector(self) -> "DensityMatrix":
        return DensityMatrix(self.n, np.outer(self.amplitudes, self.amplitudes.conj()), self.tol)

    def fidelity(self, other: "PureState") -> float:
        """``|<self|other>|``, insensitive to global phase."""
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Full ``2**n x 2**n`` density matrix with entries ``r_ij``."""

    n: int
    entries: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        if self.n > DENSE_MATRIX_CAP:
            raise CapExceededError(f"dense density matrices are capped at {DENSE_MATRIX_CAP} qubits")
        m = np.asarray(self.entries, dtype=np.complex128)
        if m.shape != (1 << self.n, 1 << self.n):
            raise ValueError(f"expected shape {(1 << self.n,) * 2}, got {m.shape}")
        check_density(m, self.tol)
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)


@dataclass(frozen=True, eq=False)
class Rdm:
    """Reduced density matrix on the sorted party subset ``parties``."""

    parties: tuple[int, ...]
    entries: np.ndarray
    ambient_n: int
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        parties = tuple(check_party(p, self.ambient_n) for p in self.parties)
        if any(a >= b for a, b in zip(parties, parties[1:])):
            raise ValueError(f"parties must be strictly increasing, got {parties}")
        m = np.asarray(self.entries, dtype=np.complex128)
        dim = 1 << len(parties)
        if m.shape != (dim, dim):
            raise ValueError(f"expected a {dim}x{dim} matrix for parties {parties}, got {m.shape}")
        if self.validate:
            check_density(m, self.tol)
        m.setflags(write=False)
        object.__setattr__(self, "parties", parties)
        object.__setattr__(self, "entries", m)


@dataclass(frozen=True, eq=False)
class WCoefficients:
    """Coefficients of a W-class state, stored per party.

    ``c[J-1]`` is the amplitude of the basis state carrying its single 1 at
    party ``J``, i.e. the amplitude at global index ``2**(n-J)``.
    """

    c: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        c = _as_complex_vector(self.c)
        if c.shape[0] < 2:
            raise ValueError("a W state needs at least two parties")
        norm = np.vdot(c, c).real
        if abs(norm - 1.0) > self.tol.norm_tol:
            raise InvalidStateError(f"coefficient norm^2 is {norm!r}, expected 1")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    @property
    def n(self) -> int:
        return int(self.c.shape[0])

    def __getitem__(self, party: int) -> complex:
        return complex(self.c[check_party(party, self.n) - 1])

    @classmethod
    def from_powers(cls, w: Sequence[complex], tol: Tolerances = DEFAULT_TOL) -> "WCoefficients":
        """Build from ``w[i]`` = amplitude at index ``2**i`` (least-significant first)."""
        return cls(np.asarray(w, dtype=np.complex128)[::-1].copy(), tol)

    def fidelity(self, other: "WCoefficients") -> float:
        return float(abs(np.vdot(self.c, other.c)))


def uniform_w(n: int) -> WCoefficients:
    return WCoefficients(np.full(n, 1 / np.sqrt(n), dtype=np.complex128))


def random_w(n: int, rng: np.random.Generator, zero_parties: Sequence[int] = ()) -> WCoefficients:
    """Haar-random coefficients, optionally with some parties forced to zero."""
    c = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    for p in zero_parties:
        c[check_party(p, n) - 1] = 0
    return WCoefficients(c / np.linalg.norm(c))


def make_w(c: WCoefficients) -> PureState:
    """Dense amplitude vector of the W-class state with coefficients ``c``."""
    n = c.n
    if n > DENSE_VECTOR_CAP:
        raise CapExceededError(f"make_w is capped at {DENSE_VECTOR_CAP} qubits")
    amps = np.zeros(1 << n, dtype=np.complex128)
    for j in range(1, n + 1):
        amps[single_one_index(j, n)] = c.c[j - 1]
    return PureState(n, amps, c.tol)


def w_density(c: WCoefficients) -> DensityMatrix:
    """Projector ``|W><W|``; nonzero only on the single-one index block."""
    n = c.n
    if n > DENSE_MATRIX_CAP:
        raise CapExceededError(f"w_density is capped at {DENSE_MATRIX_CAP} qubits")
    idx = np.array([single_one_index(j, n) for j in range(1, n + 1)])
    rho = np.zeros((1 << n, 1 << n), dtype=np.complex128)
    rho[np.ix_(idx, idx)] = np.outer(c.c, c.c.conj())
    return DensityMatrix(n, rho, c.tol)


def w_pair_matrix(cj: complex, ck: complex) -> np.ndarray:
    """4x4 marginal of a normalized W state on a pair with coefficients ``cj, ck``."""
    m = np.zeros((4, 4), dtype=np.complex128)
    aj, ak = abs(cj) ** 2, abs(ck) ** 2
    m[0, 0] = 1.0 - aj - ak
    m[1, 1] = ak
    m[2, 2] = aj
    m[1, 2] = ck * np.conj(cj)
    m[2, 1] = cj * np.conj(ck)
    return m


def w_pair_matrices(c: np.ndarray, pairs: np.ndarray) -> np.ndarray:
    """Vectorized :func:`w_pair_matrix` for an ``(P, 2)`` array of 1-based pairs."""
    cj = c[pairs[:, 0] - 1]
    ck = c[pairs[:, 1] - 1]
    aj, ak = np.abs(cj) ** 2, np.abs(ck) ** 2
    m = np.zeros((pairs.shape[0], 4, 4), dtype=np.complex128)
    m[:, 0, 0] = 1.0 - aj - ak
    m[:, 1, 1] = ak
    m[:, 2, 2] = aj
    m[:, 1, 2] = ck * cj.conj()
    m[:, 2, 1] = cj * ck.conj()
    return m


def w_bipartite_marginal(c: WCoefficients, j: int, k: int) -> Rdm:
    """Closed-form marginal of the W state on parties ``j < k``; O(1) in ``n``."""
    if j >= k:
        raise ValueError(f"need j < k, got ({j}, {k})")
    j, k = canonical_pair(j, k, c.n)
    return Rdm((j, k), w_pair_matrix(c.c[j - 1], c.c[k - 1]), c.n, c.tol)


def psi_plus_decomposition(c: WCoefficients, j: int, k: int) -> tuple[np.ndarray, float]:
    """Split the W pair marginal into an entangled part plus vacuum weight.

    Returns the unnormalized vector ``(0, c_k, c_j, 0)`` and the weight on
    ``|00><00|``; ``outer(v, v.conj()) + weight * |00><00|`` is the marginal.
    """
    if j >= k:
        raise ValueError(f"need j < k, got ({j}, {k})")
    j, k = canonical_pair(j, k, c.n)
    cj, ck = c.c[j - 1], c.c[k - 1]
    vec = np.array([0.0, ck, cj, 0.0], dtype=np.complex128)
    weight = float(1.0 - abs(cj) ** 2 - abs(ck) ** 2)
    return vec, weight


def ghz_state(n: int, a: complex, b: complex) -> PureState:
    """``a|0...0> + b|1...1>`` (normalized by the caller's choice of a, b)."""
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[0] = a
    amps[-1] = b
    return PureState(n, amps)
