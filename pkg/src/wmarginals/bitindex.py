"""Computational-basis index arithmetic for N-qubit registers.

Convention: basis index ``i`` is read big-endian, so party 1 owns the most
significant bit (weight ``2**(n-1)``) and party ``J`` owns weight ``2**(n-J)``.
Every other module inherits this ordering.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence

import numpy as np

MAX_QUBITS = 62


def _check_n(n: int) -> None:
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"qubit count must lie in 1..{MAX_QUBITS}, got {n}")


def check_party(j: int, n: int) -> int:
    """Range-check a 1-based party label against ``n``.

    Labels are not subject to ``MAX_QUBITS``; only index arithmetic is.
    """
    if n < 1:
        raise ValueError(f"party count must be positive, got {n}")
    if isinstance(j, bool) or int(j) != j or not 1 <= j <= n:
        raise ValueError(f"party label {j!r} outside 1..{n}")
    return int(j)


def check_index(i: int, n: int) -> int:
    _check_n(n)
    if isinstance(i, bool) or int(i) != i or not 0 <= i < (1 << n):
        raise ValueError(f"basis index {i!r} outside 0..{(1 << n) - 1}")
    return int(i)


def to_bits(i: int, n: int) -> tuple[int, ...]:
    """Big-endian bit string of basis index ``i`` on ``n`` qubits.

    >>> to_bits(2, 3)
    (0, 1, 0)
    """
    i = check_index(i, n)
    return tuple((i >> (n - 1 - k)) & 1 for k in range(n))


def from_bits(bits: Sequence[int]) -> int:
    """Inverse of :func:`to_bits`."""
    value = 0
    for b in bits:
        if b not in (0, 1):
            raise ValueError(f"bits must be 0/1, got {b!r}")
        value = (value << 1) | int(b)
    return value


def single_one_index(j: int, n: int) -> int:
    """Index of the basis state with a single 1 at party ``j``: ``2**(n-j)``."""
    _check_n(n)
    j = check_party(j, n)
    return 1 << (n - j)


def _check_positions(positions: Sequence[int], bits: Sequence[int], n: int) -> tuple[list[int], list[int]]:
    _check_n(n)
    positions = [check_party(p, n) for p in positions]
    if any(a >= b for a, b in zip(positions, positions[1:])):
        raise ValueError(f"positions must be strictly increasing, got {positions}")
    if len(bits) != len(positions):
        raise ValueError("positions and bits differ in length")
    bits = list(bits)
    if any(b not in (0, 1) for b in bits):
        raise ValueError(f"bits must be 0/1, got {bits}")
    return positions, [int(b) for b in bits]


def least_suffix(positions: Sequence[int], bits: Sequence[int], n: int) -> int:
    """Smallest global index whose bits at ``positions`` equal ``bits``.

    This is ``sum(t_j * 2**(n - i_j))``: the pattern bits placed at their
    parties and every traced-out place filled with 0.
    """
    positions, bits = _check_positions(positions, bits, n)
    return sum(t << (n - p) for p, t in zip(positions, bits))


def enumerate_suffixes(positions: Sequence[int], bits: Sequence[int], n: int) -> np.ndarray:
    """All ``2**(n-m)`` global indices agreeing with ``bits`` at ``positions``.

    The result is ascending, so element 0 is :func:`least_suffix`. Free places
    are visited in party order (descending weight), which means the counter
    over free places maps monotonically onto global indices and no sort is
    needed.
    """
    positions, bits = _check_positions(positions, bits, n)
    base = sum(t << (n - p) for p, t in zip(positions, bits))
    fixed = set(positions)
    free_weights = [1 << (n - p) for p in range(1, n + 1) if p not in fixed]
    n_free = len(free_weights)
    if n_free > 40:
        raise ValueError(f"refusing to enumerate 2**{n_free} indices")
    counter = np.arange(1 << n_free, dtype=np.int64)
    out = np.full(counter.shape, base, dtype=np.int64)
    for k, w in enumerate(free_weights):
        # k-th free place takes the k-th most significant counter bit
        out += ((counter >> (n_free - 1 - k)) & 1) * w
    return out


def canonical_pair(j: int, k: int, n: int) -> tuple[int, int]:
    """Validate an unordered party pair and return it as ``(min, max)``."""
    j, k = check_party(j, n), check_party(k, n)
    if j == k:
        raise ValueError(f"pair needs two distinct parties, got ({j}, {k})")
    return (j, k) if j < k else (k, j)


def all_pairs(n: int) -> list[tuple[int, int]]:
    return [(j, k) for j in range(1, n + 1) for k in range(j + 1, n + 1)]


def star_pairs(n: int, hub: int = 1) -> list[tuple[int, int]]:
    return [canonical_pair(hub, k, n) for k in range(1, n + 1) if k != hub]


def coverage_graph_connected(
    pairs: Iterable[Sequence[int]], n: int
) -> tuple[bool, list[frozenset[int]]]:
    """Connectivity of the graph on parties ``1..n`` whose edges are ``pairs``.

    Returns ``(connected, components)``; components are sorted by their
    smallest member and isolated parties appear as singletons.
    """
    if n < 1:
        raise ValueError(f"party count must be positive, got {n}")
    parent = list(range(n + 1))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for pair in pairs:
        if len(pair) != 2:
            raise ValueError(f"malformed pair {pair!r}")
        j, k = canonical_pair(pair[0], pair[1], n)
        rj, rk = find(j), find(k)
        if rj != rk:
            parent[max(rj, rk)] = min(rj, rk)

    groups: dict[int, set[int]] = {}
    for v in range(1, n + 1):
        groups.setdefault(find(v), set()).add(v)
    components = sorted((frozenset(g) for g in groups.values()), key=min)
    return len(components) == 1, components
