"""Numerical probes of marginal determinacy.

* the linear map from traceless Hermitian perturbations to their pair
  marginals, and its kernel;
* a PSD feasibility scan around the W projector, restricted to the
  subspace every compatible state must live on;
* block-wise phase twists, which build explicit states sharing a chosen
  set of marginals with a W state;
* a multi-start fit of pure states to a marginal set.

Coordinates. A traceless Hermitian ``d x d`` matrix is represented by the real
vector of its Frobenius-orthonormal coordinates: for each ``a < b`` the
symmetric generator ``(E_ab + E_ba)/sqrt2`` and the antisymmetric generator
``i(E_ab - E_ba)/sqrt2``, followed by the ``d - 1`` normalized diagonal
generators ``(E_00 + ... + E_{l-1,l-1} - l E_ll)/sqrt(l(l+1))``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bitindex import all_pairs, canonical_pair, check_party
from .errors import CapExceededError
from .reconstruct import MarginalSet
from .states import PureState, WCoefficients, make_w

MAP_CAP = 7
BASIS_CAP = 5
RANK_TOL = 1e-10
_SQRT2 = np.sqrt(2.0)


def _diag_generators(d: int) -> np.ndarray:
    """Rows are the ``d - 1`` normalized traceless diagonal generators."""
    out = np.zeros((d - 1, d))
    for l in range(1, d):
        out[l - 1, :l] = 1.0
        out[l - 1, l] = -l
        out[l - 1] /= np.sqrt(l * (l + 1))
    return out


def hermitian_to_coords(h: np.ndarray) -> np.ndarray:
    """Coordinates of (the traceless part of) Hermitian ``h``; batched over leading axes."""
    h = np.asarray(h)
    d = h.shape[-1]
    a, b = np.triu_indices(d, 1)
    upper = h[..., a, b]
    diag = np.einsum("...ii->...i", h).real
    return np.concatenate(
        [_SQRT2 * upper.real, _SQRT2 * upper.imag, diag @ _diag_generators(d).T], axis=-1
    )


def coords_to_hermitian(x: np.ndarray, d: int) -> np.ndarray:
    """Inverse of :func:`hermitian_to_coords` (batched over leading axes)."""
    x = np.asarray(x, dtype=float)
    npair = d * (d - 1) // 2
    if x.shape[-1] != d * d - 1:
        raise ValueError(f"expected {d * d - 1} coordinates, got {x.shape[-1]}")
    a, b = np.triu_indices(d, 1)
    h = np.zeros(x.shape[:-1] + (d, d), dtype=np.complex128)
    upper = (x[..., :npair] + 1j * x[..., npair:2 * npair]) / _SQRT2
    h[..., a, b] = upper
    h[..., b, a] = upper.conj()
    diag = x[..., 2 * npair:] @ _diag_generators(d)
    idx = np.arange(d)
    h[..., idx, idx] = diag
    return h


def _pair_output_coords(m: np.ndarray) -> np.ndarray:
    """16 real coordinates of a (batch of) 4x4 Hermitian matrices, trace included."""
    a, b = np.triu_indices(4, 1)
    upper = m[..., a, b]
    diag = np.einsum("...ii->...i", m).real
    return np.concatenate([diag, _SQRT2 * upper.real, _SQRT2 * upper.imag], axis=-1)


@dataclass
class MarginalMap:
    """Linear map from traceless Hermitian coordinates to stacked pair marginals.

    ``matrix`` has ``16 * len(pairs)`` rows (16 per pair: 4 diagonal, 6
    symmetric, 6 antisymmetric coordinates of the 4x4 marginal) and
    ``4**n - 1`` columns.
    """

    n: int
    pairs: list[tuple[int, int]]
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return 1 << self.n

    def __call__(self, h: np.ndarray) -> np.ndarray:
        """Apply the map to a Hermitian matrix (or a coordinate vector)."""
        h = np.asarray(h)
        x = h if h.ndim == 1 else hermitian_to_coords(h)
        return self.matrix @ x


def build_marginal_map(n: int, pairs: Sequence[Sequence[int]] | None = None) -> MarginalMap:
    """Assemble the marginal map column block by column block.

    Off-diagonal generators on ``(a, b)`` contribute to a pair only when
    ``a`` and ``b`` agree on every traced-out party; they then map onto the
    generator of the same type on the pair's local indices.
    """
    if n > MAP_CAP:
        raise CapExceededError(f"marginal map is capped at {MAP_CAP} qubits")
    if n < 2:
        raise ValueError("need at least two qubits")
    pairs = all_pairs(n) if pairs is None else sorted({canonical_pair(j, k, n) for j, k in pairs})
    d = 1 << n
    a, b = np.triu_indices(d, 1)
    npair = a.size
    gens = _diag_generators(d)
    idx = np.arange(d)
    # local coordinate slots of the 4x4 output
    up_a, up_b = np.triu_indices(4, 1)
    slot = -np.ones((4, 4), dtype=int)
    slot[up_a, up_b] = np.arange(6)

    blocks = []
    for j, k in pairs:
        wj, wk = n - j, n - k
        mask_out = ~((1 << wj) | (1 << wk)) & (d - 1)
        block = np.zeros((16, d * d - 1))
        agree = ((a ^ b) & mask_out) == 0
        la = 2 * ((a >> wj) & 1) + ((a >> wk) & 1)
        lb = 2 * ((b >> wj) & 1) + ((b >> wk) & 1)
        lo, hi = np.minimum(la, lb), np.maximum(la, lb)
        cols = np.nonzero(agree)[0]
        s = slot[lo[cols], hi[cols]]
        block[4 + s, cols] = 1.0
        block[10 + s, npair + cols] = np.where(la[cols] < lb[cols], 1.0, -1.0)
        # diagonal generators: sum generator weights over each local index
        local = 2 * ((idx >> wj) & 1) + ((idx >> wk) & 1)
        for x in range(4):
            block[x, 2 * npair:] = gens[:, local == x].sum(axis=1)
        blocks.append(block)
    return MarginalMap(n, list(pairs), np.vstack(blocks))


def _row_space(mat: np.ndarray, rank_tol: float) -> np.ndarray:
    """Orthonormal rows spanning the row space of ``mat``."""
    _, s, vt = np.linalg.svd(mat, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((0, mat.shape[1]))
    r = int(np.sum(s > rank_tol * s[0]))
    return vt[:r]


def kernel_dimension(mmap: MarginalMap, rank_tol: float = RANK_TOL) -> int:
    return mmap.matrix.shape[1] - _row_space(mmap.matrix, rank_tol).shape[0]


def null_space(mmap: MarginalMap, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Frobenius-orthonormal basis of traceless Hermitian matrices with zero listed marginals.

    Returned as an array of shape ``(k, 2**n, 2**n)``. Materializing the
    basis is capped at ``BASIS_CAP`` qubits; :func:`uniqueness_evidence`
    samples the kernel implicitly and reaches ``MAP_CAP``.
    """
    if mmap.n > BASIS_CAP:
        raise CapExceededError(f"explicit kernel basis is capped at {BASIS_CAP} qubits")
    mat = mmap.matrix
    _, s, vt = np.linalg.svd(mat, full_matrices=True)
    r = int(np.sum(s > rank_tol * s[0])) if s.size and s[0] > 0 else 0
    return coords_to_hermitian(vt[r:], mmap.dim)


@dataclass
class UniquenessEvidence:
    """Summary of a feasibility scan around the W projector.

    ``feasible_directions == 0`` is the success condition. Directions are
    drawn from the support-restricted kernel (see :func:`uniqueness_evidence`);
    ``worst_min_eig`` is the largest ``max(lambda_min(C), -lambda_max(C))`` over
    their compressions ``C`` (non-negative means the compression test passed).
    The ``first_order_*`` fields come from uniform samples of the whole kernel
    tested with the compression criterion alone.
    """

    n: int
    pairs: list[tuple[int, int]]
    samples: int
    feasible_directions: int
    worst_min_eig: float
    null_space_dim: int
    support_dim: int
    support_kernel_dim: int
    first_order_candidates: int
    first_order_worst: float
    seed: int
    candidates: list[dict] = field(default_factory=list)

    @property
    def unique(self) -> bool:
        return self.feasible_directions == 0


def embed_pair_operator(a: np.ndarray, j: int, k: int, n: int) -> np.ndarray:
    """``a`` acting on parties ``j < k`` tensored with the identity elsewhere."""
    d = 1 << n
    idx = np.arange(d)
    wj, wk = n - j, n - k
    rest = idx & ~((1 << wj) | (1 << wk))
    local = 2 * ((idx >> wj) & 1) + ((idx >> wk) & 1)
    same = rest[:, None] == rest[None, :]
    return np.where(same, a[local[:, None], local[None, :]], 0)


def support_subspace(ms: MarginalSet, rank_tol: float = 1e-9) -> np.ndarray:
    """Orthonormal columns spanning the intersection of ``supp(rho^{JK}) (x) rest``.

    Every state whose listed marginals equal ``ms`` is supported here: a PSD
    matrix with a vanishing diagonal entry has a vanishing row and column, so
    a vector killed by a marginal is killed by the global state.
    """
    n = ms.n
    d = 1 << n
    acc = np.zeros((d, d), dtype=np.complex128)
    for (j, k), m in zip(ms.pair_list(), ms.matrices):
        lam, vec = np.linalg.eigh(m)
        null = vec[:, lam <= rank_tol]
        acc += embed_pair_operator(null @ null.conj().T, j, k, n)
    lam, vec = np.linalg.eigh(acc)
    return vec[:, lam <= rank_tol]


def _exact_feasible(x: np.ndarray, w: np.ndarray, tol: float) -> tuple[bool, bool, float, float]:
    """Whether ``rho + tH`` (resp. ``rho - tH``) stays PSD for some small ``t > 0``.

    With ``rho = |w><w|`` write ``H`` in blocks along ``w`` and its complement:
    compression ``C`` and coupling ``b``. The perturbation is feasible iff
    ``C`` is PSD and ``b`` lies in the range of ``C``.
    """
    s = w.size
    q = _complement_basis(w)
    comp = q.conj().T @ x @ q
    b = q.conj().T @ x @ w
    lam, vec = np.linalg.eigh(comp)
    kernel = vec[:, np.abs(lam) <= tol] if s > 1 else vec[:, :0]
    coupled = float(np.linalg.norm(kernel.conj().T @ b)) if kernel.size else 0.0
    lo, hi = (float(lam[0]), float(lam[-1])) if lam.size else (0.0, 0.0)
    ok = coupled <= tol
    return (lo >= -tol and ok), (hi <= tol and ok), lo, hi


def _complement_basis(w: np.ndarray) -> np.ndarray:
    """Orthonormal columns spanning the orthocomplement of unit vector ``w``."""
    d = w.size
    q, _ = np.linalg.qr(np.column_stack([w, np.eye(d, dtype=np.complex128)]))
    return q[:, 1:d]


def _compression_extremes(x: np.ndarray, q: np.ndarray, d: int, chunk: int = 512):
    lo_all, hi_all = [], []
    for start in range(0, x.shape[0], chunk):
        h = coords_to_hermitian(x[start:start + chunk], d)
        comp = np.einsum("ia,kij,jb->kab", q.conj(), h, q, optimize=True)
        lam = np.linalg.eigvalsh(comp)
        lo_all.append(lam[:, 0])
        hi_all.append(lam[:, -1])
    return np.concatenate(lo_all), np.concatenate(hi_all)


def _restricted_kernel(mmap: MarginalMap, v: np.ndarray, rank_tol: float) -> np.ndarray:
    """Kernel of the marginal map on traceless Hermitian operators supported on ``range(v)``.

    Returned as orthonormal coordinate rows over the ``s x s`` traceless
    Hermitian space (``s = v.shape[1]``).
    """
    s = v.shape[1]
    if s < 2:
        return np.zeros((0, max(s * s - 1, 0)))
    gens = coords_to_hermitian(np.eye(s * s - 1), s)
    cols = []
    for start in range(0, gens.shape[0], 256):
        h = v @ gens[start:start + 256] @ v.conj().T
        cols.append(mmap.matrix @ hermitian_to_coords(h).T)
    images = np.hstack(cols)
    _, sv, vt = np.linalg.svd(images, full_matrices=True)
    r = int(np.sum(sv > rank_tol * sv[0])) if sv.size and sv[0] > 0 else 0
    return vt[r:]


def uniqueness_evidence(
    c: WCoefficients,
    pairs: Sequence[Sequence[int]] | None = None,
    samples: int = 10_000,
    seed: int = 0,
    feas_tol: float | None = None,
    rank_tol: float = RANK_TOL,
) -> UniquenessEvidence:
    """Look for directions along which a state could leave ``|W><W|`` keeping the marginals.

    Any competing state lives on :func:`support_subspace`, so candidate
    directions are drawn uniformly (seeded) from the unit sphere of the
    marginal-map kernel restricted to operators on that subspace, and each is
    tested with the exact small-step PSD condition. An empty restricted
    kernel is a trivial success. For comparison, ``samples`` uniform
    directions of the unrestricted kernel are graded by the first-order
    compression test alone; that test is necessary but not sufficient, so its
    count can be positive even when the state is unique.
    """
    n = c.n
    if n > MAP_CAP:
        raise CapExceededError(f"uniqueness_evidence is capped at {MAP_CAP} qubits")
    tol = c.tol.psd_tol if feas_tol is None else feas_tol
    mmap = build_marginal_map(n, pairs)
    d = mmap.dim
    rows = _row_space(mmap.matrix, rank_tol)
    kdim = mmap.matrix.shape[1] - rows.shape[0]
    w = make_w(c).amplitudes
    ms = MarginalSet.from_w(c, mmap.pairs)
    v = support_subspace(ms)
    ev = UniquenessEvidence(n, mmap.pairs, 0, 0, float("nan"), kdim, v.shape[1], 0, 0, float("nan"), seed)
    if kdim == 0:
        return ev

    q = _complement_basis(w)
    rng = np.random.default_rng([seed, 0])
    g = rng.standard_normal((samples, mmap.matrix.shape[1]))
    x = g - (g @ rows.T) @ rows
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    lo, hi = _compression_extremes(x, q, d)
    first = np.maximum(lo, -hi)
    ev.samples = samples
    ev.first_order_candidates = int(np.sum(first >= -tol))
    ev.first_order_worst = float(first.max())

    kernel = _restricted_kernel(mmap, v, rank_tol)
    ev.support_kernel_dim = int(kernel.shape[0])
    if not ev.support_kernel_dim:
        return ev
    s = v.shape[1]
    w_s = v.conj().T @ w
    rng = np.random.default_rng([seed, 1])
    y = rng.standard_normal((samples, kernel.shape[0])) @ kernel
    y /= np.linalg.norm(y, axis=1, keepdims=True)
    xs = coords_to_hermitian(y, s)
    worst = -np.inf
    for i in range(samples):
        plus, minus, lo_i, hi_i = _exact_feasible(xs[i], w_s, tol)
        worst = max(worst, lo_i, -hi_i)
        if plus or minus:
            ev.feasible_directions += 1
            if len(ev.candidates) < 5:
                ev.candidates.append(
                    {"sample": i, "sign": "+" if plus else "-", "min_eig": lo_i, "max_eig": hi_i}
                )
    ev.worst_min_eig = float(worst)
    return ev


def _check_partition(blocks: Sequence[Sequence[int]], n: int) -> list[list[int]]:
    seen: list[int] = []
    out = []
    for blk in blocks:
        blk = [check_party(p, n) for p in blk]
        if not blk:
            raise ValueError("empty block in partition")
        seen.extend(blk)
        out.append(blk)
    if sorted(seen) != list(range(1, n + 1)):
        raise ValueError(f"blocks {blocks} do not partition parties 1..{n}")
    return out


def twist_coefficients(c: WCoefficients, blocks: Sequence[Sequence[int]], phases: Sequence[float]) -> WCoefficients:
    """Multiply ``c_J`` by ``exp(i * phases[B])`` for every party ``J`` in block ``B``."""
    blocks = _check_partition(blocks, c.n)
    if len(phases) != len(blocks):
        raise ValueError(f"need one phase per block ({len(blocks)}), got {len(phases)}")
    out = c.c.copy()
    for blk, theta in zip(blocks, phases):
        out[np.array(blk) - 1] *= np.exp(1j * theta)
    return WCoefficients(out, c.tol)


def phase_twist(c: WCoefficients, blocks: Sequence[Sequence[int]], phases: Sequence[float]) -> PureState:
    """Dense W state with block-wise phases; same-block marginals are unchanged."""
    return make_w(twist_coefficients(c, blocks, phases))


# ---------------------------------------------------------------------------
# multi-start fit over span{|0...0>, single-excitation states}


def _model_marginals(x: np.ndarray, j: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Pair marginals of ``x[0]|0..0> + sum_L x[L]|e_L>``; ``j, k`` index into ``x``."""
    p2 = np.abs(x) ** 2
    out = np.zeros((j.size, 4, 4), dtype=np.complex128)
    out[:, 0, 0] = p2.sum() - p2[j] - p2[k]
    out[:, 1, 1] = p2[k]
    out[:, 2, 2] = p2[j]
    out[:, 1, 2] = x[k] * x[j].conj()
    out[:, 2, 1] = x[j] * x[k].conj()
    out[:, 0, 1] = x[0] * x[k].conj()
    out[:, 1, 0] = x[k] * x[0].conj()
    out[:, 0, 2] = x[0] * x[j].conj()
    out[:, 2, 0] = x[j] * x[0].conj()
    return out


def fit_objective(x: np.ndarray, targets: np.ndarray, j: np.ndarray, k: np.ndarray) -> tuple[float, np.ndarray]:
    """Sum of squared Frobenius residuals and its gradient.

    The gradient is with respect to ``x`` viewed as a real vector in C^(n+1),
    so ``f(x + dx) ~ f(x) + Re<grad, dx>``.
    """
    r = _model_marginals(x, j, k) - targets
    f = float(np.sum(np.abs(r) ** 2))
    m = x.size
    g = np.zeros((m, m), dtype=np.complex128)
    r00 = r[:, 0, 0].real
    g[np.arange(1, m), np.arange(1, m)] += r00.sum()
    g[0, 0] += r00.sum()
    np.add.at(g, (j, j), r[:, 2, 2] - r00)
    np.add.at(g, (k, k), r[:, 1, 1] - r00)
    np.add.at(g, (k, j), r[:, 1, 2])
    np.add.at(g, (j, k), r[:, 2, 1])
    np.add.at(g, (np.zeros_like(k), k), r[:, 0, 1])
    np.add.at(g, (k, np.zeros_like(k)), r[:, 1, 0])
    np.add.at(g, (np.zeros_like(j), j), r[:, 0, 2])
    np.add.at(g, (j, np.zeros_like(j)), r[:, 2, 0])
    return f, 4.0 * (g @ x)


@dataclass
class FitResult:
    coefficients: np.ndarray  # index 0 is |0...0>, index L is party L's single excitation
    state: PureState
    residual: float
    converged: bool
    iterations: int
    count: int = 1


@dataclass
class FitReport:
    applicable: bool
    message: str
    minimizers: list[FitResult]
    starts: int
    failures: int


def _project_gradient_descent(x, targets, j, k, max_iters, ftol, gtol):
    f, g = fit_objective(x, targets, j, k)
    step = 1.0
    for it in range(1, max_iters + 1):
        g_t = g - np.real(np.vdot(x, g)) * x
        gnorm2 = float(np.real(np.vdot(g_t, g_t)))
        if f < ftol or gnorm2 < gtol**2:
            return x, f, True, it - 1
        step = min(step * 2.0, 1e3)
        while True:
            y = x - step * g_t
            y /= np.linalg.norm(y)
            fy, gy = fit_objective(y, targets, j, k)
            if fy <= f - 1e-4 * step * gnorm2:
                break
            step *= 0.5
            if step < 1e-16:
                return x, f, False, it
        x, f, g = y, fy, gy
    return x, f, f < ftol, max_iters


def _gauge(x: np.ndarray) -> np.ndarray:
    mod = np.abs(x)
    t = int(np.argmax(mod >= mod.max() - 1e-9))
    return x * (np.conj(x[t]) / mod[t])


def multistart_pure_fit(
    ms: MarginalSet,
    starts: int = 20,
    seed: int = 0,
    max_iters: int = 5000,
    ftol: float = 1e-24,
    gtol: float = 1e-14,
    cluster_tol: float = 1e-6,
) -> FitReport:
    """Fit pure states in span{|0..0>, |e_1>, ..., |e_n>} to the given marginals.

    Each start minimizes the summed squared Frobenius residual by projected
    gradient descent on the unit sphere with Armijo backtracking. Minimizers
    are gauge-fixed and merged when ``1 - |<x|y>| < cluster_tol``; the
    reported residual is the largest entrywise deviation over all pairs. A
    single cluster suggests the marginals pin the state down; many distinct
    zero-residual clusters expose a family of states sharing them.
    """
    n = ms.n
    if n > 12:
        raise CapExceededError("multistart_pure_fit is capped at 12 qubits")
    d33 = ms.matrices[:, 3, 3].real
    if np.any(d33 > ms.tol.zero_tol):
        i = int(np.argmax(d33))
        return FitReport(False, f"marginal {tuple(ms.pairs[i])} has two-excitation weight {d33[i]:.3g}; "
                         "the single-excitation ansatz does not apply", [], starts, 0)
    j = ms.pairs[:, 0].copy()
    k = ms.pairs[:, 1].copy()
    targets = ms.matrices

    raw = []
    failures = 0
    for s in range(starts):
        rng = np.random.default_rng([seed, s])
        x0 = rng.standard_normal(n + 1) + 1j * rng.standard_normal(n + 1)
        x0 /= np.linalg.norm(x0)
        x, _, conv, its = _project_gradient_descent(x0, targets, j, k, max_iters, ftol, gtol)
        res = float(np.abs(_model_marginals(x, j, k) - targets).max())
        failures += not conv
        raw.append((_gauge(x), res, conv, its))

    raw.sort(key=lambda t: t[1])
    clusters: list[FitResult] = []
    for x, res, conv, its in raw:
        for cl in clusters:
            if 1 - abs(np.vdot(cl.coefficients, x)) < cluster_tol:
                cl.count += 1
                break
        else:
            amps = np.zeros(1 << n, dtype=np.complex128)
            amps[0] = x[0]
            amps[[1 << (n - p) for p in range(1, n + 1)]] = x[1:]
            clusters.append(FitResult(x, PureState(n, amps), res, conv, its))
    return FitReport(True, "", clusters, starts, failures)
