"""Quantum states of the gas from its interaction graph.

All particles start in ``|+>`` and pick up a phase ``exp(i*phi)`` on the
``|11>`` component of every colliding pair, so the global state in the
computational basis is ``2**(-N/2) * sum_s exp(i/2 s.Gamma.s) |s>``.

Tracing out the rest of the gas damps each coherence ``|s_A><s_A'|`` of
a subset A by a complex factor that multiplies independently over the
outside particles:

    C(z) = prod_k exp(i/2 z.row_k) * cos(1/2 z.row_k),   z = s_A - s_A'

where ``row_k`` is particle k's phase row against A.  That product form
is what lets reduced states of small subsets be computed in O(N), with
a brute-force exponential construction retained as an oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .graph import InteractionGraph, as_partition

#: Hard cap for brute-force state vectors (2**20 amplitudes).
BRUTE_FORCE_MAX = 20

#: Default cap for subset size in the efficient reduced-state engine.
SUBSET_MAX = 12

#: Eigenvalues in [-EIG_FLOOR, 0] are clamped to zero before entropies.
EIG_FLOOR = 1e-10


class InvalidStateError(ValueError):
    """A matrix violates density-matrix requirements beyond tolerance."""


def basis_bits(n: int) -> np.ndarray:
    """(2**n, n) array of basis labels; bit j of row s is particle j."""
    idx = np.arange(1 << n, dtype=np.int64)
    return ((idx[:, None] >> (n - 1 - np.arange(n))) & 1).astype(np.int8)


@dataclass(frozen=True)
class ReducedDensityMatrix:
    """Reduced state of a particle subset, with its quality checks.

    Attributes
    ----------
    matrix : complex ndarray of shape (2**k, 2**k)
    subset : tuple of int
        The particle indices the matrix refers to, in ascending order.
    """

    matrix: np.ndarray
    subset: tuple[int, ...]

    def __array__(self, dtype=None):
        return np.asarray(self.matrix, dtype=dtype)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        """Ascending spectrum with tiny negative values clamped to zero."""
        lam = np.linalg.eigvalsh(self.matrix)
        if lam.min() < -EIG_FLOOR:
            raise InvalidStateError(
                f"negative eigenvalue {lam.min():.3e} beyond tolerance")
        return np.clip(lam, 0.0, None)

    def validate(self, atol: float = 1e-12) -> None:
        m = self.matrix
        if m.shape != (self.dim, self.dim) or self.dim != 1 << len(self.subset):
            raise InvalidStateError("dimension does not match subset size")
        if not np.allclose(m, m.conj().T, atol=atol):
            raise InvalidStateError("matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > atol or abs(np.trace(m).imag) > atol:
            raise InvalidStateError("trace differs from one")
        self.eigenvalues()


def coherence_factor(g: InteractionGraph, p, z) -> complex:
    """Damping factor of the coherence labelled by ``z = s_A - s_A'``.

    Parameters
    ----------
    g : InteractionGraph
    p : Partition or index sequence
        The subset A whose reduced state is being considered.
    z : sequence of {-1, 0, 1}, length len(A)

    Returns
    -------
    complex
        ``prod_k exp(i/2 w_k) cos(w_k / 2)`` with ``w = z . Gamma[A, B]``
        over outside particles k.  Evaluated in log-magnitude plus
        accumulated-phase form so that products of very many cosine
        factors underflow gracefully instead of losing the phase.
    """
    p = as_partition(p, g.n)
    z = np.asarray(z, dtype=float)
    if z.shape != (p.n_a,):
        raise ValueError(f"z must have length {p.n_a}")
    if not np.all(np.isin(z, (-1.0, 0.0, 1.0))):
        raise ValueError("z entries must be -1, 0 or 1")
    if p.n_b == 0:
        return 1.0 + 0.0j
    gamma_ab = g.cross_block(p.members, p.complement)
    w = z @ gamma_ab
    w = w[w != 0.0]  # zero-coupled outsiders contribute a factor of one
    if w.size == 0:
        return 1.0 + 0.0j
    c = np.cos(0.5 * w)
    if np.any(c == 0.0):
        return 0.0 + 0.0j
    log_mag = np.sum(np.log(np.abs(c)))
    phase = 0.5 * np.sum(w) + np.pi * np.count_nonzero(c < 0)
    if log_mag < -745.0:  # exp underflows to zero anyway
        return 0.0 + 0.0j
    return complex(np.exp(log_mag) * np.exp(1j * phase))


def coherence_matrix(gamma_ab: np.ndarray) -> np.ndarray:
    """Matrix of coherence factors C[s, s'] for a subset.

    ``gamma_ab`` is the (n_a, n_b) phase block between the subset and
    the rest.  Uses the rank-one product form
    ``C = prod_k (1 + u_k u_k^dagger) / 2`` with ``u_k[s] = exp(i s.col_k)``.
    """
    n_a = gamma_ab.shape[0]
    dim = 1 << n_a
    cols = gamma_ab[:, np.any(gamma_ab != 0.0, axis=0)]
    c = np.ones((dim, dim), dtype=complex)
    if cols.shape[1] == 0:
        return c
    bits = basis_bits(n_a).astype(float)
    u = np.exp(1j * (bits @ cols))  # (dim, n_active)
    for k in range(u.shape[1]):
        c *= 0.5 * (1.0 + np.outer(u[:, k], u[:, k].conj()))
    return c


@lru_cache(maxsize=16)
def ternary_vectors(m: int) -> np.ndarray:
    """All coherence labels z in {-1, 0, 1}**m as a (3**m, m) array."""
    idx = np.arange(3 ** m, dtype=np.int64)
    digits = (idx[:, None] // (3 ** np.arange(m - 1, -1, -1))) % 3
    out = (digits - 1).astype(np.float64)
    out.setflags(write=False)
    return out


def reduced_purity(g: InteractionGraph, p) -> float:
    """tr(rho_A**2) without building the matrix.

    Sums |C(z)|**2 over all 3**|A| coherence labels with multiplicity
    2**(|A| - nonzeros(z)); cost O(3**|A| * N).  Intra-subset phases are
    a conjugation, so they do not enter.
    """
    p = as_partition(p, g.n)
    if p.n_b == 0:
        return 1.0
    gamma_ab = g.cross_block(p.members, p.complement)
    gamma_ab = gamma_ab[:, np.any(gamma_ab != 0.0, axis=0)]
    z = ternary_vectors(p.n_a)
    weights = 2.0 ** (-np.count_nonzero(z, axis=1).astype(float))
    if gamma_ab.shape[1] == 0:
        return 1.0
    w = z @ gamma_ab
    abs_c_sq = np.prod(np.cos(0.5 * w) ** 2, axis=1)
    return float((weights * abs_c_sq).sum() / (1 << p.n_a))


def internal_phase_vector(gamma_aa: np.ndarray) -> np.ndarray:
    """Diagonal phases exp(i/2 s.Gamma_AA.s) over the subset basis."""
    n_a = gamma_aa.shape[0]
    bits = basis_bits(n_a).astype(float)
    quad = np.einsum("si,ij,sj->s", bits, gamma_aa, bits)
    return np.exp(0.5j * quad)


def real_coherence_matrix(gamma_ab: np.ndarray) -> np.ndarray:
    """Coherence matrix with its removable phase prefactor stripped.

    The phase of C(s - s') is linear in the label difference, so it can
    be cancelled by diagonal single-particle unitaries; what remains is
    the real symmetric matrix of cosine products, which shares the
    spectrum of the reduced state (and is cheaper to diagonalize).
    """
    n_a = gamma_ab.shape[0]
    dim = 1 << n_a
    cols = gamma_ab[:, np.any(gamma_ab != 0.0, axis=0)]
    r = np.ones((dim, dim))
    if cols.shape[1] == 0:
        return r
    theta = 0.5 * (basis_bits(n_a).astype(float) @ cols)  # (dim, n_active)
    c, s = np.cos(theta), np.sin(theta)
    for k in range(theta.shape[1]):
        # cos(theta_s - theta_s') as a rank-two outer combination
        r *= np.outer(c[:, k], c[:, k]) + np.outer(s[:, k], s[:, k])
    return r


def reduced_spectrum(g: InteractionGraph, p) -> np.ndarray:
    """Eigenvalues of the reduced state of subset A, ascending.

    Diagonalizes the real cosine-product matrix instead of the complex
    reduced state; intra-subset phases are conjugations and do not
    enter.  Tiny negative values are clamped to zero.
    """
    p = as_partition(p, g.n)
    if p.n_b == 0:
        lam = np.zeros(1 << p.n_a)
        lam[-1] = 1.0
        return lam
    gamma_ab = g.cross_block(p.members, p.complement)
    lam = np.linalg.eigvalsh(real_coherence_matrix(gamma_ab)) / (1 << p.n_a)
    if lam.min() < -EIG_FLOOR:
        raise InvalidStateError(
            f"negative eigenvalue {lam.min():.3e} beyond tolerance")
    return np.clip(lam, 0.0, None)


def reduced_density_matrix(g: InteractionGraph, p, include_internal: bool = False,
                           max_subset: int = SUBSET_MAX) -> ReducedDensityMatrix:
    """Reduced state of subset A computed through coherence factors.

    Cost is O(2**(2|A|) * N), so the total gas can be essentially
    arbitrarily large.  With ``include_internal`` the diagonal unitary
    generated by intra-subset phases is applied as well; it is a
    conjugation, so it changes no eigenvalue and no entanglement with
    the rest of the gas.

    Raises
    ------
    ValueError
        If ``len(A)`` exceeds ``max_subset`` (memory guard).
    """
    p = as_partition(p, g.n)
    if p.n_a > max_subset:
        raise ValueError(f"subset size {p.n_a} exceeds cap {max_subset}")
    if p.n_b > 0:
        gamma_ab = g.cross_block(p.members, p.complement)
    else:
        gamma_ab = np.zeros((p.n_a, 0))
    rho = coherence_matrix(gamma_ab) / (1 << p.n_a)
    if include_internal:
        d = internal_phase_vector(g.cross_block(p.members, p.members))
        rho = d[:, None] * rho * d.conj()[None, :]
    return ReducedDensityMatrix(matrix=rho, subset=p.members)


def brute_force_state(g: InteractionGraph) -> np.ndarray:
    """Full 2**N state vector; ground truth for everything else.

    Amplitudes are ``2**(-N/2) exp(i/2 s.Gamma.s)``, all of equal
    modulus.  Capped at N = 20.
    """
    if g.n > BRUTE_FORCE_MAX:
        raise ValueError(f"brute force capped at {BRUTE_FORCE_MAX} particles")
    gamma = g.phases_matrix()
    size = 1 << g.n
    idx = np.arange(size, dtype=np.int64)
    phase = np.zeros(size)
    ks, ls = np.nonzero(np.triu(gamma, 1))
    for k, l in zip(ks, ls):
        both = ((idx >> (g.n - 1 - k)) & (idx >> (g.n - 1 - l)) & 1).astype(bool)
        phase[both] += gamma[k, l]
    return np.exp(1j * phase) / np.sqrt(size)


def partial_trace(psi: np.ndarray, keep, n: int) -> np.ndarray:
    """Exact partial trace of a pure state onto the ``keep`` qubits."""
    keep = list(keep)
    rest = [q for q in range(n) if q not in keep]
    t = psi.reshape([2] * n).transpose(keep + rest)
    m = t.reshape(1 << len(keep), 1 << len(rest))
    return m @ m.conj().T


def brute_force_reduced(g: InteractionGraph, p) -> ReducedDensityMatrix:
    """Reduced state via full state plus partial trace (validation oracle)."""
    p = as_partition(p, g.n)
    rho = partial_trace(brute_force_state(g), p.members, g.n)
    return ReducedDensityMatrix(matrix=rho, subset=p.members)


@dataclass(frozen=True)
class LocalizationResult:
    """Outcome of the measurement protocol that concentrates entanglement
    onto a chosen particle pair."""

    concurrence: float
    connected: bool
    path: tuple[int, ...]
    method: str
    n_branches: int

    def __float__(self):
        return self.concurrence


def _pure_concurrences(mats: np.ndarray) -> np.ndarray:
    """2|det| of a stack of unnormalized 2x2 pure-state amplitude matrices."""
    det = mats[..., 0, 0] * mats[..., 1, 1] - mats[..., 0, 1] * mats[..., 1, 0]
    return 2.0 * np.abs(det)


def _localize_exact(block: np.ndarray) -> tuple[float, int]:
    """Enumerate every x-measurement branch on the path interior."""
    length = block.shape[0]
    sub = InteractionGraph(length)
    for a in range(length):
        for b in range(a + 1, length):
            if block[a, b] != 0.0:
                sub.add_phase(a, b, block[a, b])
    t = brute_force_state(sub).reshape([2] * length)
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for ax in range(1, length - 1):
        lo = np.take(t, 0, axis=ax)
        hi = np.take(t, 1, axis=ax)
        t = np.stack(((lo + hi) * inv_sqrt2, (lo - hi) * inv_sqrt2), axis=ax)
    branches = t.reshape(2, -1, 2).transpose(1, 0, 2)
    # Branch probability weights cancel: sum_b p_b * C(psi_b) = sum_b 2|det|.
    return float(np.sum(_pure_concurrences(branches))), branches.shape[0]


def _localize_monte_carlo(block: np.ndarray, samples: int, rng) -> float:
    """Sample branches by sequential x-measurements along the chain.

    Keeps only a 2x2 transfer tensor (endpoint amplitude by current
    chain head), so path length is unbounded.  Assumes the path has no
    chords, which a shortest path guarantees.
    """
    length = block.shape[0]
    chain = [block[m, m + 1] for m in range(length - 1)]
    total = 0.0
    for _ in range(samples):
        s = np.array([0.0, 1.0])
        t = np.exp(1j * chain[0] * np.outer(s, s))  # (s_0, s_1)
        for m in range(1, length - 1):
            hop = np.exp(1j * chain[m] * np.outer(s, s))  # (s_m, s_m+1)
            plus = (t[:, 0:1] * hop[0] + t[:, 1:2] * hop[1])
            minus = (t[:, 0:1] * hop[0] - t[:, 1:2] * hop[1])
            wp = float(np.sum(np.abs(plus) ** 2))
            wm = float(np.sum(np.abs(minus) ** 2))
            t = plus if rng.random() * (wp + wm) < wp else minus
            t = t / np.linalg.norm(t)
        total += float(_pure_concurrences(t / np.linalg.norm(t)))
    return total / samples


def localize_entanglement(g: InteractionGraph, i: int, j: int,
                          samples: int = 2048, rng=None, path=None,
                          max_exact: int = 20) -> LocalizationResult:
    """Average concurrence left on (i, j) after measuring everyone else.

    The protocol measures all off-path particles of the component in
    the z basis and the interior of a connecting path in the x basis
    ``(|0> +/- |1>)/sqrt(2)``, then averages the concurrence of the
    resulting two-qubit pure states over measurement outcomes.  The
    returned value is a lower bound on the localizable entanglement
    (the protocol makes no attempt at outcome-dependent optimization).

    z-measured particles are removed from the graph instead of being
    simulated: each z outcome turns their couplings into diagonal
    single-qubit unitaries on the survivors, which cannot change the
    concurrence, and both outcomes are equally likely.  Only the path
    subgraph is ever instantiated, so the component may be huge.

    Parameters
    ----------
    path : sequence of int, optional
        Explicit measurement path from i to j.  Defaults to a shortest
        path in the effective-edge graph.
    samples : int
        Branch samples when the path is longer than ``max_exact``
        (otherwise all branches are enumerated exactly).

    Returns
    -------
    LocalizationResult
        ``connected=False`` (and concurrence 0) when no path exists.
    """
    if path is None:
        path = g.shortest_path(i, j)
        if path is None:
            return LocalizationResult(0.0, False, (), "disconnected", 0)
    else:
        path = [int(q) for q in path]
        if path[0] != i or path[-1] != j or len(set(path)) != len(path):
            raise ValueError("path must run from i to j without repeats")
    block = g.cross_block(path, path)
    length = len(path)
    if length <= max_exact:
        value, n_branches = _localize_exact(block)
        return LocalizationResult(value, True, tuple(path), "exact", n_branches)
    if rng is None:
        rng = np.random.default_rng()
    chordal = np.triu(block, 2)
    if np.any(chordal != 0.0):
        raise ValueError("monte-carlo localization requires a chord-free path")
    value = _localize_monte_carlo(block, samples, rng)
    return LocalizationResult(value, True, tuple(path), "monte_carlo", samples)


def export_density_matrix(rdm: ReducedDensityMatrix) -> dict:
    """JSON-ready dict: dimension, subset and row-major (re, im) pairs."""
    flat = [[float(v.real), float(v.imag)] for v in rdm.matrix.ravel()]
    return {"dim": rdm.dim, "subset": list(rdm.subset), "entries": flat}


def import_density_matrix(data: dict) -> ReducedDensityMatrix:
    dim = int(data["dim"])
    raw = np.array([complex(re, im) for re, im in data["entries"]])
    return ReducedDensityMatrix(matrix=raw.reshape(dim, dim),
                                subset=tuple(data["subset"]))
