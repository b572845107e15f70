"""Entanglement measures on reduced density matrices.

Entropies are in bits (log base 2) throughout.  For pure global states
the von Neumann entropy of a subset's reduced state quantifies its
entanglement with the rest; the order-2 Renyi entropy is a cheap lower
bound on it, and Wootters' concurrence covers the two-qubit case.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import InteractionGraph, Partition, as_partition, is_effective
from .states import EIG_FLOOR, InvalidStateError, reduced_spectrum

PAULIS = {
    "x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}
_SYSY = np.kron(PAULIS["y"], PAULIS["y"])


def _spectrum(rho) -> np.ndarray:
    lam = np.linalg.eigvalsh(np.asarray(rho))
    if lam.min() < -EIG_FLOOR:
        raise InvalidStateError(
            f"negative eigenvalue {lam.min():.3e}: not a density matrix")
    return np.clip(lam, 0.0, None)


def entropy_from_spectrum(lam: np.ndarray) -> float:
    """Shannon entropy in bits with the 0*log(0) = 0 convention.

    Eigenvalue dust below 1e-14 is treated as an exact zero; it could
    contribute at most ~1e-12 bits.
    """
    lam = lam[lam > 1e-14]
    return float(-np.sum(lam * np.log2(lam)))


def von_neumann_entropy(rho) -> float:
    """Entanglement entropy -sum(lam * log2(lam)) of a reduced state."""
    return entropy_from_spectrum(_spectrum(rho))


def renyi_entropy(rho, q: float) -> float:
    """Order-q Renyi entropy log2(sum(lam**q)) / (1 - q), q > 0, q != 1.

    Non-increasing in q; the q -> 1 limit is the von Neumann entropy,
    so in particular ``renyi_entropy(rho, 2) <= von_neumann_entropy(rho)``.
    """
    if not q > 0.0 or abs(q - 1.0) < 1e-12:
        raise ValueError("Renyi order must be positive and different from 1")
    lam = _spectrum(rho)
    lam = lam[lam > 0.0]
    return float(np.log2(np.sum(lam ** q)) / (1.0 - q))


def renyi2_from_purity(purity: float) -> float:
    return float(-np.log2(purity))


def meyer_wallach(g: InteractionGraph) -> float:
    """Global entanglement measure 2 * (1 - mean single-particle purity).

    Zero exactly for the product state, one when every single-particle
    marginal is maximally mixed.
    """
    gamma = g.phases_matrix()
    abs_c = np.prod(np.abs(np.cos(0.5 * gamma)), axis=1)
    purity = 0.5 * (1.0 + abs_c ** 2)
    return float(2.0 * (1.0 - purity.mean()))


def wootters_spectrum(rho) -> np.ndarray:
    """Descending square-rooted spectrum of rho * (sy x sy) rho* (sy x sy)."""
    rho = np.asarray(rho)
    if rho.shape != (4, 4):
        raise ValueError("expected a two-qubit (4x4) density matrix")
    r = rho @ _SYSY @ rho.conj() @ _SYSY
    lam = np.linalg.eigvals(r).real
    lam = np.sqrt(np.clip(lam, 0.0, None))
    return np.sort(lam)[::-1]


def concurrence(rho) -> float:
    """Wootters concurrence max(0, l1 - l2 - l3 - l4) of a two-qubit state."""
    lam = wootters_spectrum(rho)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def concurrence_of_assistance(rho) -> float:
    """All-plus-signs variant l1 + l2 + l3 + l4; an upper bound on the
    entanglement that outside parties can steer onto the pair."""
    return float(np.sum(wootters_spectrum(rho)))


def classical_correlation(rho) -> float:
    """Largest two-point correlation |<a b> - <a><b>| over Pauli pairs.

    The optimization set is restricted to the nine products of x, y, z
    measurements on each side; runs surface this restriction in their
    output metadata.
    """
    rho = np.asarray(rho)
    if rho.shape != (4, 4):
        raise ValueError("expected a two-qubit (4x4) density matrix")
    eye = np.eye(2, dtype=complex)
    best = 0.0
    for a in "xyz":
        pa = PAULIS[a]
        mean_a = np.trace(rho @ np.kron(pa, eye)).real
        for b in "xyz":
            pb = PAULIS[b]
            mean_b = np.trace(rho @ np.kron(eye, pb)).real
            joint = np.trace(rho @ np.kron(pa, pb)).real
            best = max(best, abs(joint - mean_a * mean_b))
    return float(best)


def localizable_bounds(rho) -> tuple[float, float]:
    """(lower, upper) bracket for the localizable entanglement of a pair.

    Lower: best classical two-point correlation over Pauli pairs.
    Upper: concurrence of assistance.
    """
    return classical_correlation(rho), concurrence_of_assistance(rho)


@dataclass(frozen=True)
class EntanglementReport:
    """Bipartite entanglement summary for one cut of the gas."""

    von_neumann: float
    renyi2: float
    partition: Partition
    connected: bool


def entanglement_report(g: InteractionGraph, p) -> EntanglementReport:
    """Entropies of a cut plus the graph-side connectivity criterion.

    ``connected`` is the edge test across the cut; it matches
    ``von_neumann > 0`` exactly for generic phases.
    """
    p = as_partition(p, g.n)
    lam = reduced_spectrum(g, p)
    connected = False
    if p.n_b > 0:
        block = g.cross_block(p.members, p.complement)
        connected = bool(np.any(is_effective(block)))
    s2 = renyi2_from_purity(float(np.sum(lam ** 2)))
    return EntanglementReport(
        von_neumann=entropy_from_spectrum(lam),
        renyi2=s2, partition=p, connected=connected)


def subset_entropy(g: InteractionGraph, subset) -> float:
    """Von Neumann entanglement entropy of a particle subset, in bits."""
    return entropy_from_spectrum(reduced_spectrum(g, subset))
