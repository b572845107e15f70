"""Accumulated-phase interaction graphs.

The joint quantum state of a gas of Ising-coupled qubits is fully
determined by the symmetric matrix of pairwise phases picked up during
collisions.  This module stores that matrix and answers the graph
queries (edge presence, connectivity, clusters, spanning distances)
that translate directly into entanglement statements: two groups of
particles are entangled exactly when an effective edge crosses the cut,
and entanglement can be localized between two particles exactly when a
path connects them.

A phase that is an exact multiple of 2*pi is a no-op unitary, so edge
presence is tested modulo 2*pi within ``PHASE_TOL``.  Raw phases are
stored unreduced so that coherent accumulation over repeated collisions
stays representable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

TWO_PI = 2.0 * np.pi

#: Absolute tolerance for deciding that a phase is a multiple of 2*pi.
PHASE_TOL = 1e-12

#: Version tag of the JSON snapshot schema.
SNAPSHOT_SCHEMA = 1


def effective_phase_distance(phases):
    """Distance of each phase from the nearest multiple of 2*pi."""
    d = np.mod(phases, TWO_PI)
    return np.minimum(d, TWO_PI - d)


def is_effective(phases):
    """Boolean mask of phases that act nontrivially (mod 2*pi)."""
    return effective_phase_distance(np.asarray(phases, dtype=float)) > PHASE_TOL


class UnionFind:
    """Array-based union-find with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = np.arange(n, dtype=np.int64)
        self.size = np.ones(n, dtype=np.int64)
        self.n_components = n

    def find(self, a: int) -> int:
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return int(a)

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.n_components -= 1
        return True

    def groups(self) -> list[list[int]]:
        roots = np.array([self.find(i) for i in range(len(self.parent))])
        out = {}
        for i, r in enumerate(roots):
            out.setdefault(int(r), []).append(i)
        return sorted(out.values(), key=lambda g: g[0])


@dataclass(frozen=True, init=False)
class Partition:
    """A bipartition of the particles into a subset and its complement.

    Parameters
    ----------
    n_total : int
        Total number of particles.
    members : tuple of int
        Sorted, unique indices of the chosen subset; at least one.
    """

    n_total: int
    members: tuple[int, ...]

    def __init__(self, n_total, members):
        members = tuple(sorted(int(m) for m in members))
        if not members:
            raise ValueError("partition needs at least one member")
        if len(set(members)) != len(members):
            raise ValueError("partition members must be unique")
        if members[0] < 0 or members[-1] >= n_total:
            raise ValueError(f"partition members out of range [0, {n_total})")
        object.__setattr__(self, "n_total", int(n_total))
        object.__setattr__(self, "members", members)

    @cached_property
    def complement(self) -> tuple[int, ...]:
        mask = np.ones(self.n_total, dtype=bool)
        mask[list(self.members)] = False
        return tuple(np.nonzero(mask)[0].tolist())

    @property
    def n_a(self) -> int:
        return len(self.members)

    @property
    def n_b(self) -> int:
        return self.n_total - len(self.members)


def as_partition(p, n_total) -> Partition:
    """Coerce a Partition or an index sequence into a Partition."""
    if isinstance(p, Partition):
        if p.n_total != n_total:
            raise ValueError("partition sized for a different particle count")
        return p
    return Partition(n_total, p)


class InteractionGraph:
    """Symmetric matrix of accumulated pairwise interaction phases.

    The graph is the complete description of the quantum state of the
    gas; all state and entanglement computations read from it.

    Parameters
    ----------
    n_particles : int
        Number of particles (graph vertices).
    tracked : sequence of int, optional
        If given, only phase rows of these particles are stored.  Pairs
        between two untracked particles are discarded on update; this
        keeps memory at O(len(tracked) * n) for very large gases where
        only a few probe particles are analyzed.  Connectivity queries
        require the full graph and raise in tracked mode.
    """

    def __init__(self, n_particles: int, tracked=None):
        if n_particles < 1:
            raise ValueError("need at least one particle")
        self.n = int(n_particles)
        if tracked is None:
            self._tracked = None
            self._phases = np.zeros((self.n, self.n))
            self._uf = UnionFind(self.n)
            self._uf_stale = False
        else:
            idx = np.unique(np.asarray(tracked, dtype=np.int64))
            if idx.size == 0:
                raise ValueError("tracked set must not be empty")
            if idx[0] < 0 or idx[-1] >= self.n:
                raise ValueError("tracked indices out of range")
            self._tracked = idx
            self._slot = {int(k): i for i, k in enumerate(idx)}
            self._rows = np.zeros((idx.size, self.n))
            self._uf = None
            self._uf_stale = True

    # -- basic structure ------------------------------------------------

    @property
    def tracked(self):
        return None if self._tracked is None else self._tracked.copy()

    def is_tracked(self, k: int) -> bool:
        return self._tracked is None or int(k) in self._slot

    def _check_pair(self, k, l):
        k, l = int(k), int(l)
        if k == l:
            raise ValueError("no self-interaction: indices must differ")
        if not (0 <= k < self.n and 0 <= l < self.n):
            raise ValueError(f"index out of range [0, {self.n})")
        return k, l

    def add_phase(self, k: int, l: int, delta: float) -> None:
        """Accumulate interaction phase ``delta`` (radians) on pair (k, l).

        Phases add; nothing is reduced modulo 2*pi in storage.
        """
        k, l = self._check_pair(k, l)
        delta = float(delta)
        if not np.isfinite(delta):
            raise ValueError("phase increment must be finite")
        if self._tracked is None:
            before = is_effective(self._phases[k, l])
            self._phases[k, l] += delta
            self._phases[l, k] += delta
            after = is_effective(self._phases[k, l])
            self._note_edge_change(k, l, before, after)
        else:
            sk = self._slot.get(k)
            sl = self._slot.get(l)
            if sk is None and sl is None:
                return  # pair outside the tracked row set
            if sk is not None:
                self._rows[sk, l] += delta
            if sl is not None:
                self._rows[sl, k] += delta

    def add_phases(self, ks, ls, deltas) -> None:
        """Vectorized :meth:`add_phase` over index arrays.

        Repeated pairs within one call accumulate.  In tracked mode,
        untracked-untracked pairs are dropped.
        """
        ks = np.asarray(ks, dtype=np.int64)
        ls = np.asarray(ls, dtype=np.int64)
        deltas = np.broadcast_to(np.asarray(deltas, dtype=float), ks.shape)
        if ks.size == 0:
            return
        if np.any(ks == ls):
            raise ValueError("no self-interaction: indices must differ")
        if ks.min() < 0 or ls.min() < 0 or max(ks.max(), ls.max()) >= self.n:
            raise ValueError(f"index out of range [0, {self.n})")
        if not np.all(np.isfinite(deltas)):
            raise ValueError("phase increments must be finite")
        if self._tracked is None:
            before = is_effective(self._phases[ks, ls])
            np.add.at(self._phases, (ks, ls), deltas)
            np.add.at(self._phases, (ls, ks), deltas)
            after = is_effective(self._phases[ks, ls])
            if np.any(before & ~after):
                self._uf_stale = True
            if not self._uf_stale:
                for k, l in zip(ks[~before & after], ls[~before & after]):
                    self._uf.union(int(k), int(l))
        else:
            in_rows = np.isin(ks, self._tracked)
            in_cols = np.isin(ls, self._tracked)
            for sel, rows, cols in ((in_rows, ks, ls), (in_cols, ls, ks)):
                if np.any(sel):
                    slots = np.array([self._slot[int(r)] for r in rows[sel]])
                    np.add.at(self._rows, (slots, cols[sel]), deltas[sel])

    def _note_edge_change(self, k, l, before, after):
        if before and not after:
            self._uf_stale = True
        elif not before and after and not self._uf_stale:
            self._uf.union(k, l)

    # -- phase access ----------------------------------------------------

    def phase(self, k: int, l: int) -> float:
        k, l = self._check_pair(k, l)
        if self._tracked is None:
            return float(self._phases[k, l])
        sk = self._slot.get(k)
        if sk is not None:
            return float(self._rows[sk, l])
        sl = self._slot.get(l)
        if sl is not None:
            return float(self._rows[sl, k])
        raise RuntimeError("pair not stored: neither particle is tracked")

    def row(self, k: int) -> np.ndarray:
        """Phase row of particle ``k`` against all particles (copy)."""
        k = int(k)
        if self._tracked is None:
            return self._phases[k].copy()
        sk = self._slot.get(k)
        if sk is None:
            raise RuntimeError(f"particle {k} is not tracked")
        return self._rows[sk].copy()

    def cross_block(self, rows, cols) -> np.ndarray:
        """Phase block Gamma[rows, cols] as a (len(rows), len(cols)) array."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        if self._tracked is None:
            return self._phases[np.ix_(rows, cols)].copy()
        slots = []
        for r in rows:
            s = self._slot.get(int(r))
            if s is None:
                raise RuntimeError(f"particle {int(r)} is not tracked")
            slots.append(s)
        return self._rows[np.ix_(slots, cols)].copy()

    def phases_matrix(self) -> np.ndarray:
        """Dense copy of the full phase matrix (full mode only)."""
        if self._tracked is not None:
            raise RuntimeError("full phase matrix unavailable in tracked mode")
        return self._phases.copy()

    def has_edge(self, k: int, l: int) -> bool:
        """True iff the pair's phase acts nontrivially (mod 2*pi)."""
        return bool(is_effective(self.phase(k, l)))

    def neighbors(self, k: int) -> np.ndarray:
        mask = is_effective(self.row(k))
        mask[int(k)] = False
        return np.nonzero(mask)[0]

    # -- connectivity ----------------------------------------------------

    def _require_full(self, what):
        if self._tracked is not None:
            raise RuntimeError(f"{what} requires the full graph, "
                               "not a tracked-row restriction")

    def _adjacency(self) -> np.ndarray:
        mask = is_effective(self._phases)
        np.fill_diagonal(mask, False)
        return mask

    def _fresh_union_find(self) -> UnionFind:
        uf = UnionFind(self.n)
        ks, ls = np.nonzero(np.triu(self._adjacency(), 1))
        for k, l in zip(ks, ls):
            uf.union(int(k), int(l))
        return uf

    def _union_find(self) -> UnionFind:
        if self._uf_stale:
            self._uf = self._fresh_union_find()
            self._uf_stale = False
        return self._uf

    def path_exists(self, i: int, j: int, method: str = "unionfind") -> bool:
        """True iff particles ``i`` and ``j`` are in one connected component.

        ``method='scan'`` runs a direct O(N^2) breadth-first reachability
        scan over the adjacency mask; it is kept as an independent
        cross-check of the incrementally maintained union-find.
        """
        i, j = self._check_pair(i, j)
        self._require_full("path_exists")
        if method == "unionfind":
            uf = self._union_find()
            return uf.find(i) == uf.find(j)
        if method == "scan":
            adj = self._adjacency()
            seen = np.zeros(self.n, dtype=bool)
            seen[i] = True
            frontier = [i]
            while frontier:
                nxt = adj[frontier].any(axis=0) & ~seen
                if nxt[j]:
                    return True
                seen |= nxt
                frontier = list(np.nonzero(nxt)[0])
            return bool(seen[j])
        raise ValueError(f"unknown method {method!r}")

    def connected_components(self, method: str = "unionfind") -> list[list[int]]:
        """Disjoint clusters of particles, ordered by smallest member.

        Singletons are included, so the clusters cover all particles.
        """
        self._require_full("connected_components")
        if method == "unionfind":
            return self._union_find().groups()
        if method == "scan":
            return self._fresh_union_find().groups()
        raise ValueError(f"unknown method {method!r}")

    def shortest_path(self, i: int, j: int) -> list[int] | None:
        """A shortest path of particles from ``i`` to ``j``, or None."""
        i, j = self._check_pair(i, j)
        self._require_full("shortest_path")
        adj = self._adjacency()
        prev = np.full(self.n, -1, dtype=np.int64)
        seen = np.zeros(self.n, dtype=bool)
        seen[i] = True
        frontier = [i]
        while frontier and not seen[j]:
            nxt = []
            for u in frontier:
                for v in np.nonzero(adj[u] & ~seen)[0]:
                    seen[v] = True
                    prev[v] = u
                    nxt.append(int(v))
            frontier = nxt
        if not seen[j]:
            return None
        path = [j]
        while path[-1] != i:
            path.append(int(prev[path[-1]]))
        return path[::-1]

    def is_entangled_partition(self, p) -> bool:
        """True iff the state is entangled across the cut A vs complement.

        Holds exactly when some effective edge crosses the cut, which is
        equivalent to the reduced state of A having rank above one.
        """
        self._require_full("is_entangled_partition")
        p = as_partition(p, self.n)
        if p.n_b == 0:
            return False
        block = self._phases[np.ix_(p.members, p.complement)]
        return bool(np.any(is_effective(block)))

    def max_entangled_distance(self, positions, dims=None) -> int:
        """Largest lattice distance between same-cluster particles.

        Distance is Manhattan, with periodic wrap-around when ``dims``
        (the lattice extents) is given.  Returns 0 when every particle
        is a singleton cluster.
        """
        self._require_full("max_entangled_distance")
        pos = np.asarray(positions)
        if pos.shape[0] != self.n:
            raise ValueError("need one position per particle")
        best = 0
        for comp in self.connected_components():
            if len(comp) < 2:
                continue
            p = pos[comp]
            diff = np.abs(p[:, None, :] - p[None, :, :])
            if dims is not None:
                extent = np.asarray(dims)
                diff = np.minimum(diff, extent[None, None, :] - diff)
            best = max(best, int(diff.sum(axis=2).max()))
        return best

    # -- snapshots ---------------------------------------------------------

    def copy(self) -> "InteractionGraph":
        g = InteractionGraph.__new__(InteractionGraph)
        g.n = self.n
        g._tracked = None if self._tracked is None else self._tracked.copy()
        if self._tracked is None:
            g._phases = self._phases.copy()
            g._uf = self._fresh_union_find()
            g._uf_stale = False
        else:
            g._slot = dict(self._slot)
            g._rows = self._rows.copy()
            g._uf = None
            g._uf_stale = True
        return g

    def to_json_dict(self) -> dict:
        """Snapshot as a JSON-ready dict: particle count plus phase triples.

        Schema: ``{"schema": 1, "n": N, "tracked": [...] | None,
        "edges": [[k, l, phase], ...]}`` listing each stored pair with a
        nonzero raw phase exactly once (k < l for full graphs).
        """
        edges = []
        if self._tracked is None:
            ks, ls = np.nonzero(np.triu(self._phases, 1))
            edges = [[int(k), int(l), float(self._phases[k, l])]
                     for k, l in zip(ks, ls)]
            tracked = None
        else:
            seen = set()
            for s, k in enumerate(self._tracked):
                for l in np.nonzero(self._rows[s])[0]:
                    pair = (min(int(k), int(l)), max(int(k), int(l)))
                    if pair not in seen:
                        seen.add(pair)
                        edges.append([pair[0], pair[1],
                                      float(self._rows[s, l])])
            tracked = [int(t) for t in self._tracked]
        return {"schema": SNAPSHOT_SCHEMA, "n": self.n,
                "tracked": tracked, "edges": edges}

    @classmethod
    def from_json_dict(cls, data: dict) -> "InteractionGraph":
        if data.get("schema") != SNAPSHOT_SCHEMA:
            raise ValueError(f"unsupported snapshot schema {data.get('schema')!r}")
        g = cls(data["n"], tracked=data.get("tracked"))
        for k, l, phi in data["edges"]:
            g.add_phase(int(k), int(l), float(phi))
        return g

    def save_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh)

    @classmethod
    def load_json(cls, path) -> "InteractionGraph":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))
