"""Lattice gas: exclusion hopping plus nearest-neighbor phase pickup.

Background particles live on a periodic M1 x M2 lattice, at most one
per site, and attempt a hop to a uniformly random nearest neighbor with
probability eta*dt per step; hops onto occupied sites are rejected.
Every nearest-neighbor pair accumulates coupling*dt of interaction
phase per step.

Probe particles live on a separate layer: they never block background
hops, do not interact with each other, and couple only to the
background particle sharing their site (coupling*dt per step), or, for
probes dragged quickly across the lattice, with a fixed phase deposited
on the occupant of every site they cross.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .entanglement import subset_entropy
from .graph import InteractionGraph
from .series import EnsembleSeries

_OFFSETS = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]], dtype=np.int64)

#: Axis along which dragged probes advance (the second lattice axis).
DRAG_AXIS = 1


@dataclass(frozen=True)
class ProbeSpec:
    """Probe layer description.

    mode "hopping": free random walk at rate ``hop_rate`` (0 = pinned).
    mode "dragged": deterministic motion at ``speed`` sites per unit
    time along the second lattice axis.  If ``crossing_phase`` is set
    the probe is in the fast-drag regime: it deposits that fixed phase
    on the occupant of every site crossed instead of accruing
    coupling*dt while co-located.
    """

    positions: tuple
    mode: str = "hopping"
    hop_rate: float = 0.0
    speed: float = 0.0
    crossing_phase: float | None = None

    def __post_init__(self):
        if self.mode not in ("hopping", "dragged"):
            raise ValueError("probe mode must be 'hopping' or 'dragged'")
        if self.hop_rate < 0.0 or self.speed < 0.0:
            raise ValueError("probe rates must be nonnegative")
        object.__setattr__(self, "positions",
                           tuple((int(r), int(c)) for r, c in self.positions))

    @property
    def count(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class LatticeConfig:
    """Lattice gas parameters.

    Attributes
    ----------
    dims : (int, int)
        Lattice extents (M1, M2); both axes periodic.
    n_particles : int
        Background particles; filling = n_particles / (M1 * M2) <= 1.
    hop_rate : float
        Background hop attempt rate eta.
    coupling : float
        Phase accumulation rate g for nearest-neighbor background pairs
        and co-located probe-background pairs.
    dt : float
        Time step; hop_rate * dt must stay at or below 0.5.
    probes : ProbeSpec, optional
    """

    dims: tuple[int, int]
    n_particles: int
    hop_rate: float
    coupling: float
    dt: float = 0.1
    probes: ProbeSpec | None = None

    def __post_init__(self):
        object.__setattr__(self, "dims",
                           (int(self.dims[0]), int(self.dims[1])))
        m1, m2 = self.dims
        if m1 < 1 or m2 < 1:
            raise ValueError("lattice extents must be positive")
        if not 0 < self.n_particles <= m1 * m2:
            raise ValueError("0 < n_particles <= number of sites required")
        if self.hop_rate < 0.0 or self.coupling < 0.0:
            raise ValueError("rates must be nonnegative")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.hop_rate * self.dt > 0.5:
            raise ValueError("hop_rate * dt must not exceed 0.5")

    @property
    def filling(self) -> float:
        return self.n_particles / (self.dims[0] * self.dims[1])

    @property
    def n_probes(self) -> int:
        return 0 if self.probes is None else self.probes.count

    @property
    def n_total(self) -> int:
        """Background plus probes; probe k has graph index n_particles + k."""
        return self.n_particles + self.n_probes

    def probe_ids(self) -> list[int]:
        return list(range(self.n_particles, self.n_total))

    @classmethod
    def from_dict(cls, data: dict) -> "LatticeConfig":
        data = dict(data)
        if data.get("probes") is not None:
            data["probes"] = ProbeSpec(**data["probes"])
        data["dims"] = tuple(data["dims"])
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "LatticeConfig":
        from .boltzmann import _read_config_file
        return cls.from_dict(_read_config_file(path))

    def with_probes(self, probes: ProbeSpec | None) -> "LatticeConfig":
        return replace(self, probes=probes)


def probe_pair(dims, separation: int, mode: str = "hopping",
               axis: int = DRAG_AXIS, trailing: bool = False,
               **kwargs) -> ProbeSpec:
    """Two probes around the lattice center at the given separation.

    ``trailing`` places the second probe behind the first along the
    axis (useful for dragged probes, where it then crosses the same
    sites with a time lag); otherwise it is placed ahead.
    """
    m1, m2 = int(dims[0]), int(dims[1])
    base = [m1 // 2, m2 // 2]
    other = list(base)
    step = -separation if trailing else separation
    other[axis] = (other[axis] + step) % (m1, m2)[axis]
    return ProbeSpec(positions=(tuple(base), tuple(other)), mode=mode,
                     **kwargs)


@dataclass
class LatticeState:
    """Mutable kinematic state: occupancy grid, positions, probes, clock."""

    occupancy: np.ndarray          # (M1, M2), particle index or -1
    positions: np.ndarray          # (N, 2)
    probe_positions: np.ndarray    # (P, 2)
    time: float = 0.0
    n_steps: int = 0

    def check_consistent(self):
        n = self.positions.shape[0]
        occ_ids = self.occupancy[self.occupancy >= 0]
        if sorted(occ_ids.tolist()) != list(range(n)):
            raise AssertionError("occupancy and particle list disagree")
        if not np.all(self.occupancy[self.positions[:, 0],
                                     self.positions[:, 1]] == np.arange(n)):
            raise AssertionError("positions and occupancy disagree")


def initial_state(cfg: LatticeConfig, rng) -> LatticeState:
    """Uniformly random exclusion-respecting background placement."""
    m1, m2 = cfg.dims
    sites = rng.choice(m1 * m2, size=cfg.n_particles, replace=False)
    pos = np.stack([sites // m2, sites % m2], axis=1).astype(np.int64)
    occ = np.full((m1, m2), -1, dtype=np.int64)
    occ[pos[:, 0], pos[:, 1]] = np.arange(cfg.n_particles)
    if cfg.probes is not None:
        ppos = np.array(cfg.probes.positions, dtype=np.int64)
        ppos[:, 0] %= m1
        ppos[:, 1] %= m2
    else:
        ppos = np.zeros((0, 2), dtype=np.int64)
    return LatticeState(occupancy=occ, positions=pos, probe_positions=ppos)


def new_graph(cfg: LatticeConfig, tracked=None) -> InteractionGraph:
    """Interaction graph covering background particles plus probes."""
    return InteractionGraph(cfg.n_total, tracked=tracked)


def hop_step(state: LatticeState, cfg: LatticeConfig, g: InteractionGraph,
             rng) -> None:
    """One time step: background hops, probe motion, phase accumulation.

    Hops are resolved simultaneously against the pre-step occupancy:
    a target must be empty before the step and claimed by exactly one
    mover (ties are broken uniformly at random, losers stay).  Swap
    moves therefore never occur and exclusion is preserved exactly.

    In tracked-row graph mode, background-background phases are
    accumulated only for pairs involving a tracked particle; probe
    couplings are always accumulated.
    """
    m1, m2 = cfg.dims
    occ = state.occupancy
    pos = state.positions
    n = cfg.n_particles
    dims_arr = np.array([m1, m2], dtype=np.int64)

    if cfg.hop_rate > 0.0:
        movers = np.nonzero(rng.random(n) < cfg.hop_rate * cfg.dt)[0]
        if movers.size:
            step = _OFFSETS[rng.integers(0, 4, movers.size)]
            tgt = (pos[movers] + step) % dims_arr
            flat = tgt[:, 0] * m2 + tgt[:, 1]
            free = occ.reshape(-1)[flat] < 0
            movers, tgt, flat = movers[free], tgt[free], flat[free]
            if movers.size:
                order = rng.permutation(movers.size)
                _, first = np.unique(flat[order], return_index=True)
                win = order[first]
                movers, tgt = movers[win], tgt[win]
                occ[pos[movers, 0], pos[movers, 1]] = -1
                occ[tgt[:, 0], tgt[:, 1]] = movers
                pos[movers] = tgt

    probes = cfg.probes
    crossings = []
    if probes is not None:
        for pi in range(probes.count):
            if probes.mode == "hopping":
                if probes.hop_rate > 0.0 and \
                        rng.random() < probes.hop_rate * cfg.dt:
                    d = _OFFSETS[rng.integers(0, 4)]
                    state.probe_positions[pi] = \
                        (state.probe_positions[pi] + d) % dims_arr
            elif probes.speed > 0.0:
                # integer step count, not accumulated float time: keeps
                # speed*dt = 1/k crossings exactly periodic
                before = int(np.floor(probes.speed * cfg.dt * state.n_steps
                                      + 1e-9))
                after = int(np.floor(probes.speed * cfg.dt * (state.n_steps + 1)
                                     + 1e-9))
                adv = after - before
                if adv > 0:
                    x0 = state.probe_positions[pi, DRAG_AXIS]
                    xs = (x0 + 1 + np.arange(adv, dtype=np.int64)) % m2
                    state.probe_positions[pi, DRAG_AXIS] = xs[-1]
                    crossings.append((pi, xs))

    phase = cfg.coupling * cfg.dt
    tracked = g.tracked
    if tracked is None:
        if phase != 0.0:
            for axis in (0, 1):
                nb = np.roll(occ, -1, axis=axis)
                mask = (occ >= 0) & (nb >= 0)
                if mask.any():
                    g.add_phases(occ[mask], nb[mask], phase)
    else:
        tb = tracked[tracked < n]
        if tb.size and phase != 0.0:
            neigh = (pos[tb][:, None, :] + _OFFSETS[None, :, :]) % dims_arr
            occn = occ[neigh[..., 0], neigh[..., 1]]
            src = np.broadcast_to(tb[:, None], occn.shape)
            hit = occn >= 0
            if hit.any():
                a, b = src[hit], occn[hit]
                # a tracked-tracked neighbor pair shows up from both
                # sides; keep one orientation so the phase adds once
                dup = np.isin(b, tb)
                keep = ~dup | (a < b)
                if keep.any():
                    g.add_phases(a[keep], b[keep], phase)

    if probes is not None:
        if probes.mode == "dragged" and probes.crossing_phase is not None:
            for pi, xs in crossings:
                row = state.probe_positions[pi, 0]
                occupants = occ[row, xs]
                hit = occupants >= 0
                if hit.any():
                    g.add_phases(np.full(int(hit.sum()), n + pi),
                                 occupants[hit], probes.crossing_phase)
        elif phase != 0.0:
            for pi in range(probes.count):
                r, c = state.probe_positions[pi]
                occupant = occ[r, c]
                if occupant >= 0:
                    g.add_phase(n + pi, occupant, phase)

    state.time += cfg.dt
    state.n_steps += 1


def sample_steps(cfg: LatticeConfig, t_max: float, n_samples: int):
    """Step indices (including 0) at which observables are recorded."""
    n_steps = max(1, int(round(t_max / cfg.dt)))
    every = max(1, n_steps // max(1, n_samples))
    steps = list(range(0, n_steps + 1, every))
    if steps[-1] != n_steps:
        steps.append(n_steps)
    return np.array(steps, dtype=np.int64)


def simulate(cfg: LatticeConfig, t_max: float, rng, measure, tracked=None,
             n_samples: int = 60):
    """Run one realization, applying ``measure(g, state)`` on a time grid.

    Returns (times, list of measurement results).
    """
    steps = sample_steps(cfg, t_max, n_samples)
    state = initial_state(cfg, rng)
    g = new_graph(cfg, tracked=tracked)
    results = []
    take = set(steps.tolist())
    if 0 in take:
        results.append(measure(g, state))
    for step in range(1, int(steps[-1]) + 1):
        hop_step(state, cfg, g, rng)
        if step in take:
            results.append(measure(g, state))
    return steps * cfg.dt, results


@dataclass(frozen=True)
class ClusterStats:
    """Cluster growth summary over an ensemble of lattice histories."""

    largest_cluster: EnsembleSeries
    max_distance: EnsembleSeries
    t0_values: np.ndarray
    t0_mean: float
    t0_stderr: float


def cluster_timeseries(cfg: LatticeConfig, t_max: float, ensemble: int, rng,
                       n_samples: int = 60,
                       connected_fraction: float = 0.95) -> ClusterStats:
    """Largest-cluster size and maximal entangled distance versus time.

    Also estimates t0, the first sampled time at which at least
    ``connected_fraction`` of the particles sit in one cluster (NaN for
    realizations that never get there).
    """
    if cfg.probes is not None:
        raise ValueError("cluster statistics run without probes")

    def measure(g, state):
        comps = g.connected_components()
        largest = max(len(c) for c in comps)
        dist = g.max_entangled_distance(state.positions, dims=cfg.dims)
        return largest, dist

    sizes, dists = [], []
    times = None
    for _ in range(ensemble):
        times, res = simulate(cfg, t_max, rng, measure, n_samples=n_samples)
        sizes.append([r[0] for r in res])
        dists.append([r[1] for r in res])
    sizes = np.array(sizes, dtype=float)
    dists = np.array(dists, dtype=float)
    reached = sizes >= connected_fraction * cfg.n_particles
    t0 = np.where(reached.any(axis=1), times[reached.argmax(axis=1)], np.nan)
    ok = ~np.isnan(t0)
    t0_mean = float(np.mean(t0[ok])) if ok.any() else float("nan")
    t0_stderr = (float(np.std(t0[ok], ddof=1) / np.sqrt(ok.sum()))
                 if ok.sum() > 1 else float("nan"))
    meta = {"filling": cfg.filling, "connected_fraction": connected_fraction,
            "distance_metric": "manhattan_periodic"}
    return ClusterStats(
        largest_cluster=EnsembleSeries.from_samples(
            "largest_cluster_size", times, sizes, meta),
        max_distance=EnsembleSeries.from_samples(
            "max_entangled_distance", times, dists, meta),
        t0_values=t0, t0_mean=t0_mean, t0_stderr=t0_stderr)


def block_entropy_timeseries(cfg: LatticeConfig, block_size: int,
                             t_max: float, ensemble: int, rng,
                             n_samples: int = 60) -> EnsembleSeries:
    """Mean entanglement entropy of a random particle block versus time.

    The block is re-drawn uniformly (without replacement) for every
    realization; only its phase rows are tracked, so the gas can be
    large.
    """
    if not 1 <= block_size <= min(12, cfg.n_particles):
        raise ValueError("block size must be in [1, min(12, N)]")
    samples = []
    times = None
    for _ in range(ensemble):
        block = np.sort(rng.choice(cfg.n_particles, size=block_size,
                                   replace=False))
        times, res = simulate(
            cfg, t_max, rng,
            lambda g, state: subset_entropy(g, block),
            tracked=block, n_samples=n_samples)
        samples.append(res)
    meta = {"block_size": block_size, "filling": cfg.filling,
            "block_selection": "uniform_random"}
    return EnsembleSeries.from_samples(f"block_entropy[{block_size}]",
                                       times, np.array(samples), meta)


def probe_entropy_timeseries(cfg: LatticeConfig, t_max: float, ensemble: int,
                             rng, n_samples: int = 60) -> EnsembleSeries:
    """Mean entanglement entropy of the two-probe pair versus time."""
    if cfg.n_probes != 2:
        raise ValueError("exactly two probes required")
    ids = cfg.probe_ids()
    samples = []
    times = None
    for _ in range(ensemble):
        times, res = simulate(
            cfg, t_max, rng,
            lambda g, state: subset_entropy(g, ids),
            tracked=ids, n_samples=n_samples)
        samples.append(res)
    meta = {"filling": cfg.filling, "probe_mode": cfg.probes.mode,
            "probe_hop_rate": cfg.probes.hop_rate}
    return EnsembleSeries.from_samples("probe_entropy", times,
                                       np.array(samples), meta)
