"""Decoherence channels induced on probe particles by the gas.

A set of probes coupled to background particles in a maximally-mixed-
diagonal state (any state with half population in |1> per particle,
which the all-|+> gas satisfies exactly) undergoes a pure dephasing
channel: every computational-basis coherence is multiplied by the
corresponding coherence factor while populations stay put.  Channels
from different collision histories average element-wise.

Correlated collisions make the channel non-trivially structured: if two
probes see identical phase rows, the |01><10| coherence survives
untouched while |11><00| decays at twice the exponent ("super-damped").
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .entanglement import concurrence
from .graph import InteractionGraph, Partition
from .series import EnsembleSeries
from .states import ReducedDensityMatrix, coherence_matrix
from . import lattice as lat

#: Output states are declared inconsistent below this eigenvalue.
CHANNEL_PSD_TOL = 1e-8


class ChannelConsistencyError(RuntimeError):
    """A channel output failed positivity beyond tolerance."""


@dataclass(frozen=True)
class ProbeChannel:
    """Dephasing channel of a probe set, stored as its factor matrix.

    ``factors[s, s']`` multiplies the coherence |s><s'|; the diagonal is
    one, so populations are preserved exactly.
    """

    factors: np.ndarray
    subset: tuple[int, ...]
    time: float = float("nan")
    metadata: dict = field(default_factory=dict)

    @property
    def n_probes(self) -> int:
        return len(self.subset)

    @property
    def dim(self) -> int:
        return self.factors.shape[0]

    @classmethod
    def from_graph(cls, g: InteractionGraph, probes, time=float("nan")):
        """Channel generated by the probes' phase rows against the rest.

        Phases among the probes themselves are internal dynamics, not
        decoherence, and are excluded.
        """
        p = Partition(g.n, probes)
        gamma_ab = g.cross_block(p.members, p.complement)
        return cls(factors=coherence_matrix(gamma_ab), subset=p.members,
                   time=time)

    def factor(self, z) -> complex:
        """Coherence factor for a label z in {-1, 0, 1}**n_probes."""
        z = np.asarray(z, dtype=int)
        s = np.where(z == 1, 1, 0)
        s_prime = np.where(z == -1, 1, 0)
        weights = 1 << np.arange(self.n_probes - 1, -1, -1)
        return complex(self.factors[int(s @ weights), int(s_prime @ weights)])

    def apply(self, rho_in) -> ReducedDensityMatrix:
        return apply_channel(self, rho_in)


def apply_channel(ch: ProbeChannel, rho_in) -> ReducedDensityMatrix:
    """Multiply coherences of ``rho_in`` element-wise by the channel factors.

    Raises
    ------
    ValueError
        On dimension mismatch.
    ChannelConsistencyError
        If the output loses positivity beyond tolerance (cannot happen
        for exactly represented channels; guards averaged data).
    """
    rho = np.asarray(rho_in, dtype=complex)
    if rho.shape != (ch.dim, ch.dim):
        raise ValueError(f"state must be {ch.dim}x{ch.dim}")
    out = ch.factors * rho
    lam_min = float(np.linalg.eigvalsh(out).min())
    if lam_min < -CHANNEL_PSD_TOL:
        raise ChannelConsistencyError(
            f"channel output eigenvalue {lam_min:.3e} below tolerance")
    return ReducedDensityMatrix(matrix=out, subset=ch.subset)


def average_channel(channels) -> ProbeChannel:
    """Element-wise mean channel of an ensemble (equal probe counts)."""
    channels = list(channels)
    if not channels:
        raise ValueError("need at least one channel")
    dim = channels[0].dim
    if any(c.dim != dim for c in channels):
        raise ValueError("channels act on different dimensions")
    mean = np.mean([c.factors for c in channels], axis=0)
    times = np.array([c.time for c in channels], dtype=float)
    t = float(times[0]) if np.all(times == times[0]) else float("nan")
    return ProbeChannel(factors=mean, subset=channels[0].subset, time=t,
                        metadata={"averaged_over": len(channels)})


def markovian_coherence(filling: float, delta_phi: float, steps: int) -> float:
    """Closed-form |C_00,11| for fast-dragged probes, fresh partner model.

    Per time step each probe meets a new background particle with
    probability equal to the filling and picks up ``delta_phi``:
    |nu exp(i dphi/2) cos(dphi/2) + (1 - nu)| ** (2 * steps).
    """
    if not 0.0 <= filling <= 1.0:
        raise ValueError("filling must lie in [0, 1]")
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    per_step = abs(filling * np.exp(0.5j * delta_phi) * np.cos(0.5 * delta_phi)
                   + (1.0 - filling))
    return float(per_step ** (2 * steps))


# -- phase-distribution diagnostics -----------------------------------------


@dataclass(frozen=True)
class EpsilonStats:
    """Sampled distribution of the dephasing phase z . Gamma_AB . s_B.

    ``width`` is the sampled standard deviation sigma; for many weakly
    contributing partners the coherence magnitude approaches
    exp(-sigma**2 / 2).  ``exact_mean``/``exact_width`` follow from the
    independent fair-bit form of s_B.
    """

    samples: np.ndarray
    mean: float
    width: float
    exact_mean: float
    exact_width: float

    def histogram(self, bins=50):
        return np.histogram(self.samples, bins=bins)


def epsilon_distribution(g: InteractionGraph, p, z, n_samples: int,
                         rng) -> EpsilonStats:
    """Sample the phase distribution of one coherence over basis states.

    Draws ``n_samples`` uniform background basis configurations and
    accumulates eps = z . Gamma_AB . s_B.  Diagnostic only: exact
    coherence values always come from the coherence factors.
    """
    if n_samples < 1000:
        raise ValueError("need at least 1000 samples")
    p = Partition(g.n, p) if not isinstance(p, Partition) else p
    z = np.asarray(z, dtype=float)
    if z.shape != (p.n_a,):
        raise ValueError(f"z must have length {p.n_a}")
    gamma_ab = g.cross_block(p.members, p.complement)
    w = z @ gamma_ab
    w = w[w != 0.0]
    if w.size == 0:
        samples = np.zeros(n_samples)
    else:
        bits = rng.integers(0, 2, size=(n_samples, w.size))
        samples = bits @ w
    exact_mean = float(0.5 * w.sum())
    exact_width = float(np.sqrt(0.25 * np.sum(w ** 2)))
    return EpsilonStats(samples=samples, mean=float(samples.mean()),
                        width=float(samples.std()),
                        exact_mean=exact_mean, exact_width=exact_width)


def width_growth_exponent(times, widths, window=(0.1, 1.0)):
    """Fitted growth exponent of sigma(t) on a log-log window.

    Exponent near 0.5 indicates fresh-partner (memoryless) dephasing;
    near 1.0, coherent phase accumulation with the same partners.
    Returns (exponent, label).
    """
    times = np.asarray(times, dtype=float)
    widths = np.asarray(widths, dtype=float)
    keep = (widths >= window[0]) & (widths <= window[1]) & (times > 0.0)
    if keep.sum() < 3:
        raise ValueError("too few points inside the fit window")
    slope = np.polyfit(np.log(times[keep]), np.log(widths[keep]), 1)[0]
    label = "markovian" if abs(slope - 0.5) < abs(slope - 1.0) \
        else "non_markovian"
    return float(slope), label


# -- two-probe initial states and the distance experiment --------------------


def bell_psi_plus() -> np.ndarray:
    """|01> + |10> density matrix; robust to correlated dephasing."""
    v = np.zeros(4, dtype=complex)
    v[1] = v[2] = 1.0 / np.sqrt(2.0)
    return np.outer(v, v.conj())


def bell_phi_plus() -> np.ndarray:
    """|00> + |11> density matrix; fragile under correlated dephasing."""
    v = np.zeros(4, dtype=complex)
    v[0] = v[3] = 1.0 / np.sqrt(2.0)
    return np.outer(v, v.conj())


def cluster_pair() -> np.ndarray:
    """|+0> + |-1> (two-qubit cluster state), weakly distance-dependent."""
    v = np.array([1.0, 1.0, 1.0, -1.0], dtype=complex) / 2.0
    return np.outer(v, v.conj())


PROBE_STATES = {"psi_plus": bell_psi_plus, "phi_plus": bell_phi_plus,
                "cluster": cluster_pair}


def cluster_concurrence_from_bell(c_bell: float) -> float:
    """Concurrence of the cluster pair under independent equal channels,
    given the Bell-state concurrence under the same channels."""
    return float(max(0.0, 0.5 * (-1.0 + 2.0 * np.sqrt(max(c_bell, 0.0))
                                 + c_bell)))


def concurrence_vs_distance(cfg: lat.LatticeConfig, t_o: float, distances,
                            ensemble: int, rng, states=None,
                            n_batches: int = 8) -> list[dict]:
    """Concurrence of probe pairs at time ``t_o`` versus their separation.

    For every distance, two probes are dragged across the gas with the
    second trailing the first along the drag axis, so at distance zero
    they see identical collisions and decorrelate as the gas rearranges
    over the crossing lag.  The headline number is the concurrence of
    the ensemble-averaged output state; the mean of per-realization
    concurrences is reported alongside.  Standard errors come from
    splitting the ensemble into ``n_batches`` batches.

    Returns a list of rows {state, distance, concurrence, stderr,
    mean_concurrence, mean_concurrence_stderr}.
    """
    if cfg.probes is None or cfg.probes.mode != "dragged":
        raise ValueError("config must carry dragged probes")
    if states is None:
        states = {k: f() for k, f in PROBE_STATES.items()}
    m1, m2 = cfg.dims
    crossings = int(np.ceil(cfg.probes.speed * t_o))
    head = (max(m2 - crossings, 0) // 2, m1 // 2)
    rows = []
    for distance in distances:
        lead = (head[1], head[0])
        trail = (head[1], (head[0] - int(distance)) % m2)
        probes = lat.ProbeSpec(positions=(lead, trail), mode="dragged",
                               speed=cfg.probes.speed,
                               crossing_phase=cfg.probes.crossing_phase)
        run_cfg = cfg.with_probes(probes)
        ids = run_cfg.probe_ids()
        factor_stack = []
        for _ in range(ensemble):
            _, res = lat.simulate(
                run_cfg, t_o, rng,
                lambda g, state: ProbeChannel.from_graph(g, ids).factors,
                tracked=ids, n_samples=1)
            factor_stack.append(res[-1])
        factor_stack = np.array(factor_stack)
        batches = np.array_split(np.arange(ensemble), n_batches)
        for name, rho in states.items():
            outs = factor_stack * rho[None, :, :]
            c_avg = concurrence(outs.mean(axis=0))
            c_each = np.array([concurrence(o) for o in outs])
            batch_avg = [concurrence(outs[b].mean(axis=0)) for b in batches
                         if len(b)]
            rows.append({
                "state": name,
                "distance": int(distance),
                "concurrence": float(c_avg),
                "stderr": float(np.std(batch_avg, ddof=1)
                                / np.sqrt(len(batch_avg))),
                "mean_concurrence": float(c_each.mean()),
                "mean_concurrence_stderr": float(
                    c_each.std(ddof=1) / np.sqrt(ensemble)),
            })
    return rows


def probe_coherence_series(cfg: lat.LatticeConfig, t_max: float,
                           ensemble: int, rng, z=(1, 1),
                           n_samples: int = 40) -> EnsembleSeries:
    """|mean coherence factor| of a probe pair versus time.

    Averages the complex factor for the given coherence label over
    realizations before taking the magnitude (the averaged-state
    convention), with batch stderr in quadrature of real/imag parts.
    """
    if cfg.n_probes != 2:
        raise ValueError("exactly two probes required")
    ids = cfg.probe_ids()
    zz = tuple(z)
    values = []
    times = None
    for _ in range(ensemble):
        times, res = lat.simulate(
            cfg, t_max, rng,
            lambda g, state: ProbeChannel.from_graph(g, ids).factor(zz),
            tracked=ids, n_samples=n_samples)
        values.append(res)
    values = np.array(values)
    mean = np.abs(values.mean(axis=0))
    spread = np.sqrt(values.real.var(axis=0, ddof=1)
                     + values.imag.var(axis=0, ddof=1))
    stderr = spread / np.sqrt(ensemble)
    return EnsembleSeries(name=f"abs_mean_coherence{zz}", times=times,
                          mean=mean, stderr=stderr, n=ensemble,
                          metadata={"z": list(zz)})
