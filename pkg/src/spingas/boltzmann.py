"""Kinetic-theory collision model of the dilute hard-sphere spin gas.

Under molecular chaos, every unordered pair collides at the same rate,
so collisions are sampled directly instead of integrating trajectories:
each pair fires with probability r*dt/(N-1) per substep, which gives
every particle the hard-sphere collision rate r = pi d^2 n <v_r>.
Colliding pairs draw a relative speed from the flux-weighted Maxwell
distribution p(v) ~ v^3 exp(-v^2 / 4 sigma^2) and pick up the phase
gamma / v, or a uniform random phase in the large-phase regime.

Closed-form expectations for the resulting entanglement growth (short
time, arbitrary-time lower bound, small-phase rate) live here as well.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate
from scipy.special import gammaln, logsumexp

from .graph import InteractionGraph

#: Expected entanglement entropy of one collision at a uniform random
#: phase: 2 - log2(e) bits.
ENTROPY_PER_RANDOM_COLLISION = 2.0 - np.log2(np.e)

#: Relative speeds are floored at this multiple of sigma so the exact
#: phase gamma / v stays finite.
SPEED_FLOOR = 1e-6

#: Substeps are chosen so that r * dt_sub stays at or below this.
MAX_RATE_STEP = 0.1

LN2 = np.log(2.0)


@dataclass(frozen=True)
class BoltzmannConfig:
    """Thermodynamic parameters of the gas, natural units by default.

    Attributes
    ----------
    density : float
        Number density n.
    temperature : float
    mass : float
    diameter : float
        Hard-sphere diameter; also the interaction range of the
        collision coupling.
    gamma : float
        Collision coupling: a pair meeting at relative speed v picks up
        the phase gamma / v.
    n_particles : int
    boltzmann_constant : float
    phase_mode : str
        "exact" for gamma / v phases, "random" for uniform phases in
        [0, 2*pi) (the large-collisional-phase regime).
    """

    density: float
    temperature: float
    mass: float
    diameter: float
    gamma: float
    n_particles: int
    boltzmann_constant: float = 1.0
    phase_mode: str = "exact"

    def __post_init__(self):
        for name in ("density", "temperature", "mass", "diameter",
                     "boltzmann_constant"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.gamma < 0.0:
            raise ValueError("gamma must be nonnegative")
        if self.n_particles < 2:
            raise ValueError("need at least two particles")
        if self.phase_mode not in ("exact", "random"):
            raise ValueError("phase_mode must be 'exact' or 'random'")

    @property
    def sigma(self) -> float:
        """Thermal velocity scale sqrt(kB T / m)."""
        return float(np.sqrt(self.boltzmann_constant * self.temperature
                             / self.mass))

    @property
    def mean_relative_speed(self) -> float:
        """<v_r> = sqrt(16 kB T / (m pi))."""
        return float(np.sqrt(16.0 * self.boltzmann_constant * self.temperature
                             / (self.mass * np.pi)))

    @property
    def collision_rate(self) -> float:
        """Per-particle hard-sphere collision rate r = pi d^2 n <v_r>."""
        return float(np.pi * self.diameter ** 2 * self.density
                     * self.mean_relative_speed)

    @classmethod
    def from_dict(cls, data: dict) -> "BoltzmannConfig":
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "BoltzmannConfig":
        return cls.from_dict(_read_config_file(path))

    def with_mode(self, phase_mode: str) -> "BoltzmannConfig":
        return replace(self, phase_mode=phase_mode)


def _read_config_file(path) -> dict:
    """Read a flat TOML or JSON mapping."""
    text = open(path, "rb").read()
    name = str(path)
    if name.endswith(".toml"):
        try:
            import tomllib as toml
        except ImportError:
            import tomli as toml
        return toml.loads(text.decode())
    return json.loads(text.decode())


def sample_relative_speeds(cfg: BoltzmannConfig, size: int, rng) -> np.ndarray:
    """Flux-weighted Maxwell relative speeds, p(v) ~ v^3 exp(-v^2/4 sigma^2).

    With x = v^2 / (4 sigma^2) the density becomes x * exp(-x), a
    Gamma(2) variate, so sampling is exact: v = 2 sigma sqrt(Gamma(2)).
    """
    x = rng.gamma(2.0, 1.0, size=size)
    v = 2.0 * cfg.sigma * np.sqrt(x)
    return np.maximum(v, SPEED_FLOOR * cfg.sigma)


def collision_phases(cfg: BoltzmannConfig, size: int, rng) -> np.ndarray:
    if cfg.phase_mode == "random":
        return rng.uniform(0.0, 2.0 * np.pi, size=size)
    return cfg.gamma / sample_relative_speeds(cfg, size, rng)


def sample_collisions(cfg: BoltzmannConfig, g: InteractionGraph, dt: float,
                      rng) -> int:
    """Advance the gas by ``dt``: fire pair collisions, accumulate phases.

    Every unordered pair collides with probability r*dt'/(N-1) per
    internal substep dt', with dt' split so that r*dt' <= 0.1.  Returns
    the number of collisions fired.
    """
    if dt < 0.0:
        raise ValueError("dt must be nonnegative")
    if dt == 0.0:
        return 0
    n = cfg.n_particles
    if g.n != n:
        raise ValueError("graph sized for a different particle count")
    rate = cfg.collision_rate
    n_sub = max(1, int(np.ceil(rate * dt / MAX_RATE_STEP)))
    p_pair = rate * (dt / n_sub) / (n - 1)
    ks, ls = np.triu_indices(n, 1)
    total = 0
    for _ in range(n_sub):
        hit = rng.random(ks.size) < p_pair
        m = int(hit.sum())
        if m == 0:
            continue
        g.add_phases(ks[hit], ls[hit], collision_phases(cfg, m, rng))
        total += m
    return total


def single_particle_entropies(g: InteractionGraph) -> np.ndarray:
    """Von Neumann entropy of every single-particle marginal, vectorized.

    One particle's marginal has eigenvalues (1 +/- |C|)/2 with |C| the
    product of |cos(phi/2)| over its interaction phases.
    """
    gamma = g.phases_matrix()
    abs_c = np.prod(np.abs(np.cos(0.5 * gamma)), axis=1)
    lam = np.stack([(1.0 + abs_c) / 2.0, (1.0 - abs_c) / 2.0])
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(lam > 0.0, lam * np.log2(lam), 0.0)
    return -terms.sum(axis=0)


# -- closed-form expectations ------------------------------------------------


def short_time_block_entropy(n: int, n_a: int, rt: float) -> float:
    """N_A N_B/(N-1) * rt * (2 - log2 e) bits, the one-collision regime."""
    if not 1 <= n_a < n:
        raise ValueError("subset size must be in [1, N)")
    return n_a * (n - n_a) / (n - 1.0) * rt * ENTROPY_PER_RANDOM_COLLISION


def analytic_short_time_entropy(cfg: BoltzmannConfig, n_a: int,
                                t: float) -> float:
    """Expected block entropy N_A N_B/(N-1) * r t * (2 - log2 e), bits.

    Valid while a particle typically collides at most once (r t < 1);
    outside that window a RuntimeWarning is emitted and the value is
    still returned.
    """
    rt = cfg.collision_rate * t
    if rt >= 1.0:
        warnings.warn("short-time expression used outside r*t < 1",
                      RuntimeWarning, stacklevel=2)
    return short_time_block_entropy(cfg.n_particles, n_a, rt)


def analytic_entropy_lower_bound(n: int, n_a: int, r: float,
                                 t: float) -> float:
    """Arbitrary-time lower bound on the expected block entropy, bits.

    -log2( 2**-N * sum_Z binom(N_A, Z) (1 + exp(-r t Z/(N-1)))**N_B ),
    evaluated in the log domain so particle counts up to 1e5 are fine.
    Exact 0 at t = 0; approaches the equilibrium plateau
    -log2(2**-N_A + 2**-N_B - 2**-N) as r t grows.
    """
    if not 1 <= n_a < n:
        raise ValueError("subset size must be in [1, N)")
    n_b = n - n_a
    z = np.arange(n_a + 1, dtype=float)
    log_binom = gammaln(n_a + 1) - gammaln(z + 1) - gammaln(n_a - z + 1)
    log_terms = log_binom + n_b * np.log1p(np.exp(-r * t * z / (n - 1)))
    return float(n - logsumexp(log_terms) / LN2)


def long_time_entropy_lower_bound(n: int, n_a: int, r: float,
                                  t: float) -> float:
    """Large-r*t form of the entropy lower bound (equilibrium approach)."""
    n_b = n - n_a
    inner = (2.0 ** -n_a + 2.0 ** -n_b - 2.0 ** -n
             + n_a * n_b * 2.0 ** -n * np.exp(-r * t / (n - 1)))
    return float(-np.log2(inner))


@dataclass(frozen=True)
class AlphaResult:
    """Small-phase coherence decay rate <|C|^2> ~ 1 - alpha t."""

    closed: float
    quadrature: float


def analytic_alpha(cfg: BoltzmannConfig) -> AlphaResult:
    """Decay rate of a single-particle squared coherence at small phases.

    ``quadrature`` integrates the flux-weighted Maxwell average of
    sin^2(gamma / 2v) exactly; ``closed`` is the small-phase
    approximation n sqrt(pi) d^2 gamma^2 / (4 sigma).  A warning is
    emitted outside the small-phase regime gamma/sigma < 1.
    """
    s = cfg.sigma
    if cfg.gamma / s >= 1.0:
        warnings.warn("alpha derived for the small-phase regime "
                      "gamma/sigma < 1", RuntimeWarning, stacklevel=2)
    closed = 0.25 * cfg.density * np.sqrt(np.pi) * cfg.diameter ** 2 \
        * cfg.gamma ** 2 / s
    if cfg.gamma == 0.0:
        return AlphaResult(closed=0.0, quadrature=0.0)
    pref = 4.0 * np.pi ** 2 * cfg.diameter ** 2 * cfg.density \
        * (4.0 * np.pi * s ** 2) ** -1.5

    def integrand(v):
        return v ** 3 * np.exp(-v ** 2 / (4.0 * s ** 2)) \
            * np.sin(cfg.gamma / (2.0 * v)) ** 2

    val, _ = integrate.quad(integrand, 0.0, 30.0 * s, limit=400)
    return AlphaResult(closed=float(closed), quadrature=float(pref * val))


def small_phase_entropy_slope(cfg: BoltzmannConfig, n_a: int,
                              alpha: float | None = None) -> float:
    """Initial growth rate of the block entropy estimate,
    alpha N_A N_B / (2 ln2 (N-1)) bits per unit time."""
    if alpha is None:
        alpha = analytic_alpha(cfg).quadrature
    n = cfg.n_particles
    n_b = n - n_a
    return float(alpha * n_a * n_b / (2.0 * LN2 * (n - 1.0)))


def decoherence_times(delta_phi: float, delta_t: float) -> tuple[float, float]:
    """Coherence decay times for the two elementary collision patterns.

    Fresh partner every step of length delta_t, phase delta_phi each:
    exponential decay with tau_e ~ 8 delta_t / delta_phi**2.  Same
    partner every step (coherent phase addition): Gaussian decay with
    tau_g = 2 delta_t / delta_phi.
    """
    if not 0.0 < delta_phi < np.pi:
        raise ValueError("delta_phi must lie in (0, pi)")
    if delta_t <= 0.0:
        raise ValueError("delta_t must be positive")
    tau_e = 8.0 * delta_t / delta_phi ** 2
    tau_g = 2.0 * delta_t / delta_phi
    return float(tau_e), float(tau_g)
