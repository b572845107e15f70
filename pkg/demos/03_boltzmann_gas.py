"""The semi-quantal collision gas and its closed-form expectations.

Collisions are sampled at the hard-sphere kinetic rate under molecular
chaos; every collision adds a phase (uniform, or coupling/speed).  The
analytics this reproduces: linear short-time entropy growth with slope
r*(2 - log2 e) per particle, an arbitrary-time entropy lower bound that
doubles as a good estimate, equilibrium near-maximal entanglement, and
the small-phase coherence decay rate alpha.
"""

import numpy as np

from spingas import InteractionGraph, subset_entropy
from spingas.boltzmann import (ENTROPY_PER_RANDOM_COLLISION, BoltzmannConfig,
                               analytic_alpha, analytic_entropy_lower_bound,
                               analytic_short_time_entropy, decoherence_times,
                               sample_collisions, single_particle_entropies)

rng = np.random.default_rng(3)

cfg = BoltzmannConfig(density=1.0, temperature=1.0, mass=1.0, diameter=1.0,
                      gamma=1.0, n_particles=30, phase_mode="random")
r = cfg.collision_rate
print(f"collision rate r = {r:.4f}, thermal speed sigma = {cfg.sigma}")
print(f"entropy per random-phase collision: "
      f"{ENTROPY_PER_RANDOM_COLLISION:.6f} bits\n")

print("=== short-time growth vs the closed form ===")
for rt in (0.02, 0.05, 0.1):
    t = rt / r
    reps = 400
    s = 0.0
    for _ in range(reps):
        g = InteractionGraph(30)
        sample_collisions(cfg, g, t, rng)
        s += single_particle_entropies(g).mean()
    print(f"rt = {rt}: simulated <S1> = {s / reps:.5f}, "
          f"formula {analytic_short_time_entropy(cfg, 1, t):.5f}")
print()

print("=== the lower bound tracks the block entropy at all times ===")
reps = 150
for rt in (0.5, 1.5, 3.0, 6.0):
    t = rt / r
    vals = []
    for _ in range(reps):
        g = InteractionGraph(30)
        sample_collisions(cfg, g, t, rng)
        vals.append(subset_entropy(g, [0, 1]))
    bound = analytic_entropy_lower_bound(30, 2, r, t)
    print(f"rt = {rt}: <S_2-block> = {np.mean(vals):.4f} "
          f">= bound {bound:.4f}")
print()

print("=== equilibrium: one bit away from maximal, any cut ===")
g = InteractionGraph(12)
for k in range(12):
    for l in range(k + 1, 12):
        g.add_phase(k, l, rng.uniform(0, 2 * np.pi))
for size in (1, 2, 4, 6):
    s = subset_entropy(g, list(range(size)))
    print(f"|A| = {size}: S = {s:.4f} (max {size})")
print()

print("=== small phases: decoherence rate alpha ===")
small = BoltzmannConfig(density=1.0, temperature=1.0, mass=1.0, diameter=1.0,
                        gamma=0.1, n_particles=20, phase_mode="exact")
res = analytic_alpha(small)
print(f"alpha closed form {res.closed:.6f} vs quadrature "
      f"{res.quadrature:.6f}")
tau_e, tau_g = decoherence_times(0.1, 1.0)
print(f"memoryless decay time tau_e = {tau_e}, "
      f"coherent-accumulation time tau_g = {tau_g}")
