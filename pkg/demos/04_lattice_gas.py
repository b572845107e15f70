"""Lattice gas: cluster percolation, block entropy, probe saturation.

Particles hop on a periodic grid with exclusion and entangle with their
nearest neighbors.  Clusters of pairwise-localizable entanglement grow
exponentially until the gas percolates; block entropies saturate toward
the block size with revival dips when typical phases pass 2*pi; probe
pairs saturate at 1.5 bits (pinned together, one protected coherence)
or 2 bits (independent collisions).
"""

import numpy as np

from spingas.lattice import (LatticeConfig, block_entropy_timeseries,
                             cluster_timeseries, probe_entropy_timeseries,
                             probe_pair)

rng = np.random.default_rng(4)

print("=== cluster growth and percolation time (dilute gas) ===")
cfg = LatticeConfig(dims=(16, 16), n_particles=25, hop_rate=1.0,
                    coupling=0.8, dt=0.1)
stats = cluster_timeseries(cfg, 30.0, 25, rng, n_samples=15)
for t, size, dist in zip(stats.largest_cluster.times,
                         stats.largest_cluster.mean,
                         stats.max_distance.mean):
    print(f"t = {t:5.1f}: largest cluster {size:5.1f} / 25, "
          f"max entangled distance {dist:5.1f}")
print(f"95%-connected at t0 = {stats.t0_mean:.1f} "
      f"+- {stats.t0_stderr:.1f}\n")

print("=== block entropy with revival dips at high filling ===")
dense = LatticeConfig(dims=(20, 20), n_particles=360, hop_rate=1.0,
                      coupling=0.8, dt=0.1)
ser = block_entropy_timeseries(dense, 4, 20.0, 40, rng, n_samples=20)
for t, m in zip(ser.times, ser.mean):
    bar = "#" * int(m * 12)
    print(f"t = {t:5.1f}: S = {m:5.2f} {bar}")
print("dips near t = 2*pi/coupling =",
      round(2 * np.pi / dense.coupling, 2), "and twice that\n")

print("=== probe pair saturation values ===")
half = dict(dims=(20, 20), n_particles=200, hop_rate=1.0, coupling=0.8,
            dt=0.1)
pinned = LatticeConfig(**half, probes=probe_pair((20, 20), 0, hop_rate=0.0))
ser_a = probe_entropy_timeseries(pinned, 90.0, 60, rng, n_samples=6)
hopping = LatticeConfig(**half, probes=probe_pair((20, 20), 0, hop_rate=0.2))
ser_b = probe_entropy_timeseries(hopping, 90.0, 60, rng, n_samples=6)
print("time   pinned-together   hopping")
for t, a, b in zip(ser_a.times, ser_a.mean, ser_b.mean):
    print(f"{t:5.1f}   {a:7.3f}           {b:7.3f}")
print("pinned probes keep |01><10| protected -> 1.5 bits;"
      " hopping probes mix fully -> 2 bits")
