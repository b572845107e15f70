"""Acceptance gate: one test per promised behavior, stated tolerances.

Each test prints a single PASS/FAIL line (visible with ``pytest -s`` or
on failure) and asserts the criterion at exactly the advertised
tolerance.  Seeds are fixed so the gate is reproducible.
"""

import time

import numpy as np

from spingas import InteractionGraph
from spingas.boltzmann import (ENTROPY_PER_RANDOM_COLLISION, BoltzmannConfig,
                               analytic_alpha, analytic_entropy_lower_bound,
                               sample_collisions, single_particle_entropies)
from spingas.channels import (cluster_concurrence_from_bell,
                              concurrence_vs_distance, markovian_coherence,
                              probe_coherence_series)
from spingas.entanglement import subset_entropy
from spingas.equilibrium import certify_equilibrium_entropy
from spingas.lattice import (LatticeConfig, ProbeSpec, block_entropy_timeseries,
                             probe_entropy_timeseries, probe_pair)
from spingas.states import brute_force_reduced, reduced_density_matrix

LN2 = np.log(2.0)


def _report(num: int, ok: bool, detail: str):
    print(f"\nACCEPTANCE {num:02d} {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num}: {detail}"


def test_criterion_01_oracle_equivalence():
    """Reduced states match brute-force partial traces on 500 random
    gases (N <= 12) entrywise to 1e-10, in under a minute."""
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(500):
        n = int(rng.integers(2, 13))
        g = InteractionGraph(n)
        for k in range(n):
            for l in range(k + 1, n):
                if rng.random() < 0.6:
                    g.add_phase(k, l, float(rng.uniform(0, 2 * np.pi)))
        size = int(rng.integers(1, n))
        subset = np.sort(rng.choice(n, size=size, replace=False)).tolist()
        fast = reduced_density_matrix(g, subset, include_internal=True)
        slow = brute_force_reduced(g, subset)
        worst = max(worst, float(np.abs(fast.matrix - slow.matrix).max()))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-10 and elapsed < 60.0
    _report(1, ok, f"max entrywise deviation {worst:.2e} (tol 1e-10), "
                   f"{elapsed:.1f} s (limit 60 s)")


def test_criterion_02_short_time_entropy_constant():
    """Random-phase gas, N=50, ensemble 2000: <S_1>/(r t) at r t = 0.05
    equals 2 - log2(e) within 5%, in under two minutes."""
    cfg = BoltzmannConfig(density=1.0, temperature=1.0, mass=1.0,
                          diameter=1.0, gamma=1.0, n_particles=50,
                          phase_mode="random")
    rng = np.random.default_rng(102)
    rt = 0.05
    t = rt / cfg.collision_rate
    t0 = time.perf_counter()
    total = 0.0
    reps = 2000
    for _ in range(reps):
        g = InteractionGraph(50)
        sample_collisions(cfg, g, t, rng)
        total += float(single_particle_entropies(g).mean())
    elapsed = time.perf_counter() - t0
    ratio = (total / reps) / rt
    dev = abs(ratio / ENTROPY_PER_RANDOM_COLLISION - 1.0)
    ok = dev <= 0.05 and elapsed < 120.0
    _report(2, ok, f"<S1>/(rt) = {ratio:.5f} vs 2-log2(e) = "
                   f"{ENTROPY_PER_RANDOM_COLLISION:.5f} ({dev:.1%} off, "
                   f"tol 5%), {elapsed:.1f} s (limit 120 s)")


def test_criterion_03_entropy_lower_bound_tracks():
    """N=10, N_A=2, random phases: the simulated mean entropy stays above
    the closed-form lower bound (minus 3 stderr) and within 0.3 bits of
    it at every sampled time."""
    cfg = BoltzmannConfig(density=1.0, temperature=1.0, mass=1.0,
                          diameter=1.0, gamma=1.0, n_particles=10,
                          phase_mode="random")
    rng = np.random.default_rng(103)
    r = cfg.collision_rate
    rts = np.array([0.3, 0.7, 1.2, 2.0, 3.5, 6.0, 10.0])
    reps = 400
    vals = np.empty((reps, rts.size))
    for i in range(reps):
        g = InteractionGraph(10)
        t_prev = 0.0
        for j, rt in enumerate(rts):
            sample_collisions(cfg, g, (rt - (0 if j == 0 else rts[j - 1])) / r,
                              rng)
            vals[i, j] = subset_entropy(g, [0, 1])
    mean = vals.mean(axis=0)
    se = vals.std(axis=0, ddof=1) / np.sqrt(reps)
    bounds = np.array([analytic_entropy_lower_bound(10, 2, r, rt / r)
                       for rt in rts])
    above = np.all(mean >= bounds - 3 * se)
    tracks = np.all(mean - bounds <= 0.3)
    worst_gap = float((mean - bounds).max())
    ok = above and tracks
    _report(3, ok, f"bound respected at all {rts.size} times; largest "
                   f"excess over bound {worst_gap:.3f} bits (tol 0.3)")


def test_criterion_04_equilibrium_bipartitions():
    """Fully randomized 16-particle gas, ensemble 200: every bipartition
    with the smaller side m <= 8 satisfies m >= <S_A> > m - 1."""
    t0 = time.perf_counter()
    cert = certify_equilibrium_entropy(n=16, max_size=8, ensemble=200,
                                       seed=104)
    elapsed = time.perf_counter() - t0
    lines = []
    upper_ok = True
    for c in cert.classes:
        lines.append(f"m={c.size}: {c.n_bipartitions} cuts, "
                     f"mean S2 in [{c.mean_s2_min:.4f}, {c.mean_s2_max:.4f}], "
                     f"{c.n_topped_up} topped up, bound_min {c.bound_min:.4f}")
        upper_ok &= c.mean_s2_max <= c.size + 1e-9
        upper_ok &= (c.max_vn_seen <= c.size + 1e-9)
    ok = cert.all_pass and upper_ok
    _report(4, ok, f"all 32767 bipartitions inside (m-1, m] over 200 "
                   f"realizations; {elapsed / 60:.1f} min\n  " +
            "\n  ".join(lines))


def test_criterion_05_markovian_curve():
    """Fast-dragged probes on the scaled lattice follow the closed-form
    fresh-partner coherence within 3 stderr at every sampled step count;
    pinned probes decay measurably faster early on."""
    base = dict(dims=(100, 400), n_particles=10_000, hop_rate=1.0,
                coupling=0.8, dt=0.1)
    speed, phi, filling = 50.0, 0.1, 0.25
    dragged = LatticeConfig(**base, probes=ProbeSpec(
        positions=((25, 2), (75, 2)), mode="dragged", speed=speed,
        crossing_phase=phi))
    ser_d = probe_coherence_series(dragged, 7.8, 256,
                                   np.random.default_rng(105), z=(1, 1),
                                   n_samples=13)
    devs = []
    for t, m, s in zip(ser_d.times[1:], ser_d.mean[1:], ser_d.stderr[1:]):
        k = int(round(t * speed))
        devs.append(abs(m - markovian_coherence(filling, phi, k)) / s)
    match = max(devs) <= 3.0

    pinned = LatticeConfig(**base, probes=ProbeSpec(
        positions=((25, 100), (75, 300)), mode="hopping", hop_rate=0.0))
    ser_p = probe_coherence_series(pinned, 7.8, 256,
                                   np.random.default_rng(1050), z=(1, 1),
                                   n_samples=13)
    window = (ser_d.times >= 4.2) & (ser_d.times <= 7.2)
    gaps = ser_d.mean[window] - ser_p.mean[window]
    errs = np.hypot(ser_d.stderr[window], ser_p.stderr[window])
    faster = np.all(gaps > 3.0 * errs)
    ok = match and faster
    _report(5, ok, f"worst formula deviation {max(devs):.2f} stderr "
                   f"(tol 3); pinned-below-dragged margin "
                   f"{(gaps / errs).min():.1f} stderr in the early window")


def test_criterion_06_probe_saturation():
    """Pinned co-located probes saturate at 1.5 +- 0.05 bits once
    coupling*t >= 50; slowly hopping probes at 2.0 +- 0.05."""
    base = dict(dims=(20, 20), n_particles=200, hop_rate=1.0, coupling=0.8,
                dt=0.1)
    cfg_a = LatticeConfig(**base, probes=probe_pair((20, 20), 0,
                                                    hop_rate=0.0))
    ser_a = probe_entropy_timeseries(cfg_a, 100.0, 150,
                                     np.random.default_rng(106),
                                     n_samples=20)
    cfg_b = LatticeConfig(**base, probes=probe_pair((20, 20), 0,
                                                    hop_rate=0.2))
    ser_b = probe_entropy_timeseries(cfg_b, 100.0, 100,
                                     np.random.default_rng(1060),
                                     n_samples=20)
    late_a = ser_a.mean[ser_a.times * 0.8 >= 50.0]
    late_b = ser_b.mean[ser_b.times * 0.8 >= 50.0]
    dev_a = float(np.abs(late_a - 1.5).max())
    dev_b = float(np.abs(late_b - 2.0).max())
    ok = dev_a <= 0.05 and dev_b <= 0.05
    _report(6, ok, f"pinned co-located within {dev_a:.3f} of 1.5; "
                   f"hopping within {dev_b:.3f} of 2.0 (tol 0.05)")


def test_criterion_07_entropy_dips():
    """Dense lattice block entropy shows revival dips within 15% of
    2*pi/coupling and 4*pi/coupling."""
    cfg = LatticeConfig(dims=(20, 20), n_particles=360, hop_rate=1.0,
                        coupling=0.8, dt=0.1)
    ser = block_entropy_timeseries(cfg, 4, 20.0, 100,
                                   np.random.default_rng(107), n_samples=100)
    expected = [2 * np.pi / 0.8, 4 * np.pi / 0.8]
    details = []
    ok = True
    for dip, (lo, hi) in zip(expected, ((5.0, 10.5), (13.0, 18.5))):
        sel = (ser.times >= lo) & (ser.times <= hi)
        idx = np.argmin(ser.mean[sel])
        t_min = float(ser.times[sel][idx])
        depth = min(ser.mean[sel][0], ser.mean[sel][-1]) - ser.mean[sel][idx]
        in_band = abs(t_min - dip) <= 0.15 * dip
        genuine = depth > 5 * float(ser.stderr[sel][idx])
        ok &= in_band and genuine
        details.append(f"dip at t={t_min:.2f} vs {dip:.2f} "
                       f"(band +-15%), depth {depth:.2f} bits")
    _report(7, ok, "; ".join(details))


def test_criterion_08_cluster_state_relation():
    """Probe-pair concurrence vs separation: correlated-noise ordering
    psi+ > cluster > phi+ at distance 0 (3 stderr), and at large
    distance the cluster value follows from the Bell value within
    0.05."""
    cfg = LatticeConfig(dims=(100, 400), n_particles=10_000, hop_rate=1.0,
                        coupling=0.8, dt=0.1,
                        probes=ProbeSpec(positions=((50, 75), (50, 75)),
                                         mode="dragged", speed=10.0,
                                         crossing_phase=0.1))
    far = 120  # crossing lag of 12/eta decorrelates the two channels
    rows = concurrence_vs_distance(cfg, 25.0, [0, far], 128,
                                   np.random.default_rng(108))
    table = {(r["state"], r["distance"]): r for r in rows}

    def val(state, d):
        r = table[(state, d)]
        return r["concurrence"], r["stderr"]

    psi0, psi0_se = val("psi_plus", 0)
    g0, g0_se = val("cluster", 0)
    phi0, phi0_se = val("phi_plus", 0)
    order1 = psi0 - g0 > 3 * np.hypot(psi0_se, g0_se)
    order2 = g0 - phi0 > 3 * np.hypot(g0_se, phi0_se)

    bell_far, _ = val("phi_plus", far)
    g_far, _ = val("cluster", far)
    relation_dev = abs(g_far - cluster_concurrence_from_bell(bell_far))
    ok = order1 and order2 and relation_dev <= 0.05
    _report(8, ok,
            f"d=0: psi+={psi0:.3f} > cluster={g0:.3f} > phi+={phi0:.3f} "
            f"(3-stderr ordering {'holds' if order1 and order2 else 'fails'});"
            f" d={far}: |C_G - relation(C_Bell)| = {relation_dev:.3f} "
            f"(tol 0.05)")


def test_criterion_09_connectivity_rank_equivalence():
    """Graph connectivity across a cut is equivalent to reduced-state
    rank above one for every bipartition of 200 random gases, N <= 8."""
    rng = np.random.default_rng(109)
    disagreements = 0
    checked = 0
    for _ in range(200):
        n = int(rng.integers(2, 9))
        g = InteractionGraph(n)
        for k in range(n):
            for l in range(k + 1, n):
                if rng.random() < 0.5:
                    g.add_phase(k, l, float(rng.uniform(0.02,
                                                        2 * np.pi - 0.02)))
        for bits in range(1, 1 << (n - 1)):
            subset = [0] + [q for q in range(1, n) if bits >> (q - 1) & 1]
            if len(subset) == n:
                continue
            lam = np.sort(np.linalg.eigvalsh(
                brute_force_reduced(g, subset).matrix))
            rank_entangled = bool(lam[-2] > 1e-9)
            checked += 1
            if g.is_entangled_partition(subset) != rank_entangled:
                disagreements += 1
    ok = disagreements == 0
    _report(9, ok, f"{checked} bipartitions checked, "
                   f"{disagreements} disagreements (tol 0)")


def test_criterion_10_alpha_slope():
    """Small-phase regime: the initial growth rate of the ensemble block
    entropy matches alpha N_A N_B / (2 ln2 (N-1)) within 10%.

    The matched quantity is the order-2 Renyi entropy, the entropy for
    which the alpha relation is derived; the von Neumann slope is
    strictly larger (logarithmically enhanced for near-pure states) and
    is reported alongside.
    """
    cfg = BoltzmannConfig(density=1.0, temperature=1.0, mass=1.0,
                          diameter=1.0, gamma=0.1, n_particles=20,
                          phase_mode="exact")
    rng = np.random.default_rng(110)
    alpha = analytic_alpha(cfg).quadrature
    predicted = alpha * 1 * 19 / (2 * LN2 * 19)  # singleton blocks
    t = 0.1 / cfg.collision_rate
    reps = 10_000
    s2_sum = 0.0
    vn_sum = 0.0
    for _ in range(reps):
        g = InteractionGraph(20)
        sample_collisions(cfg, g, t, rng)
        gamma = g.phases_matrix()
        abs_c2 = np.prod(np.cos(0.5 * gamma) ** 2, axis=1)
        s2_sum += float(-np.log2(0.5 * (1.0 + abs_c2)).mean())
        vn_sum += float(single_particle_entropies(g).mean())
    s2_slope = s2_sum / reps / t
    vn_slope = vn_sum / reps / t
    dev = abs(s2_slope / predicted - 1.0)
    ok = dev <= 0.10 and vn_slope > s2_slope
    _report(10, ok,
            f"Renyi-2 slope {s2_slope:.3e} vs alpha/(2 ln2) = "
            f"{predicted:.3e} ({dev:.1%} off, tol 10%); von Neumann slope "
            f"{vn_slope:.3e} = {vn_slope / s2_slope:.1f}x larger, as the "
            f"log-enhancement of near-pure spectra requires")
