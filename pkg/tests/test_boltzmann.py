import json

import numpy as np
import pytest
from scipy import integrate, stats

from spingas import InteractionGraph
from spingas.boltzmann import (ENTROPY_PER_RANDOM_COLLISION, AlphaResult,
                               BoltzmannConfig, analytic_alpha,
                               analytic_entropy_lower_bound,
                               analytic_short_time_entropy, collision_phases,
                               decoherence_times, long_time_entropy_lower_bound,
                               sample_collisions, sample_relative_speeds,
                               short_time_block_entropy,
                               single_particle_entropies,
                               small_phase_entropy_slope)
from spingas.entanglement import subset_entropy

PI = np.pi


def make_config(**kw):
    base = dict(density=1.0, temperature=1.0, mass=1.0, diameter=1.0,
                gamma=1.0, n_particles=10, phase_mode="random")
    base.update(kw)
    return BoltzmannConfig(**base)


class TestConfig:
    def test_derived_quantities(self):
        cfg = make_config(temperature=2.0, mass=0.5, density=0.3, diameter=1.5)
        kT_m = 1.0 * 2.0 / 0.5
        assert cfg.sigma == pytest.approx(np.sqrt(kT_m), abs=1e-12)
        assert cfg.mean_relative_speed == pytest.approx(
            np.sqrt(16.0 * kT_m / PI), abs=1e-12)
        assert cfg.collision_rate == pytest.approx(
            PI * 1.5 ** 2 * 0.3 * cfg.mean_relative_speed, abs=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            make_config(temperature=-1.0)
        with pytest.raises(ValueError):
            make_config(n_particles=1)
        with pytest.raises(ValueError):
            make_config(phase_mode="sometimes")

    def test_file_round_trip(self, tmp_path):
        cfg = make_config()
        p = tmp_path / "gas.json"
        p.write_text(json.dumps({
            "density": 1.0, "temperature": 1.0, "mass": 1.0, "diameter": 1.0,
            "gamma": 1.0, "n_particles": 10, "phase_mode": "random"}))
        assert BoltzmannConfig.from_file(p) == cfg
        t = tmp_path / "gas.toml"
        t.write_text("\n".join(f"{k} = {v!r}".replace("'", '"') for k, v in [
            ("density", 1.0), ("temperature", 1.0), ("mass", 1.0),
            ("diameter", 1.0), ("gamma", 1.0), ("n_particles", 10),
            ("phase_mode", "random")]))
        assert BoltzmannConfig.from_file(t) == cfg


class TestSampling:
    def test_zero_dt_is_noop(self, rng):
        cfg = make_config()
        g = InteractionGraph(cfg.n_particles)
        assert sample_collisions(cfg, g, 0.0, rng) == 0
        assert not np.any(g.phases_matrix())

    def test_collision_rate_poisson(self, rng):
        # expected total collisions over an ensemble: R * N * r * t / 2
        cfg = make_config(n_particles=12)
        t = 0.25 / cfg.collision_rate
        reps = 800
        total = sum(sample_collisions(cfg, InteractionGraph(12), t, rng)
                    for _ in range(reps))
        expect = reps * 12 * cfg.collision_rate * t / 2
        assert abs(total - expect) <= 3.0 * np.sqrt(expect)

    def test_substepping_keeps_rate(self, rng):
        cfg = make_config(n_particles=8)
        t = 3.0 / cfg.collision_rate  # forces ~30 substeps
        reps = 150
        total = sum(sample_collisions(cfg, InteractionGraph(8), t, rng)
                    for _ in range(reps))
        expect = reps * 8 * cfg.collision_rate * t / 2
        assert abs(total - expect) <= 3.0 * np.sqrt(expect)

    def test_random_phases_uniform(self, rng):
        cfg = make_config()
        phases = collision_phases(cfg, 4000, rng)
        p = stats.kstest(phases, stats.uniform(0, 2 * PI).cdf).pvalue
        assert p > 0.01

    def test_speed_sampler_moments(self, rng):
        cfg = make_config()
        v = sample_relative_speeds(cfg, 200_000, rng)
        # flux weighting: mean speed is 3 sqrt(pi)/2 sigma, and the
        # harmonic mean recovers the plain mean relative speed exactly
        m = v.mean()
        se = v.std(ddof=1) / np.sqrt(v.size)
        assert abs(m - 1.5 * np.sqrt(PI) * cfg.sigma) <= 3 * se
        inv = (1.0 / v)
        se_inv = inv.std(ddof=1) / np.sqrt(v.size)
        assert abs(inv.mean() - 1.0 / cfg.mean_relative_speed) <= 3 * se_inv

    def test_exact_phase_mode(self, rng):
        cfg = make_config(phase_mode="exact", gamma=0.5)
        phases = collision_phases(cfg, 1000, rng)
        assert np.all(phases > 0.0)
        # gamma/v with the flux-weighted speed density: mean is
        # gamma / <v_r> by the exact harmonic-mean identity
        assert phases.mean() == pytest.approx(0.5 / cfg.mean_relative_speed,
                                              rel=0.05)


class TestShortTime:
    def test_zero_time(self):
        cfg = make_config(n_particles=20)
        assert analytic_short_time_entropy(cfg, 3, 0.0) == 0.0

    def test_single_particle_form(self):
        assert short_time_block_entropy(50, 1, 0.1) == pytest.approx(
            0.1 * ENTROPY_PER_RANDOM_COLLISION, abs=1e-15)

    def test_constant_from_quadrature(self):
        # average one-collision entropy over a uniform phase equals
        # 2 - log2(e): independent quadrature oracle
        def binary_entropy_of_phase(phi):
            lam = (1.0 + abs(np.cos(phi / 2.0))) / 2.0
            if lam in (0.0, 1.0):
                return 0.0
            return -(lam * np.log2(lam) + (1 - lam) * np.log2(1 - lam))

        val, _ = integrate.quad(binary_entropy_of_phase, 0.0, 2.0 * PI,
                                limit=200)
        assert val / (2.0 * PI) == pytest.approx(
            ENTROPY_PER_RANDOM_COLLISION, abs=1e-6)

    def test_warns_outside_regime(self):
        cfg = make_config(n_particles=20)
        with pytest.warns(RuntimeWarning):
            analytic_short_time_entropy(cfg, 1, 10.0 / cfg.collision_rate)

    def test_monte_carlo_matches_formula(self, rng):
        # ensemble-mean single-particle entropy at rt = 0.08 within 5%
        cfg = make_config(n_particles=50)
        t = 0.08 / cfg.collision_rate
        total = 0.0
        reps = 1000
        for _ in range(reps):
            g = InteractionGraph(50)
            sample_collisions(cfg, g, t, rng)
            total += single_particle_entropies(g).mean()
        measured = total / reps
        expect = analytic_short_time_entropy(cfg, 1, t)
        assert measured == pytest.approx(expect, rel=0.05)


class TestLowerBound:
    def test_zero_time_exact(self):
        assert analytic_entropy_lower_bound(10, 2, 1.0, 0.0) == \
            pytest.approx(0.0, abs=1e-12)

    def test_long_time_limits(self):
        val = analytic_entropy_lower_bound(12, 3, 1.0, 1e9)
        plateau = -np.log2(2.0 ** -3 + 2.0 ** -9 - 2.0 ** -12)
        assert val == pytest.approx(plateau, abs=1e-9)
        # the closed long-time form agrees once rt is large
        for rt in (40.0, 120.0):
            a = analytic_entropy_lower_bound(12, 3, 1.0, rt)
            b = long_time_entropy_lower_bound(12, 3, 1.0, rt)
            assert a == pytest.approx(b, abs=5e-3)

    def test_short_time_expansion(self):
        n, n_a, rt = 10, 2, 1e-3
        val = analytic_entropy_lower_bound(n, n_a, 1.0, rt)
        approx = -np.log2(1.0 - n_a * (n - n_a) * rt / (4.0 * (n - 1)))
        assert val == pytest.approx(approx, rel=2e-2)

    def test_large_system_stable(self):
        val = analytic_entropy_lower_bound(100_000, 1000, 1.0, 5.0)
        assert np.isfinite(val) and 0.0 < val <= 1000.0

    def test_monte_carlo_respects_and_tracks_bound(self, rng):
        cfg = make_config(n_particles=10)
        r = cfg.collision_rate
        reps = 250
        for rt in (0.5, 1.5, 4.0):
            t = rt / r
            vals = np.empty(reps)
            for i in range(reps):
                g = InteractionGraph(10)
                sample_collisions(cfg, g, t, rng)
                vals[i] = subset_entropy(g, [0, 1])
            se = vals.std(ddof=1) / np.sqrt(reps)
            bound = analytic_entropy_lower_bound(10, 2, r, t)
            assert vals.mean() >= bound - 3 * se
            assert vals.mean() - bound <= 0.3

    def test_subadditive_upper_bound(self, rng):
        cfg = make_config(n_particles=10)
        t = 1.0 / cfg.collision_rate
        reps = 200
        block = np.empty(reps)
        singles = np.empty(reps)
        for i in range(reps):
            g = InteractionGraph(10)
            sample_collisions(cfg, g, t, rng)
            block[i] = subset_entropy(g, [0, 1])
            singles[i] = subset_entropy(g, [0]) + subset_entropy(g, [1])
        se = (block - singles).std(ddof=1) / np.sqrt(reps)
        assert block.mean() <= singles.mean() + 3 * se


class TestEquilibriumLocalizable:
    def test_pi_intermediary_yields_full_ebit(self, rng):
        # long-time gas: any pair can be steered to a maximally entangled
        # state through a third particle with accumulated phases near pi
        from spingas import localize_entanglement
        for deviation in (0.0, 0.05):
            g = InteractionGraph(8)
            for a in range(8):
                for b in range(a + 1, 8):
                    g.add_phase(a, b, float(rng.uniform(0, 2 * PI)))
            i, j, k = 0, 1, 2
            for pair in ((i, k), (j, k)):
                g.add_phase(*pair, PI + deviation - g.phase(*pair))
            res = localize_entanglement(g, i, j, path=[i, k, j])
            assert res.concurrence >= 1.0 - 1e-2


class TestAlpha:
    def test_vanishes_with_coupling(self):
        cfg = make_config(gamma=0.0, phase_mode="exact")
        res = analytic_alpha(cfg)
        assert res == AlphaResult(0.0, 0.0)

    def test_closed_form_matches_quadrature(self):
        cfg = make_config(gamma=0.1, phase_mode="exact")
        res = analytic_alpha(cfg)
        assert res.closed == pytest.approx(res.quadrature, rel=0.05)

    def test_warns_outside_small_phase(self):
        cfg = make_config(gamma=2.0, phase_mode="exact")
        with pytest.warns(RuntimeWarning):
            analytic_alpha(cfg)

    def test_coherence_decay_slope(self, rng):
        # <|C_01|^2> ~ 1 - alpha t at rt <= 0.1
        cfg = make_config(gamma=0.1, n_particles=20, phase_mode="exact")
        alpha = analytic_alpha(cfg).quadrature
        t = 0.1 / cfg.collision_rate
        reps = 10_000
        acc = 0.0
        for _ in range(reps):
            g = InteractionGraph(20)
            sample_collisions(cfg, g, t, rng)
            row = g.row(0)
            acc += np.prod(np.cos(0.5 * row) ** 2)
        measured_slope = (1.0 - acc / reps) / t
        assert measured_slope == pytest.approx(alpha, rel=0.10)

    def test_entropy_slope_helper(self):
        cfg = make_config(gamma=0.1, n_particles=20, phase_mode="exact")
        alpha = analytic_alpha(cfg).quadrature
        expect = alpha * 1 * 19 / (2 * np.log(2) * 19)
        assert small_phase_entropy_slope(cfg, 1) == pytest.approx(expect)


class TestDecoherenceTimes:
    def test_reference_values(self):
        tau_e, tau_g = decoherence_times(0.1, 1.0)
        assert tau_e == pytest.approx(800.0)
        assert tau_g == pytest.approx(20.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            decoherence_times(0.0, 1.0)
        with pytest.raises(ValueError):
            decoherence_times(PI, 1.0)
        with pytest.raises(ValueError):
            decoherence_times(0.1, 0.0)

    def test_exponential_approximation(self):
        dphi, dt = 0.1, 1.0
        tau_e, _ = decoherence_times(dphi, dt)
        k = np.arange(1, int(tau_e / dt) + 1)
        exact = np.cos(dphi / 2.0) ** k
        model = np.exp(-k * dt / tau_e)
        assert np.max(np.abs(model / exact - 1.0)) < 0.01

    def test_gaussian_approximation(self):
        dphi, dt = 0.1, 1.0
        _, tau_g = decoherence_times(dphi, dt)
        k = np.arange(1, int(1.0 / dphi) + 1)  # up to k*dphi = 1
        exact = np.cos(k * dphi / 2.0)
        model = np.exp(-((k * dt) ** 2) / (2.0 * tau_g ** 2))
        assert np.max(np.abs(model - exact)) < 0.02
