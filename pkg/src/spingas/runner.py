"""Experiment orchestration: seeded ensembles, scheduling, CSV/JSON output.

An experiment is described declaratively (model, config, observables,
time grid, ensemble, seed) and runs deterministically: realization k
always draws from the random stream spawned as child k of the base
seed, so serial and worker-pool runs produce byte-identical output.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__, boltzmann as boltz, channels, equilibrium, lattice as lat
from .entanglement import meyer_wallach, subset_entropy
from .graph import InteractionGraph
from .series import EnsembleSeries
from .states import reduced_purity

CSV_SCHEMA = 1

#: Convention choices surfaced with every output for sensitivity runs.
METADATA_DEFAULTS = {
    "distance_metric": "manhattan_periodic",
    "classical_correlation_set": "pauli_pairs",
    "block_selection": "uniform_random",
    "path_measurement_basis": "plus_minus_x",
    "probe_layer": "separate_non_blocking",
    "averaging": "state_average_headline",
}

_KINDS = ("timeseries", "coherence_series", "distance_scan",
          "equilibrium_survey")
_MODELS = ("boltzmann", "lattice")


class SpecError(ValueError):
    """Experiment description failed validation; message names the field."""


@dataclass(frozen=True)
class ExperimentSpec:
    """Declarative experiment description.

    ``observables`` entries are dicts with a ``name`` key plus
    observable-specific parameters.  ``extras`` carries kind-specific
    fields (distances, states, t_o, z, survey sizes).
    """

    model: str
    config: dict
    kind: str = "timeseries"
    observables: tuple = ()
    t_max: float = 1.0
    n_samples: int = 40
    ensemble: int = 1
    seed: int = 0
    workers: int = 1
    output: str | None = None
    variants: tuple = ()
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.model not in _MODELS:
            raise SpecError(f"model: expected one of {_MODELS}, "
                            f"got {self.model!r}")
        if self.kind not in _KINDS:
            raise SpecError(f"kind: expected one of {_KINDS}, "
                            f"got {self.kind!r}")
        if self.ensemble < 1:
            raise SpecError("ensemble: must be at least 1")
        if self.t_max <= 0:
            raise SpecError("t_max: must be positive")
        if self.workers < 1:
            raise SpecError("workers: must be at least 1")
        object.__setattr__(self, "observables",
                           tuple(dict(o) for o in self.observables))
        object.__setattr__(self, "variants",
                           tuple(dict(v) for v in self.variants))
        for i, ob in enumerate(self.observables):
            if "name" not in ob:
                raise SpecError(f"observables[{i}].name: missing")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        data = dict(data)
        known = {"model", "config", "kind", "observables", "t_max",
                 "n_samples", "ensemble", "seed", "workers", "output",
                 "variants"}
        extras = {k: data.pop(k) for k in list(data) if k not in known}
        if "model" not in data:
            raise SpecError("model: missing")
        if "config" not in data:
            raise SpecError("config: missing")
        return cls(extras=extras, **data)

    @classmethod
    def from_file(cls, path) -> "ExperimentSpec":
        try:
            raw = boltz._read_config_file(path)
        except Exception as exc:
            raise SpecError(f"cannot parse {path}: {exc}") from exc
        return cls.from_dict(raw)

    def spec_hash(self) -> str:
        stable = {k: v for k, v in self.__dict__.items()
                  if k not in ("output", "workers")}
        blob = json.dumps(stable, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


@dataclass(frozen=True)
class RunResult:
    series: list
    rows: list
    metadata: dict


def realization_rng(seed: int, index: int):
    """Random stream of realization ``index``: child of the base seed."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


# -- boltzmann timeseries -----------------------------------------------------


def _boltzmann_observable(ob: dict, cfg: boltz.BoltzmannConfig):
    name = ob["name"]
    if name == "subset_entropy":
        subset = ob.get("subset") or list(range(int(ob.get("size", 1))))
        return (f"subset_entropy[{len(subset)}]",
                lambda g, rng: subset_entropy(g, subset))
    if name == "subset_renyi2":
        subset = ob.get("subset") or list(range(int(ob.get("size", 1))))
        return (f"subset_renyi2[{len(subset)}]",
                lambda g, rng: -np.log2(reduced_purity(g, subset)))
    if name == "mean_single_entropy":
        return ("mean_single_entropy",
                lambda g, rng: float(boltz.single_particle_entropies(g).mean()))
    if name == "meyer_wallach":
        return ("meyer_wallach", lambda g, rng: meyer_wallach(g))
    if name == "coherence_sq":
        k = int(ob.get("particle", 0))
        def csq(g, rng):
            row = g.row(k)
            return float(np.prod(np.cos(0.5 * row) ** 2))
        return ("coherence_sq", csq)
    if name == "epsilon_stats":
        subset = ob.get("subset") or list(range(int(ob.get("size", 1))))
        z = np.asarray(ob.get("z", [1] * len(subset)), dtype=float)
        return (f"epsilon_width[{len(subset)}]",
                lambda g, rng: _epsilon_width(g, subset, z))
    raise SpecError(f"observables.name: unknown boltzmann observable {name!r}")


def _epsilon_width(g: InteractionGraph, subset, z) -> float:
    """Exact width of the dephasing-phase distribution for one coherence."""
    from .graph import Partition
    p = Partition(g.n, subset)
    w = z @ g.cross_block(p.members, p.complement)
    return float(np.sqrt(0.25 * np.sum(w ** 2)))


def _run_boltzmann_realization(spec: ExperimentSpec, index: int):
    cfg = boltz.BoltzmannConfig.from_dict(spec.config)
    rng = realization_rng(spec.seed, index)
    times = np.linspace(0.0, spec.t_max, spec.n_samples + 1)
    obs = [_boltzmann_observable(ob, cfg) for ob in spec.observables]
    g = InteractionGraph(cfg.n_particles)
    out = np.empty((len(obs), times.size))
    for j, (_, fn) in enumerate(obs):
        out[j, 0] = fn(g, rng)
    for i in range(1, times.size):
        boltz.sample_collisions(cfg, g, times[i] - times[i - 1], rng)
        for j, (_, fn) in enumerate(obs):
            out[j, i] = fn(g, rng)
    return out


# -- lattice timeseries -------------------------------------------------------


def _lattice_needs(spec: ExperimentSpec, cfg: lat.LatticeConfig):
    needs_full = False
    block_sizes = []
    for ob in spec.observables:
        name = ob["name"]
        if name in ("cluster_stats", "meyer_wallach"):
            needs_full = True
        elif name == "block_entropy":
            block_sizes.append(int(ob.get("size", 4)))
        elif name in ("probe_entropy", "concurrence", "epsilon_stats"):
            if cfg.n_probes != 2:
                raise SpecError(f"observables {name}: needs exactly 2 probes")
        else:
            raise SpecError(
                f"observables.name: unknown lattice observable {name!r}")
    return needs_full, block_sizes


def _run_lattice_realization(spec: ExperimentSpec, index: int):
    cfg = lat.LatticeConfig.from_dict(spec.config)
    rng = realization_rng(spec.seed, index)
    needs_full, block_sizes = _lattice_needs(spec, cfg)
    blocks = [np.sort(rng.choice(cfg.n_particles, size=s, replace=False))
              for s in block_sizes]
    tracked = None
    if not needs_full:
        ids = set(cfg.probe_ids())
        for b in blocks:
            ids.update(int(x) for x in b)
        tracked = sorted(ids)

    fns = []
    block_iter = iter(blocks)
    for ob in spec.observables:
        name = ob["name"]
        if name == "block_entropy":
            block = next(block_iter)
            fns.append((f"block_entropy[{len(block)}]",
                        lambda g, st, b=block: subset_entropy(g, b)))
        elif name == "probe_entropy":
            ids = cfg.probe_ids()
            fns.append(("probe_entropy",
                        lambda g, st: subset_entropy(g, ids)))
        elif name == "concurrence":
            state_name = ob.get("state", "phi_plus")
            if state_name not in channels.PROBE_STATES:
                raise SpecError(f"observables.state: unknown probe state "
                                f"{state_name!r}")
            rho_in = channels.PROBE_STATES[state_name]()
            ids = cfg.probe_ids()
            def conc(g, st, rho=rho_in, ids=ids):
                ch = channels.ProbeChannel.from_graph(g, ids)
                return channels.concurrence(ch.apply(rho).matrix)
            fns.append((f"concurrence[{state_name}]", conc))
        elif name == "epsilon_stats":
            ids = cfg.probe_ids()
            z = np.asarray(ob.get("z", [1, 1]), dtype=float)
            fns.append((f"epsilon_width{tuple(int(v) for v in z)}",
                        lambda g, st, z=z: _epsilon_width(g, ids, z)))
        elif name == "meyer_wallach":
            fns.append(("meyer_wallach", lambda g, st: meyer_wallach(g)))
        elif name == "cluster_stats":
            def largest(g, st):
                return float(max(len(c) for c in g.connected_components()))
            def distance(g, st):
                return float(g.max_entangled_distance(st.positions,
                                                      dims=cfg.dims))
            fns.append(("largest_cluster_size", largest))
            fns.append(("max_entangled_distance", distance))

    def measure(g, st):
        return [fn(g, st) for _, fn in fns]

    times, res = lat.simulate(cfg, spec.t_max, rng, measure, tracked=tracked,
                              n_samples=spec.n_samples)
    return np.array(res).T  # (n_obs, n_times)


_REALIZERS = {"boltzmann": _run_boltzmann_realization,
              "lattice": _run_lattice_realization}


def _observable_names(spec: ExperimentSpec) -> list[str]:
    names = []
    if spec.model == "boltzmann":
        cfg = boltz.BoltzmannConfig.from_dict(spec.config)
        names = [_boltzmann_observable(ob, cfg)[0] for ob in spec.observables]
    else:
        cfg = lat.LatticeConfig.from_dict(spec.config)
        for ob in spec.observables:
            if ob["name"] == "block_entropy":
                names.append(f"block_entropy[{int(ob.get('size', 4))}]")
            elif ob["name"] == "cluster_stats":
                names.extend(["largest_cluster_size",
                              "max_entangled_distance"])
            elif ob["name"] == "concurrence":
                names.append(f"concurrence[{ob.get('state', 'phi_plus')}]")
            elif ob["name"] == "epsilon_stats":
                z = ob.get("z", [1, 1])
                names.append(f"epsilon_width{tuple(int(v) for v in z)}")
            else:
                names.append(ob["name"])
    return names


def _timeseries_times(spec: ExperimentSpec) -> np.ndarray:
    if spec.model == "boltzmann":
        return np.linspace(0.0, spec.t_max, spec.n_samples + 1)
    cfg = lat.LatticeConfig.from_dict(spec.config)
    return lat.sample_steps(cfg, spec.t_max, spec.n_samples) * cfg.dt


def _worker(args):
    spec_dict, index = args
    spec = ExperimentSpec.from_dict(spec_dict)
    return index, _REALIZERS[spec.model](spec, index)


def _spec_payload(spec: ExperimentSpec) -> dict:
    d = dict(spec.__dict__)
    extras = d.pop("extras")
    d.update(extras)
    return d


def _run_timeseries(spec: ExperimentSpec, label: str = "") -> list:
    if not spec.observables:
        raise SpecError("observables: at least one required")
    names = _observable_names(spec)
    times = _timeseries_times(spec)
    stack = np.empty((spec.ensemble, len(names), times.size))
    if spec.workers > 1:
        payload = _spec_payload(spec)
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            for index, res in pool.map(
                    _worker, ((payload, i) for i in range(spec.ensemble))):
                stack[index] = res
    else:
        for i in range(spec.ensemble):
            stack[i] = _REALIZERS[spec.model](spec, i)
    suffix = f"|{label}" if label else ""
    return [EnsembleSeries.from_samples(name + suffix, times,
                                        stack[:, j, :],
                                        {"variant": label} if label else {})
            for j, name in enumerate(names)]


def _run_coherence_series(spec: ExperimentSpec, label: str = "") -> list:
    cfg = lat.LatticeConfig.from_dict(spec.config)
    rng = realization_rng(spec.seed, 0)
    z = tuple(spec.extras.get("z", (1, 1)))
    ser = channels.probe_coherence_series(cfg, spec.t_max, spec.ensemble,
                                          rng, z=z,
                                          n_samples=spec.n_samples)
    if label:
        ser = EnsembleSeries(name=ser.name + f"|{label}", times=ser.times,
                             mean=ser.mean, stderr=ser.stderr, n=ser.n,
                             metadata={**ser.metadata, "variant": label})
    return [ser]


def _run_distance_scan(spec: ExperimentSpec) -> list[dict]:
    cfg = lat.LatticeConfig.from_dict(spec.config)
    rng = realization_rng(spec.seed, 0)
    distances = spec.extras.get("distances")
    if not distances:
        raise SpecError("distances: required for a distance scan")
    t_o = float(spec.extras.get("t_o", spec.t_max))
    names = spec.extras.get("states",
                            ["psi_plus", "phi_plus", "cluster"])
    states = {}
    for name in names:
        if name not in channels.PROBE_STATES:
            raise SpecError(f"states: unknown probe state {name!r}")
        states[name] = channels.PROBE_STATES[name]()
    return channels.concurrence_vs_distance(
        cfg, t_o, distances, spec.ensemble, rng, states=states)


def _run_equilibrium_survey(spec: ExperimentSpec) -> list[dict]:
    n = int(spec.extras.get("n", spec.config.get("n_particles", 16)))
    max_size = int(spec.extras.get("max_size", n // 2))
    cert = equilibrium.certify_equilibrium_entropy(
        n=n, max_size=max_size, ensemble=spec.ensemble, seed=spec.seed)
    return [{
        "size": c.size, "n_bipartitions": c.n_bipartitions,
        "mean_s2_min": c.mean_s2_min, "mean_s2_max": c.mean_s2_max,
        "n_topped_up": c.n_topped_up, "bound_min": c.bound_min,
        "threshold": c.threshold, "pass": c.all_above_threshold,
    } for c in cert.classes]


def run(spec: ExperimentSpec) -> RunResult:
    """Execute an experiment; deterministic for a fixed (spec, seed)."""
    metadata = {"spec_hash": spec.spec_hash(), "seed": spec.seed,
                "version": f"spingas-{__version__}",
                "schema": CSV_SCHEMA, **METADATA_DEFAULTS}
    series: list = []
    rows: list = []
    if spec.kind in ("timeseries", "coherence_series"):
        runner = (_run_timeseries if spec.kind == "timeseries"
                  else _run_coherence_series)
        if spec.variants:
            for var in spec.variants:
                label = var.get("label", "")
                patch = {k: v for k, v in var.items() if k != "label"}
                cfg = dict(spec.config)
                cfg.update(patch)
                series.extend(runner(replace(spec, config=cfg, variants=()),
                                     label))
        else:
            series = runner(spec)
    elif spec.kind == "distance_scan":
        rows = _run_distance_scan(spec)
    else:
        rows = _run_equilibrium_survey(spec)
    result = RunResult(series=series, rows=rows, metadata=metadata)
    if spec.output:
        write_outputs(result, spec.output)
        if spec.extras.get("snapshot") and spec.kind == "timeseries":
            dump_final_snapshot(spec, os.path.join(spec.output,
                                                   "graph_snapshot.json"))
    return result


def dump_final_snapshot(spec: ExperimentSpec, path) -> None:
    """Checkpoint: the end-of-run interaction graph of realization 0."""
    rng = realization_rng(spec.seed, 0)
    if spec.model == "boltzmann":
        cfg = boltz.BoltzmannConfig.from_dict(spec.config)
        g = InteractionGraph(cfg.n_particles)
        boltz.sample_collisions(cfg, g, spec.t_max, rng)
    else:
        cfg = lat.LatticeConfig.from_dict(spec.config)
        state = lat.initial_state(cfg, rng)
        g = lat.new_graph(cfg)
        for _ in range(int(round(spec.t_max / cfg.dt))):
            lat.hop_step(state, cfg, g, rng)
    g.save_json(path)


# -- emission -----------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def series_csv(result: RunResult) -> str:
    buf = io.StringIO()
    md = result.metadata
    buf.write(f"# spingas-series schema={md['schema']} "
              f"spec={md['spec_hash']} seed={md['seed']} "
              f"version={md['version']}\n")
    writer = csv.writer(buf, lineterminator="\n")
    if result.series:
        writer.writerow(["t", "mean", "stderr", "n", "observable",
                         "params_hash"])
        for ser in result.series:
            for row in ser.to_rows():
                writer.writerow([_fmt(row["t"]), _fmt(row["mean"]),
                                 _fmt(row["stderr"]), row["n"],
                                 row["observable"], md["spec_hash"]])
    else:
        keys = sorted(result.rows[0]) if result.rows else []
        writer.writerow(keys + ["params_hash"])
        for row in result.rows:
            writer.writerow([_fmt(row[k]) for k in keys] + [md["spec_hash"]])
    return buf.getvalue()


def result_json_dict(result: RunResult) -> dict:
    return {
        "metadata": result.metadata,
        "series": [{
            "observable": s.name, "times": s.times.tolist(),
            "mean": s.mean.tolist(), "stderr": s.stderr.tolist(),
            "n": s.n, "metadata": s.metadata,
        } for s in result.series],
        "rows": result.rows,
    }


def write_outputs(result: RunResult, out_dir) -> tuple[str, str]:
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "results.csv")
    json_path = os.path.join(out_dir, "results.json")
    with open(csv_path, "w") as fh:
        fh.write(series_csv(result))
    with open(json_path, "w") as fh:
        json.dump(result_json_dict(result), fh, indent=1, sort_keys=True)
        fh.write("\n")
    return csv_path, json_path


# -- oracle suite -------------------------------------------------------------


def oracle_check(n_max: int = 10, trials: int = 200, seed: int = 0):
    """Random cross-validation of the efficient engine against brute force.

    Checks, per trial: reduced states match the partial-trace oracle
    entrywise to 1e-10, and the connectivity criterion agrees with the
    reduced-state rank.  Returns (ok, report_lines).
    """
    from .states import brute_force_reduced, reduced_density_matrix
    rng = np.random.default_rng(seed)
    worst = 0.0
    mismatches = 0
    for _ in range(trials):
        n = int(rng.integers(2, n_max + 1))
        g = InteractionGraph(n)
        for k in range(n):
            for l in range(k + 1, n):
                if rng.random() < 0.6:
                    g.add_phase(k, l, float(rng.uniform(0.0, 2.0 * np.pi)))
        size = int(rng.integers(1, n))
        subset = np.sort(rng.choice(n, size=size, replace=False)).tolist()
        fast = reduced_density_matrix(g, subset, include_internal=True)
        slow = brute_force_reduced(g, subset)
        worst = max(worst, float(np.abs(fast.matrix - slow.matrix).max()))
        lam = np.linalg.eigvalsh(slow.matrix)
        entangled_rank = bool(np.sort(lam)[-2] > 1e-9) if lam.size > 1 else False
        if g.is_entangled_partition(subset) != entangled_rank:
            mismatches += 1
    ok = worst < 1e-10 and mismatches == 0
    lines = [
        f"oracle-check: trials={trials} n_max={n_max}",
        f"max |engine - partial trace| = {worst:.3e} (tolerance 1e-10)",
        f"connectivity vs rank mismatches = {mismatches}",
        "PASS" if ok else "FAIL",
    ]
    return ok, lines
