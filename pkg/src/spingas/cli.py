"""Command-line entry points.

Subcommands:
  boltzmann --config PATH|NAME   run a collision-gas experiment
  lattice   --config PATH|NAME   run a lattice-gas experiment
  oracle-check                   engine-vs-brute-force validation suite
  analytic                       print closed-form expectation values

``--config`` accepts a file path or the name of a bundled recipe
(fig1a, fig1b, fig2a, fig2a-fullscale, fig2b, boltzmann-shorttime,
equilibrium).  Flags fall back to SPINGAS_SEED, SPINGAS_ENSEMBLE,
SPINGAS_WORKERS and SPINGAS_OUT environment variables, then to the
config file.  Exit codes: 0 success, 1 check failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from importlib import resources

from . import boltzmann as boltz
from .runner import ExperimentSpec, SpecError, oracle_check, run

ENV_PREFIX = "SPINGAS_"


def _env(name, cast, default=None):
    raw = os.environ.get(ENV_PREFIX + name)
    if raw is None:
        return default
    return cast(raw)


def _resolve_config(name: str) -> str:
    if os.path.exists(name):
        return name
    candidate = name if name.endswith(".toml") else name + ".toml"
    ref = resources.files("spingas").joinpath("recipes", candidate)
    if ref.is_file():
        return str(ref)
    raise SpecError(f"config: no file or bundled recipe named {name!r}")


def _add_run_flags(p):
    p.add_argument("--config", required=True,
                   help="experiment file (TOML/JSON) or bundled recipe name")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--ensemble", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default=None, help="output directory")


def _run_model(args, model: str) -> int:
    spec = ExperimentSpec.from_file(_resolve_config(args.config))
    if spec.model != model:
        raise SpecError(f"model: config declares {spec.model!r}, "
                        f"subcommand expects {model!r}")
    overrides = {}
    seed = args.seed if args.seed is not None else _env("SEED", int)
    ens = args.ensemble if args.ensemble is not None else _env("ENSEMBLE", int)
    workers = (args.workers if args.workers is not None
               else _env("WORKERS", int))
    out = args.out if args.out is not None else _env("OUT", str)
    if seed is not None:
        overrides["seed"] = seed
    if ens is not None:
        overrides["ensemble"] = ens
    if workers is not None:
        overrides["workers"] = workers
    if out is not None:
        overrides["output"] = out
    if overrides:
        from dataclasses import replace
        spec = replace(spec, **overrides)
    result = run(spec)
    for ser in result.series:
        print(f"{ser.name}: {len(ser.times)} samples, n={ser.n}, "
              f"final mean={ser.mean[-1]:.6g} +- {ser.stderr[-1]:.2g}")
    for row in result.rows:
        print(row)
    if spec.output:
        print(f"wrote {spec.output}/results.csv and results.json")
    return 0


def _run_analytic(args) -> int:
    if args.eq == "7":
        val = boltz.short_time_block_entropy(args.N, args.NA, args.rt)
        print(f"{val:.6g}")
    elif args.eq == "8":
        rt = args.rt if args.r is None else args.r * args.t
        val = boltz.analytic_entropy_lower_bound(args.N, args.NA, 1.0, rt)
        print(f"{val:.6g}")
    elif args.eq == "alpha":
        cfg = boltz.BoltzmannConfig(
            density=args.density, temperature=args.temperature,
            mass=args.mass, diameter=args.diameter, gamma=args.gamma,
            n_particles=max(args.N, 2))
        res = boltz.analytic_alpha(cfg)
        print(f"closed {res.closed:.6g}")
        print(f"quadrature {res.quadrature:.6g}")
        if args.NA:
            slope = boltz.small_phase_entropy_slope(cfg, args.NA,
                                                    res.quadrature)
            print(f"entropy_slope[{args.NA}] {slope:.6g}")
    else:  # tau
        tau_e, tau_g = boltz.decoherence_times(args.dphi, args.dt)
        print(f"tau_e {tau_e:.6g}")
        print(f"tau_g {tau_g:.6g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="spingas",
        description="Spin-gas entanglement and decoherence experiments")
    sub = ap.add_subparsers(dest="command", required=True)

    for model in ("boltzmann", "lattice"):
        p = sub.add_parser(model, help=f"run a {model} experiment")
        _add_run_flags(p)

    p = sub.add_parser("oracle-check",
                       help="validate the engine against brute force")
    p.add_argument("--n", type=int, default=10, help="largest gas size")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("analytic", help="print closed-form values")
    p.add_argument("--eq", required=True, choices=("7", "8", "alpha", "tau"))
    p.add_argument("--N", type=int, default=2)
    p.add_argument("--NA", type=int, default=1)
    p.add_argument("--rt", type=float, default=0.0)
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--density", type=float, default=1.0)
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--mass", type=float, default=1.0)
    p.add_argument("--diameter", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--dphi", type=float, default=0.1)
    p.add_argument("--dt", type=float, default=1.0)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command in ("boltzmann", "lattice"):
            return _run_model(args, args.command)
        if args.command == "oracle-check":
            ok, lines = oracle_check(n_max=args.n, trials=args.trials,
                                     seed=args.seed)
            print("\n".join(lines))
            return 0 if ok else 1
        return _run_analytic(args)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
