"""Command-line entry point: ``adiabatic-race <subcommand> ...``.

JSON artifacts carry the effective configuration under ``"config"``.  CSV
artifacts keep their fixed headers and get a ``<out>.config.json`` sidecar.
All files are written atomically (temporary file, then rename).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

from . import __version__, quantum
from .cnf import CnfError, brute_force_sat, parse_dimacs
from .decohere import dephasing_couplings, dephasing_run, trajectory_csv
from .ising import IsingModel, ground_states
from .race import RaceConfig, run_race, scaling_sweep, sweep_csv
from .reduction import reduce_3sat

EXIT_OK, EXIT_ERROR, EXIT_SAT, EXIT_UNSAT = 0, 1, 10, 20

log = logging.getLogger("adiabatic_race")


class CliError(Exception):
    pass


def write_atomic(path: str | Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit_json(args, payload: dict):
    text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)


def _emit_csv(args, text: str, config: dict):
    if args.out:
        write_atomic(args.out, text)
        write_atomic(f"{args.out}.config.json", json.dumps(config, indent=2) + "\n")
    else:
        sys.stdout.write(text)


def _effective_config(args) -> dict:
    skip = {"func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _read_cnf(path: str):
    try:
        return parse_dimacs(_read_text(path))
    except CnfError as exc:
        raise CliError(f"{path}: {exc}") from exc


def _read_ising(path: str) -> IsingModel:
    try:
        return IsingModel.from_json(_read_text(path))
    except (ValueError, TypeError) as exc:
        raise CliError(f"{path}: invalid Ising JSON: {exc}") from exc


def cmd_solve(args) -> int:
    formula = _read_cnf(args.cnf)
    result = brute_force_sat(formula, args.mode, threads=args.threads)
    payload = result.to_dict()
    payload["dropped_tautologies"] = formula.dropped_tautologies
    payload["config"] = _effective_config(args)
    _emit_json(args, payload)
    return EXIT_SAT if result.satisfiable else EXIT_UNSAT


def cmd_reduce(args) -> int:
    if not args.out:
        raise CliError("reduce needs --out")
    formula = _read_cnf(args.cnf)
    try:
        model, rmap = reduce_3sat(formula)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    config = _effective_config(args)
    write_atomic(args.out, json.dumps({**model.to_dict(), "config": config}, indent=2) + "\n")
    write_atomic(map_path(args.out), json.dumps({**rmap.to_dict(), "config": config}, indent=2) + "\n")
    return EXIT_OK


def map_path(out: str) -> str:
    p = Path(out)
    return str(p.with_name(p.stem + ".map.json"))


def cmd_ground(args) -> int:
    model = _read_ising(args.ising)
    try:
        res = ground_states(model, tol=args.tol)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    _emit_json(args, {
        "energy": res.energy,
        "degeneracy": res.degeneracy,
        "configs": [list(c) for c in res.configs],
        "zero_ground": abs(res.energy) <= args.tol,
        "config": _effective_config(args),
    })
    return EXIT_OK


def cmd_gap(args) -> int:
    model = _read_ising(args.ising)
    try:
        profile = quantum.gap_profile(model, args.samples, track_degeneracy=not args.literal_gap)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    config = _effective_config(args)
    config.update(min_gap=profile.min_gap, argmin_s=profile.argmin_s, final_degeneracy=profile.final_degeneracy)
    _emit_csv(args, profile.to_csv(), config)
    return EXIT_OK


def cmd_evolve(args) -> int:
    model = _read_ising(args.ising)
    t_ad = args.t_adiabatic
    if t_ad is None:
        t_ad = quantum.estimate_adiabatic_time(quantum.gap_profile(model, args.gap_samples), args.c)
    result = quantum.adiabatic_run(model, t_ad, args.steps)
    _emit_json(args, {**result.to_dict(), "config": _effective_config(args)})
    return EXIT_OK


def cmd_race(args) -> int:
    formula = _read_cnf(args.cnf)
    config = RaceConfig(
        c=args.c,
        observation_time=args.observation_time,
        gap_samples=args.gap_samples,
        seconds_per_unit=args.seconds_per_unit,
        hamiltonian=args.hamiltonian,
        threads=args.threads,
    )
    report = run_race(formula, config, instance_id=args.instance_id or Path(args.cnf).name)
    payload = report.to_dict()
    payload["config"] = {**payload["config"], **_effective_config(args)}
    _emit_json(args, payload)
    return EXIT_OK


def cmd_sweep(args) -> int:
    rows = scaling_sweep(
        args.n_min, args.n_max, args.instances, args.clause_ratio, args.seed,
        gap=args.gap, gap_samples=args.gap_samples, threads=args.threads,
    )
    _emit_csv(args, sweep_csv(rows), _effective_config(args))
    return EXIT_OK


def cmd_decohere(args) -> int:
    couplings = dephasing_couplings(args.n_collective, args.n_env, args.seed)
    if args.coupling is not None:
        couplings[:] = args.coupling
    rows = dephasing_run(args.n_collective, args.n_env, args.seed, args.t, args.steps, couplings=couplings)
    config = _effective_config(args)
    config["couplings"] = couplings.tolist()
    _emit_csv(args, trajectory_csv(rows), config)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="output path (default: standard output)")
    common.add_argument("--tol", type=float, default=1e-9, help="zero-energy tolerance")
    common.add_argument("--threads", type=int, default=1)

    parser = argparse.ArgumentParser(prog="adiabatic-race", description="SAT-to-Ising reduction, adiabatic simulation and the brute-force race.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="brute-force a DIMACS file (exit 10 sat / 20 unsat)")
    p.add_argument("cnf")
    p.add_argument("--mode", choices=["first_witness", "exhaustive"], default="first_witness")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("reduce", parents=[common], help="reduce 3-CNF to Ising JSON (+ .map.json)")
    p.add_argument("cnf")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("ground", parents=[common], help="exact Ising ground states")
    p.add_argument("ising")
    p.set_defaults(func=cmd_ground)

    p = sub.add_parser("gap", parents=[common], help="spectral gap profile CSV")
    p.add_argument("ising")
    p.add_argument("--samples", type=int, default=41)
    p.add_argument("--literal-gap", action="store_true", help="use E1 - E0 even for a degenerate final ground space")
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("evolve", parents=[common], help="adiabatic run")
    p.add_argument("ising")
    p.add_argument("--t-adiabatic", type=float, default=None, help="default: c / min_gap**2")
    p.add_argument("--steps", type=int, default=None, help="default: max(1000, 100 T)")
    p.add_argument("--c", type=float, default=10.0)
    p.add_argument("--gap-samples", type=int, default=41)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("race", parents=[common], help="brute force vs adiabatic time report")
    p.add_argument("cnf")
    p.add_argument("--c", type=float, default=10.0)
    p.add_argument("--observation-time", type=float, default=None, help="seconds; default t_adiabatic * seconds-per-unit")
    p.add_argument("--gap-samples", type=int, default=41)
    p.add_argument("--seconds-per-unit", type=float, default=1.0)
    p.add_argument("--hamiltonian", choices=["ising", "clauses"], default="ising")
    p.add_argument("--instance-id", default=None)
    p.set_defaults(func=cmd_race)

    p = sub.add_parser("sweep", parents=[common], help="brute-force scaling sweep CSV")
    p.add_argument("--n-min", type=int, default=4)
    p.add_argument("--n-max", type=int, default=12)
    p.add_argument("--instances", type=int, default=5)
    p.add_argument("--clause-ratio", type=float, default=4.26)
    p.add_argument("--gap", action="store_true", help="also record mean minimum gaps (n <= 14)")
    p.add_argument("--gap-samples", type=int, default=21)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("decohere", parents=[common], help="dephasing trajectory CSV")
    p.add_argument("--n-collective", type=int, default=2)
    p.add_argument("--n-env", type=int, default=8)
    p.add_argument("--t", type=float, default=5.0)
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--coupling", type=float, default=None, help="use this coupling for every pair instead of seeded ones")
    p.set_defaults(func=cmd_decohere)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    del args.verbose
    try:
        return args.func(args)
    except (CliError, ValueError, RuntimeError) as exc:
        print(f"adiabatic-race {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
