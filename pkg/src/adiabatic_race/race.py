"""Theoretician-vs-experiment harness.

The theoretician's cost ``T(N)`` is the exhaustive brute-force solve of the
formula (assignments checked, plus wall time).  The experiment's duration is
the adiabatic time estimated from the spectral gap of the reduced problem.
The determinism condition asks ``0 < T(N) < t`` for an observation time
``t``; by default ``t`` is the adiabatic time converted to seconds with
``seconds_per_unit``.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import quantum
from .cnf import CnfFormula, brute_force_sat, random_3cnf
from .ising import MAX_GROUND_SPINS, has_zero_ground
from .reduction import reduce_3sat, violation_diagonal

log = logging.getLogger(__name__)

SATISFIED, VIOLATED, UNDETERMINED = "satisfied", "violated", "undetermined"
SWEEP_HEADER = ["n_vars", "instances", "mean_ops", "max_ops", "mean_min_gap", "mean_wall_s"]


@dataclass(frozen=True)
class RaceConfig:
    c: float = 10.0
    observation_time: float | None = None
    gap_samples: int = 41
    seconds_per_unit: float = 1.0
    hamiltonian: str = "ising"  # "ising": reduced model with ancillas; "clauses": violation count on formula vars
    threads: int = 1


@dataclass(frozen=True)
class RaceReport:
    instance_id: str
    n_vars: int
    n_spins: int
    brute_force_ops: int
    brute_force_wall: float
    min_gap: float | None
    t_adiabatic: float | None
    observation_time: float | None
    satisfiable: bool
    reduced_zero_ground: bool | None
    verdict: str
    determinism_satisfied: bool | None
    reason: str | None = None
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = asdict(self)
        for key in ("min_gap", "t_adiabatic", "observation_time"):
            if out[key] is not None and not math.isfinite(out[key]):
                out[key] = str(out[key])
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def determinism_verdict(theory_time: float, observation_time: float | None) -> str:
    """``satisfied`` iff ``0 < theory_time < observation_time``."""
    if observation_time is None or math.isnan(observation_time):
        return UNDETERMINED
    return SATISFIED if 0 < theory_time < observation_time else VIOLATED


def with_observation_time(report: RaceReport, observation_time: float | None) -> RaceReport:
    verdict = determinism_verdict(report.brute_force_wall, observation_time)
    fields = {**report.__dict__, "observation_time": observation_time, "verdict": verdict}
    fields["determinism_satisfied"] = None if verdict == UNDETERMINED else verdict == SATISFIED
    return RaceReport(**fields)


def _final_hamiltonian(formula: CnfFormula, kind: str):
    if kind == "ising":
        model, _ = reduce_3sat(formula)
        return model
    if kind == "clauses":
        return quantum.final_from_diagonal(violation_diagonal(formula))
    raise ValueError(f"unknown hamiltonian kind {kind!r}")


def run_race(formula: CnfFormula, config: RaceConfig = RaceConfig(), instance_id: str = "") -> RaceReport:
    model, rmap = reduce_3sat(formula)
    sat = brute_force_sat(formula, "exhaustive", threads=config.threads)
    zero_ground = has_zero_ground(model) if model.n <= MAX_GROUND_SPINS else None

    gap_spins = model.n if config.hamiltonian == "ising" else formula.num_vars
    min_gap = t_ad = None
    reason = None
    if gap_spins > quantum.MAX_QUBITS:
        reason = f"{gap_spins} spins exceeds the {quantum.MAX_QUBITS}-qubit simulation limit"
    else:
        try:
            problem = model if config.hamiltonian == "ising" else _final_hamiltonian(formula, "clauses")
            profile = quantum.gap_profile(problem, config.gap_samples)
            min_gap = profile.min_gap
            t_ad = quantum.estimate_adiabatic_time(profile, config.c)
        except (quantum.EigensolverError, quantum.GapError) as exc:
            reason = str(exc)

    t_obs = config.observation_time
    if t_obs is None and t_ad is not None:
        t_obs = t_ad * config.seconds_per_unit
    verdict = determinism_verdict(sat.wall_time, t_obs)
    if verdict == UNDETERMINED and reason is None:
        reason = "no observation time available"
    return RaceReport(
        instance_id=instance_id,
        n_vars=formula.num_vars,
        n_spins=rmap.total_spins,
        brute_force_ops=sat.assignments_checked,
        brute_force_wall=sat.wall_time,
        min_gap=min_gap,
        t_adiabatic=t_ad,
        observation_time=t_obs,
        satisfiable=sat.satisfiable,
        reduced_zero_ground=zero_ground,
        verdict=verdict,
        determinism_satisfied=None if verdict == UNDETERMINED else verdict == SATISFIED,
        reason=reason,
        config=asdict(config),
    )


@dataclass(frozen=True)
class SweepRow:
    n_vars: int
    instances: int
    mean_ops: float
    max_ops: int
    mean_min_gap: float | None
    mean_wall: float


def sweep_instance(n: int, index: int, clause_ratio: float, seed: int) -> CnfFormula:
    """The ``index``-th random 3-CNF of size ``n``; depends only on its arguments."""
    rng = np.random.default_rng([seed, n, index])
    return random_3cnf(n, int(round(clause_ratio * n)), rng)


def scaling_sweep(
    n_min: int,
    n_max: int,
    instances_per_n: int,
    clause_ratio: float = 4.26,
    seed: int = 0,
    gap: bool = False,
    gap_samples: int = 21,
    threads: int = 1,
) -> list[SweepRow]:
    """Worst-case and mean brute-force cost per size over seeded random 3-CNF batches.

    With ``gap`` set, each instance's minimum gap is taken on the
    clause-violation Hamiltonian over the formula variables (the reduced
    model minimized over ancillas), which keeps the qubit count at ``n``.
    Instances whose gap cannot be computed are left out of the mean.
    """
    if n_min < 4 or n_max < n_min:
        raise ValueError("need 4 <= n_min <= n_max")
    if n_max > (14 if gap else 24):
        raise ValueError(f"n_max={n_max} is over the {'gap' if gap else 'ops-only'} limit")
    if instances_per_n < 1 or clause_ratio <= 0:
        raise ValueError("instances_per_n must be >= 1 and clause_ratio > 0")
    rows = []
    for n in range(n_min, n_max + 1):
        ops, walls, gaps = [], [], []
        for i in range(instances_per_n):
            formula = sweep_instance(n, i, clause_ratio, seed)
            res = brute_force_sat(formula, "exhaustive", threads=threads)
            ops.append(res.assignments_checked)
            walls.append(res.wall_time)
            if gap:
                final = quantum.final_from_diagonal(violation_diagonal(formula))
                try:
                    gaps.append(quantum.gap_profile(final, gap_samples).min_gap)
                except quantum.EigensolverError as exc:
                    log.warning("n=%d instance %d: gap skipped (%s)", n, i, exc)
        rows.append(
            SweepRow(
                n_vars=n,
                instances=instances_per_n,
                mean_ops=sum(ops) / len(ops),
                max_ops=max(ops),
                mean_min_gap=float(np.mean(gaps)) if gaps else None,
                mean_wall=sum(walls) / len(walls),
            )
        )
    return rows


def sweep_csv(rows: list[SweepRow], include_wall: bool = True) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER if include_wall else SWEEP_HEADER[:-1])
    for r in rows:
        line = [r.n_vars, r.instances, f"{r.mean_ops:.12g}", r.max_ops,
                "" if r.mean_min_gap is None else f"{r.mean_min_gap:.12g}"]
        if include_wall:
            line.append(f"{r.mean_wall:.6g}")
        writer.writerow(line)
    return buf.getvalue()


def log2_slope(ns, ops) -> Fraction | float:
    """Least-squares slope of ``log2(ops)`` against ``n``; exact when every count is a power of two."""
    if all(int(o) == o and int(o) > 0 and int(o) & (int(o) - 1) == 0 for o in ops):
        ys = [Fraction(int(o).bit_length() - 1) for o in ops]
        xs = [Fraction(int(n)) for n in ns]
    else:
        ys = [Fraction(math.log2(o)) for o in ops]
        xs = [Fraction(int(n)) for n in ns]
    mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
    den = sum((x - mx) ** 2 for x in xs)
    slope = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / den
    return slope
