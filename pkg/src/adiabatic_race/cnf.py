"""k-CNF formulas: DIMACS I/O, evaluation and exhaustive (brute-force) solving.

Assignments are enumerated as integers ``k = 0 .. 2**n - 1`` where variable
``i`` (1-based) takes the value of bit ``i - 1`` of ``k``.  Variable 1 is
therefore the least significant bit and the enumeration order is fixed, which
makes ``assignments_checked`` deterministic in first-witness mode.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

DEFAULT_MAX_VARS = 30
_CHUNK_BITS = 16


class CnfError(ValueError):
    """Raised for malformed CNF input or invalid formula construction."""


class SizeLimitError(ValueError):
    """Raised when an exhaustive operation would exceed its configured bound."""


@dataclass(frozen=True)
class CnfFormula:
    num_vars: int
    clauses: tuple[tuple[int, ...], ...]
    dropped_tautologies: int = 0
    header_mismatch: bool = False

    def __post_init__(self):
        if not isinstance(self.num_vars, (int, np.integer)) or self.num_vars < 0:
            raise CnfError(f"num_vars must be a non-negative integer, got {self.num_vars!r}")
        for clause in self.clauses:
            if len(clause) == 0:
                raise CnfError("empty clause")
            for lit in clause:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise CnfError(f"literal {lit} out of range for {self.num_vars} variables")
            if any(-lit in clause for lit in clause):
                raise CnfError(f"tautological clause {clause}")

    @classmethod
    def from_clauses(cls, num_vars: int, clauses: Iterable[Iterable[int]]) -> "CnfFormula":
        """Build a formula, dropping tautologies and repeated literals."""
        kept = []
        dropped = 0
        for raw in clauses:
            clause = tuple(dict.fromkeys(int(x) for x in raw))
            if any(-lit in clause for lit in clause):
                dropped += 1
                continue
            kept.append(clause)
        return cls(int(num_vars), tuple(kept), dropped_tautologies=dropped)

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    @property
    def max_clause_width(self) -> int:
        return max((len(c) for c in self.clauses), default=0)

    def to_dict(self) -> dict:
        return {"num_vars": self.num_vars, "clauses": [list(c) for c in self.clauses]}

    @classmethod
    def from_dict(cls, data: dict) -> "CnfFormula":
        try:
            return cls.from_clauses(data["num_vars"], data["clauses"])
        except (KeyError, TypeError) as exc:
            raise CnfError(f"bad formula JSON: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "CnfFormula":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class SatResult:
    satisfiable: bool
    witness: tuple[bool, ...] | None
    assignments_checked: int
    wall_time: float
    model_count: int | None = None

    def to_dict(self) -> dict:
        return {
            "satisfiable": self.satisfiable,
            "witness": None if self.witness is None else list(self.witness),
            "assignments_checked": self.assignments_checked,
            "model_count": self.model_count,
            "wall_time": self.wall_time,
        }


def parse_dimacs(text: str, strict: bool = False) -> CnfFormula:
    """Parse DIMACS CNF text.

    A clause count that disagrees with the header is an error only when
    ``strict`` is set; otherwise it is recorded in ``header_mismatch``.
    Tautological clauses are dropped and counted in ``dropped_tautologies``.
    """
    header = None
    clauses: list[list[int]] = []
    current: list[int] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("c") or stripped.startswith("%"):
            continue
        if stripped.startswith("p"):
            parts = stripped.split()
            if header is not None:
                raise CnfError(f"line {lineno}: duplicate header")
            if len(parts) != 4 or parts[1] != "cnf":
                raise CnfError(f"line {lineno}: malformed header {stripped!r}")
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise CnfError(f"line {lineno}: malformed header {stripped!r}") from None
            if header[0] < 0 or header[1] < 0:
                raise CnfError(f"line {lineno}: negative counts in header")
            continue
        if header is None:
            raise CnfError(f"line {lineno}: clause before 'p cnf' header")
        for tok in stripped.split():
            try:
                lit = int(tok)
            except ValueError:
                raise CnfError(f"line {lineno}: bad token {tok!r}") from None
            if lit == 0:
                if not current:
                    raise CnfError(f"line {lineno}: empty clause")
                clauses.append(current)
                current = []
                continue
            if abs(lit) > header[0]:
                raise CnfError(f"line {lineno}: variable {abs(lit)} out of range (num_vars={header[0]})")
            current.append(lit)
    if header is None:
        raise CnfError("missing 'p cnf' header")
    if current:
        raise CnfError("missing terminating 0 at end of input")
    mismatch = len(clauses) != header[1]
    if mismatch and strict:
        raise CnfError(f"header declares {header[1]} clauses, found {len(clauses)}")
    formula = CnfFormula.from_clauses(header[0], clauses)
    return CnfFormula(formula.num_vars, formula.clauses, formula.dropped_tautologies, mismatch)


def to_dimacs(formula: CnfFormula) -> str:
    lines = [f"p cnf {formula.num_vars} {formula.num_clauses}"]
    lines += [" ".join(str(lit) for lit in clause) + " 0" for clause in formula.clauses]
    return "\n".join(lines) + "\n"


def evaluate(formula: CnfFormula, assignment: Sequence[bool]) -> bool:
    if len(assignment) != formula.num_vars:
        raise ValueError(f"assignment has length {len(assignment)}, formula has {formula.num_vars} variables")
    return all(any(bool(assignment[abs(lit) - 1]) == (lit > 0) for lit in clause) for clause in formula.clauses)


def assignment_from_index(index: int, num_vars: int) -> tuple[bool, ...]:
    return tuple(bool((index >> i) & 1) for i in range(num_vars))


def _satisfied_mask(formula: CnfFormula, start: int, stop: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    mask = np.ones(idx.shape, dtype=bool)
    for clause in formula.clauses:
        sat = np.zeros(idx.shape, dtype=bool)
        for lit in clause:
            bit = ((idx >> (abs(lit) - 1)) & 1).astype(bool)
            sat |= bit if lit > 0 else ~bit
        mask &= sat
    return mask


def _chunks(total: int):
    size = 1 << _CHUNK_BITS
    return [(lo, min(lo + size, total)) for lo in range(0, total, size)]


def _check_limit(formula: CnfFormula, max_vars: int):
    if formula.num_vars > max_vars:
        raise SizeLimitError(f"{formula.num_vars} variables exceeds the enumeration limit of {max_vars}")


def count_models(formula: CnfFormula, max_vars: int = DEFAULT_MAX_VARS, threads: int = 1) -> int:
    _check_limit(formula, max_vars)
    chunks = _chunks(1 << formula.num_vars)
    count = lambda c: int(np.count_nonzero(_satisfied_mask(formula, *c)))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return sum(pool.map(count, chunks))
    return sum(map(count, chunks))


def brute_force_sat(
    formula: CnfFormula,
    mode: str = "first_witness",
    max_vars: int = DEFAULT_MAX_VARS,
    threads: int = 1,
) -> SatResult:
    """Solve by trying assignments in enumeration order.

    ``first_witness`` stops at the first satisfying assignment.  ``exhaustive``
    checks all ``2**n`` assignments, counts models, and reports the
    lexicographically first witness.
    """
    if mode not in ("first_witness", "exhaustive"):
        raise ValueError(f"unknown mode {mode!r}")
    _check_limit(formula, max_vars)
    total = 1 << formula.num_vars
    start = time.perf_counter()
    first = None
    checked = 0
    models = 0
    chunks = _chunks(total)
    if mode == "exhaustive":
        def scan(c):
            hits = np.flatnonzero(_satisfied_mask(formula, *c))
            return len(hits), (c[0] + int(hits[0]) if len(hits) else None)

        if threads > 1:
            with ThreadPoolExecutor(threads) as pool:
                results = list(pool.map(scan, chunks))
        else:
            results = [scan(c) for c in chunks]
        for n_hits, lo in results:
            models += n_hits
            if first is None and lo is not None:
                first = lo
        checked = total
    else:
        for lo, hi in chunks:
            hits = np.flatnonzero(_satisfied_mask(formula, lo, hi))
            if len(hits):
                first = lo + int(hits[0])
                checked = first + 1
                break
            checked = hi
    elapsed = time.perf_counter() - start
    witness = None if first is None else assignment_from_index(first, formula.num_vars)
    return SatResult(
        satisfiable=first is not None,
        witness=witness,
        assignments_checked=checked,
        wall_time=elapsed,
        model_count=models if mode == "exhaustive" else None,
    )


def random_3cnf(num_vars: int, num_clauses: int, rng: np.random.Generator) -> CnfFormula:
    """Uniform random 3-CNF: three distinct variables per clause, random signs."""
    if num_vars < 3:
        raise ValueError("random 3-CNF needs at least 3 variables")
    clauses = []
    for _ in range(num_clauses):
        vs = rng.choice(num_vars, size=3, replace=False) + 1
        signs = rng.integers(0, 2, size=3) * 2 - 1
        clauses.append(tuple(int(v * s) for v, s in zip(vs, signs)))
    return CnfFormula.from_clauses(num_vars, clauses)
