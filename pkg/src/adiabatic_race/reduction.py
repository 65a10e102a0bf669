"""Reduction of 3-CNF-SAT to the zero-energy Ising decision problem.

Each clause contributes a penalty that is 0 when the clause is satisfied and
1 when it is falsified (after minimizing over its ancilla, if any).  With
``z_i = 1`` meaning "literal i is false" the gadgets are

* width 1:  ``z1``
* width 2:  ``z1 z2``
* width 3:  ``z1 z2 + z1 z3 + z2 z3 + S + w (1 - 2 S)``,  ``S = z1 + z2 + z3``

where ``w`` is an ancilla bit.  For the width-3 gadget ``min_w`` equals
``z1 z2 z3`` and the minimizing ``w`` is unique, so the ancillas add no
ground-state degeneracy.  Every penalty is a non-negative integer on every
configuration; the summed model's ground energy is therefore the minimum
number of falsified clauses, and zero exactly when the formula is satisfiable.

Spin convention: ``s = +1`` means the variable is true; the ancilla bit is
``w = (1 - s_anc) / 2``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .cnf import CnfFormula
from .ising import IsingModel

Poly = dict[frozenset, Fraction]

_HALF = Fraction(1, 2)


@dataclass(frozen=True)
class PenaltyTerms:
    """Ising terms (``A = 1`` convention) of one clause penalty."""

    couplings: dict[tuple[int, int], Fraction]
    fields: dict[int, Fraction]
    offset: Fraction

    def energy(self, spins: dict[int, int]) -> Fraction:
        e = self.offset
        for j, b in self.fields.items():
            e -= b * spins[j]
        for (j, k), c in self.couplings.items():
            e -= c * spins[j] * spins[k]
        return e


@dataclass(frozen=True)
class ReductionMap:
    formula_vars: int
    total_spins: int
    ancilla_of_clause: tuple[int | None, ...]

    @property
    def var_of_spin(self) -> dict[int, int | str]:
        out: dict[int, int | str] = {i: i for i in range(1, self.formula_vars + 1)}
        for clause_idx, anc in enumerate(self.ancilla_of_clause):
            if anc is not None:
                out[anc] = f"ancilla:{clause_idx}"
        return out

    def to_dict(self) -> dict:
        return {
            "formula_vars": self.formula_vars,
            "total_spins": self.total_spins,
            "ancilla_of_clause": list(self.ancilla_of_clause),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ReductionMap":
        return cls(int(data["formula_vars"]), int(data["total_spins"]), tuple(data["ancilla_of_clause"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _mul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for a, x in p.items():
        for b, y in q.items():
            key = a ^ b  # s_j ** 2 == 1
            out[key] = out.get(key, Fraction(0)) + x * y
    return out


def _add(*polys: Poly) -> Poly:
    out: Poly = {}
    for p in polys:
        for key, c in p.items():
            out[key] = out.get(key, Fraction(0)) + c
    return out


def _scale(p: Poly, c) -> Poly:
    return {k: v * c for k, v in p.items()}


def _const(c) -> Poly:
    return {frozenset(): Fraction(c)}


def _false_indicator(lit: int) -> Poly:
    # z = (1 - sign * s_v) / 2
    sign = 1 if lit > 0 else -1
    return {frozenset(): _HALF, frozenset([abs(lit)]): -sign * _HALF}


def _ancilla_bit(index: int) -> Poly:
    return {frozenset(): _HALF, frozenset([index]): -_HALF}


def _to_terms(poly: Poly) -> PenaltyTerms:
    couplings, fields, offset = {}, {}, Fraction(0)
    for key, c in poly.items():
        if c == 0:
            continue
        if len(key) == 0:
            offset += c
        elif len(key) == 1:
            (j,) = key
            fields[j] = -c
        elif len(key) == 2:
            j, k = sorted(key)
            couplings[(j, k)] = -c
        else:  # pragma: no cover - gadgets are quadratic by construction
            raise AssertionError(f"non-quadratic term {sorted(key)}")
    return PenaltyTerms(couplings, fields, offset)


def clause_penalty(literals: Sequence[int], ancilla_index: int | None = None) -> PenaltyTerms:
    """Ising terms of the penalty for one clause of width 1 to 3."""
    literals = [int(x) for x in literals]
    if not 1 <= len(literals) <= 3:
        raise ValueError(f"clause width must be 1..3, got {len(literals)}")
    if 0 in literals:
        raise ValueError("literal 0 is not allowed")
    if len({abs(x) for x in literals}) != len(literals):
        raise ValueError(f"duplicate variables in clause {literals}")
    z = [_false_indicator(x) for x in literals]
    if len(literals) < 3:
        poly = z[0] if len(z) == 1 else _mul(z[0], z[1])
        return _to_terms(poly)
    if ancilla_index is None:
        raise ValueError("a width-3 clause needs an ancilla spin")
    if ancilla_index in {abs(x) for x in literals}:
        raise ValueError("ancilla spin collides with a clause variable")
    s = _add(*z)
    pairs = _add(_mul(z[0], z[1]), _mul(z[0], z[2]), _mul(z[1], z[2]))
    w = _ancilla_bit(ancilla_index)
    poly = _add(pairs, s, _mul(w, _add(_const(1), _scale(s, -2))))
    return _to_terms(poly)


def reduce_3sat(formula: CnfFormula) -> tuple[IsingModel, ReductionMap]:
    """Sum the clause penalties into one Ising model with ``A = 1``."""
    if formula.max_clause_width > 3:
        raise ValueError(f"clause width {formula.max_clause_width} exceeds 3")
    if formula.num_vars < 1:
        raise ValueError("formula needs at least one variable")
    couplings: dict[tuple[int, int], Fraction] = {}
    fields: dict[int, Fraction] = {}
    offset = Fraction(0)
    ancillas: list[int | None] = []
    next_spin = formula.num_vars + 1
    for clause in formula.clauses:
        anc = None
        if len(clause) == 3:
            anc = next_spin
            next_spin += 1
        ancillas.append(anc)
        terms = clause_penalty(clause, anc)
        for key, c in terms.couplings.items():
            couplings[key] = couplings.get(key, Fraction(0)) + c
        for j, b in terms.fields.items():
            fields[j] = fields.get(j, Fraction(0)) + b
        offset += terms.offset
    n = next_spin - 1
    model = IsingModel(
        n=n,
        couplings={k: float(c) for k, c in sorted(couplings.items()) if c != 0},
        fields=tuple(float(fields.get(j, 0)) for j in range(1, n + 1)),
        field_scale=1.0,
        offset=float(offset),
    )
    return model, ReductionMap(formula.num_vars, n, tuple(ancillas))


def decode(config: Sequence[int], reduction_map: ReductionMap) -> tuple[bool, ...]:
    if len(config) != reduction_map.total_spins:
        raise ValueError(f"config has length {len(config)}, expected {reduction_map.total_spins}")
    return tuple(s == 1 for s in config[: reduction_map.formula_vars])


def violation_diagonal(formula: CnfFormula) -> np.ndarray:
    """Number of falsified clauses for every assignment, indexed by packed spin configuration.

    This is the reduced model's energy minimized over all ancillas, expressed
    directly on the formula variables (bit ``j`` = 0 means variable ``j + 1``
    is true).
    """
    idx = np.arange(1 << formula.num_vars, dtype=np.int64)
    out = np.zeros(idx.shape)
    for clause in formula.clauses:
        sat = np.zeros(idx.shape, dtype=bool)
        for lit in clause:
            is_true = ((idx >> (abs(lit) - 1)) & 1) == 0
            sat |= is_true if lit > 0 else ~is_true
        out += ~sat
    return out
