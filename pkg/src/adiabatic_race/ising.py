"""Classical Ising energy function and its exhaustive ground-state analysis.

    E(sigma) = - sum_{j<k} C_jk s_j s_k  -  A sum_j B_j s_j  +  offset

Spin indices are 1-based in the public API.  When configurations are packed
into integers, bit ``j - 1`` equal to 0 means ``s_j = +1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

MAX_GROUND_SPINS = 24
_CHUNK = 1 << 18


@dataclass(frozen=True)
class IsingModel:
    n: int
    couplings: Mapping[tuple[int, int], float] = field(default_factory=dict)
    fields: tuple[float, ...] = ()
    field_scale: float = 1.0
    offset: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("an Ising model needs at least one spin")
        fields = tuple(float(b) for b in self.fields) if self.fields else (0.0,) * self.n
        if len(fields) != self.n:
            raise ValueError(f"expected {self.n} fields, got {len(fields)}")
        couplings = {}
        for (j, k), c in dict(self.couplings).items():
            j, k = int(j), int(k)
            if not 1 <= j < k <= self.n:
                raise ValueError(f"coupling key ({j}, {k}) must satisfy 1 <= j < k <= {self.n}")
            couplings[(j, k)] = float(c)
        object.__setattr__(self, "fields", fields)
        object.__setattr__(self, "couplings", couplings)
        object.__setattr__(self, "field_scale", float(self.field_scale))
        object.__setattr__(self, "offset", float(self.offset))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "A": self.field_scale,
            "B": list(self.fields),
            "C": [[j, k, c] for (j, k), c in sorted(self.couplings.items())],
            "offset": self.offset,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "IsingModel":
        try:
            couplings: dict[tuple[int, int], float] = {}
            for j, k, c in data.get("C", []):
                key = (int(j), int(k))
                if key in couplings:
                    raise ValueError(f"duplicate coupling {key}")
                couplings[key] = float(c)
            return cls(
                n=int(data["n"]),
                couplings=couplings,
                fields=tuple(data.get("B", ())),
                field_scale=data.get("A", 1.0),
                offset=data.get("offset", 0.0),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"bad Ising JSON: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "IsingModel":
        return cls.from_dict(json.loads(text))

    def shifted(self, delta: float) -> "IsingModel":
        return IsingModel(self.n, self.couplings, self.fields, self.field_scale, self.offset + delta)


@dataclass(frozen=True)
class GroundResult:
    energy: float
    configs: tuple[tuple[int, ...], ...]

    @property
    def degeneracy(self) -> int:
        return len(self.configs)


def _check_config(model: IsingModel, config: Sequence[int]):
    if len(config) != model.n:
        raise ValueError(f"config has length {len(config)}, model has {model.n} spins")
    if any(s not in (-1, 1) for s in config):
        raise ValueError("spins must be exactly -1 or +1")


def energy(model: IsingModel, config: Sequence[int]) -> float:
    _check_config(model, config)
    s = np.asarray(config, dtype=float)
    e = -model.field_scale * float(np.dot(model.fields, s))
    for (j, k), c in model.couplings.items():
        e -= c * s[j - 1] * s[k - 1]
    return e + model.offset


def spins_of_index(index: int, n: int) -> tuple[int, ...]:
    return tuple(-1 if (index >> j) & 1 else 1 for j in range(n))


def index_of_spins(config: Sequence[int]) -> int:
    return sum(1 << j for j, s in enumerate(config) if s == -1)


def energies_range(model: IsingModel, start: int, stop: int) -> np.ndarray:
    """Energies of the packed configurations ``start .. stop-1``."""
    idx = np.arange(start, stop, dtype=np.int64)
    spins = 1.0 - 2.0 * ((idx[:, None] >> np.arange(model.n)) & 1)
    e = -model.field_scale * (spins @ np.asarray(model.fields))
    for (j, k), c in model.couplings.items():
        e -= c * spins[:, j - 1] * spins[:, k - 1]
    return e + model.offset


def all_energies(model: IsingModel) -> np.ndarray:
    """Energy of every configuration, indexed by packed configuration."""
    total = 1 << model.n
    return np.concatenate([energies_range(model, lo, min(lo + _CHUNK, total)) for lo in range(0, total, _CHUNK)])


def ground_states(model: IsingModel, tol: float = 1e-9) -> GroundResult:
    """Exact minimum and all minimizers by full enumeration.

    Configurations within ``tol`` of the minimum count as degenerate; they are
    listed lexicographically with +1 ordered before -1.
    """
    if model.n > MAX_GROUND_SPINS:
        raise ValueError(f"{model.n} spins exceeds the enumeration limit of {MAX_GROUND_SPINS}")
    total = 1 << model.n
    chunks = [(lo, min(lo + _CHUNK, total)) for lo in range(0, total, _CHUNK)]
    if len(chunks) == 1:
        e = energies_range(model, 0, total)
        best = float(e.min())
        idx = np.flatnonzero(e <= best + tol)
    else:
        best = min(float(energies_range(model, lo, hi).min()) for lo, hi in chunks)
        idx = np.concatenate([lo + np.flatnonzero(energies_range(model, lo, hi) <= best + tol) for lo, hi in chunks])
    configs = sorted((spins_of_index(int(i), model.n) for i in idx), key=lambda c: tuple(-s for s in c))
    return GroundResult(best, tuple(configs))


def has_zero_ground(model: IsingModel, tol: float = 1e-9) -> bool:
    if tol < 0:
        raise ValueError("tol must be non-negative")
    return abs(ground_states(model).energy) <= tol
