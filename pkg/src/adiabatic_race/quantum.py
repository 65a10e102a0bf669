"""State-vector simulation of the transverse-field adiabatic interpolation.

Every Hamiltonian here has the form

    H = -w * sum_j X_j + diag(D)

with ``w`` the transverse weight and ``D`` a real diagonal in the
computational basis.  Basis index ``b``: bit ``j`` of ``b`` is 0 iff spin
``j + 1`` is +1 (little-endian, bit 0 = spin 1).  Units are natural
(hbar = 1).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg
import scipy.sparse.linalg
from scipy.special import jv

from .ising import IsingModel, all_energies

log = logging.getLogger(__name__)

MAX_QUBITS = 20
NORM_TOL = 1e-9
DENSE_MAX_QUBITS = 12
MAX_TRACKED_LEVELS = 64  # Lanczos beyond this many levels is impractical above 10 qubits


class EigensolverError(RuntimeError):
    pass


class GapError(ValueError):
    pass


class NormDriftError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class QuantumState:
    n_qubits: int
    amplitudes: np.ndarray
    norm_drift: float = 0.0

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amplitudes, dtype=complex)
        if amps.shape != (1 << self.n_qubits,):
            raise ValueError(f"expected {1 << self.n_qubits} amplitudes, got shape {amps.shape}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm = {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_vector(cls, vec, normalize: bool = True) -> "QuantumState":
        vec = np.asarray(vec, dtype=complex)
        n = int(round(math.log2(len(vec))))
        if normalize:
            vec = vec / np.linalg.norm(vec)
        return cls(n, vec)

    @classmethod
    def basis(cls, n: int, index: int) -> "QuantumState":
        vec = np.zeros(1 << n, dtype=complex)
        vec[index] = 1.0
        return cls(n, vec)

    @classmethod
    def uniform(cls, n: int) -> "QuantumState":
        return cls(n, np.full(1 << n, (1 << n) ** -0.5, dtype=complex))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "QuantumState":
        vec = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
        return cls.from_vector(vec)


@dataclass(frozen=True, eq=False)
class HamiltonianSpec:
    kind: str
    n: int
    diagonal: np.ndarray | None = None
    transverse_weight: float = 0.0
    s: float | None = None

    def __post_init__(self):
        if self.kind not in ("initial", "final", "interpolated"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.diagonal is not None:
            diag = np.asarray(self.diagonal, dtype=float)
            if diag.shape != (1 << self.n,):
                raise ValueError(f"diagonal must have length {1 << self.n}")
            diag.setflags(write=False)
            object.__setattr__(self, "diagonal", diag)

    @property
    def dim(self) -> int:
        return 1 << self.n

    def diagonal_or_zero(self) -> np.ndarray:
        return np.zeros(self.dim) if self.diagonal is None else self.diagonal

    def spectral_bounds(self) -> tuple[float, float]:
        """Gershgorin interval containing the whole spectrum."""
        d = self.diagonal_or_zero()
        r = abs(self.transverse_weight) * self.n
        return float(d.min()) - r, float(d.max()) + r


def _check_n(n: int):
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"qubit count must be in [1, {MAX_QUBITS}], got {n}")


def build_initial(n: int) -> HamiltonianSpec:
    _check_n(n)
    return HamiltonianSpec("initial", n, None, 1.0)


def build_final(model: IsingModel) -> HamiltonianSpec:
    _check_n(model.n)
    return HamiltonianSpec("final", model.n, all_energies(model), 0.0)


def final_from_diagonal(diagonal) -> HamiltonianSpec:
    diagonal = np.asarray(diagonal, dtype=float)
    n = int(round(math.log2(len(diagonal))))
    _check_n(n)
    return HamiltonianSpec("final", n, diagonal, 0.0)


def interpolate(h0: HamiltonianSpec, h1: HamiltonianSpec, s: float) -> HamiltonianSpec:
    """``(1 - s) h0 + s h1`` for a transverse-only ``h0`` and a diagonal ``h1``."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s must lie in [0, 1], got {s}")
    if h0.n != h1.n:
        raise ValueError(f"dimension mismatch: {h0.n} vs {h1.n} qubits")
    if h0.diagonal is not None or h1.transverse_weight != 0.0:
        raise ValueError("interpolate expects a transverse-only start and a diagonal end")
    diag = None if h1.diagonal is None else s * h1.diagonal
    return HamiltonianSpec("interpolated", h0.n, diag, (1.0 - s) * h0.transverse_weight, float(s))


def apply_vector(h: HamiltonianSpec, psi: np.ndarray) -> np.ndarray:
    if psi.shape != (h.dim,):
        raise ValueError(f"vector of length {len(psi)} does not match {h.n} qubits")
    out = psi * h.diagonal if h.diagonal is not None else np.zeros_like(psi)
    w = h.transverse_weight
    if w != 0.0:
        acc = np.zeros_like(psi)
        for j in range(h.n):
            acc += psi.reshape(-1, 2, 1 << j)[:, ::-1, :].reshape(-1)
        out -= w * acc
    return out


def apply(h: HamiltonianSpec, state: QuantumState) -> np.ndarray:
    """``H psi`` without materializing the matrix."""
    if state.n_qubits != h.n:
        raise ValueError(f"state has {state.n_qubits} qubits, Hamiltonian has {h.n}")
    return apply_vector(h, state.amplitudes)


def expectation(h: HamiltonianSpec, state: QuantumState) -> float:
    return float(np.vdot(state.amplitudes, apply(h, state)).real)


def to_dense(h: HamiltonianSpec) -> np.ndarray:
    if h.n > DENSE_MAX_QUBITS:
        raise ValueError(f"refusing to materialize a {h.dim}x{h.dim} matrix")
    mat = np.diag(h.diagonal_or_zero()).astype(float)
    if h.transverse_weight != 0.0:
        x = np.array([[0.0, 1.0], [1.0, 0.0]])
        for j in range(h.n):
            mat -= h.transverse_weight * np.kron(np.kron(np.eye(1 << (h.n - 1 - j)), x), np.eye(1 << j))
    return mat


# --------------------------------------------------------------------------- time evolution


def _chebyshev_step(h: HamiltonianSpec, psi: np.ndarray, dt: float, tol: float) -> np.ndarray:
    """``exp(-i dt H) psi`` by a Chebyshev series whose degree adapts to ``dt * |H|``."""
    if h.transverse_weight == 0.0:
        return np.exp(-1j * dt * h.diagonal_or_zero()) * psi
    lo, hi = h.spectral_bounds()
    center, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
    beta = half * dt
    kmax = int(beta) + 40
    coef = jv(np.arange(kmax + 1), beta)
    while abs(coef[-1]) > tol * 1e-3 or abs(coef[-2]) > tol * 1e-3:
        kmax *= 2
        coef = jv(np.arange(kmax + 1), beta)
    tail = np.flatnonzero(np.abs(coef) > tol * 1e-3)
    degree = int(tail[-1]) + 1 if len(tail) else 1

    def hhat(v):
        return (apply_vector(h, v) - center * v) / half

    prev, cur = psi, hhat(psi)
    out = coef[0] * prev + 2 * (-1j) * coef[1] * cur
    phase = -1j
    for k in range(2, degree + 1):
        prev, cur = cur, 2 * hhat(cur) - prev
        phase *= -1j
        out += 2 * phase * coef[k] * cur
    return np.exp(-1j * center * dt) * out


def propagate(
    schedule: Callable[[float], HamiltonianSpec],
    state0: QuantumState,
    t0: float,
    t1: float,
    steps: int,
    tol: float = 1e-14,
) -> QuantumState:
    """Time-ordered evolution from ``t0`` to ``t1`` with ``H`` frozen at each step midpoint.

    The result is renormalized; the norm error accumulated before renormalizing
    is stored in ``norm_drift`` and must not exceed ``NORM_TOL``.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if not t1 > t0:
        raise ValueError("t1 must be greater than t0")
    if abs(np.linalg.norm(state0.amplitudes) - 1.0) > NORM_TOL:
        raise ValueError("initial state is not normalized")
    dt = (t1 - t0) / steps
    psi = state0.amplitudes.copy()
    for k in range(steps):
        h = schedule(t0 + (k + 0.5) * dt)
        if h.n != state0.n_qubits:
            raise ValueError("schedule Hamiltonian does not match the state size")
        psi = _chebyshev_step(h, psi, dt, tol)
    norm = float(np.linalg.norm(psi))
    drift = abs(norm - 1.0)
    if drift > NORM_TOL:
        raise NormDriftError(f"norm drift {drift:.3e} exceeds {NORM_TOL}")
    return QuantumState(state0.n_qubits, psi / norm, drift)


# --------------------------------------------------------------------------- spectra


def lowest_levels(h: HamiltonianSpec, k: int = 2, tol: float = 0.0, method: str = "auto", maxiter: int | None = None) -> np.ndarray:
    """The ``k`` smallest eigenvalues, ascending, counted with multiplicity.

    ``method`` is ``"dense"``, ``"iterative"`` (implicitly restarted Lanczos on
    the matrix-free operator) or ``"auto"``.
    """
    if k < 1 or k > h.dim:
        raise ValueError(f"cannot take {k} levels of a {h.dim}-dimensional operator")
    if h.transverse_weight == 0.0:
        return np.sort(h.diagonal_or_zero())[:k]
    if method == "auto":
        method = "dense" if h.n <= 6 or (h.n <= 10 and k > 8) else "iterative"
    if method == "iterative" and k >= h.dim - 1:
        method = "dense"
    if method == "dense":
        return scipy.linalg.eigh(to_dense(h), eigvals_only=True, subset_by_index=(0, k - 1))
    if method != "iterative":
        raise ValueError(f"unknown method {method!r}")
    op = scipy.sparse.linalg.LinearOperator(
        (h.dim, h.dim), matvec=lambda v: apply_vector(h, np.asarray(v, dtype=float).ravel()), dtype=float
    )
    v0 = np.linspace(1.0, 2.0, h.dim)  # deterministic start, overlaps every level generically
    ncv = min(h.dim, max(2 * k + 1, 20))
    try:
        vals = scipy.sparse.linalg.eigsh(
            op, k=k, which="SA", v0=v0, ncv=ncv, tol=tol, maxiter=maxiter or 100 * h.dim, return_eigenvectors=False
        )
    except scipy.sparse.linalg.ArpackNoConvergence as exc:
        raise EigensolverError(f"Lanczos did not converge for {k} levels ({len(exc.eigenvalues)} found)") from exc
    return np.sort(vals)


def lowest_two(h: HamiltonianSpec, tol: float = 0.0, method: str = "auto") -> tuple[float, float]:
    e = lowest_levels(h, 2, tol=tol, method=method)
    return float(e[0]), float(e[1])


@dataclass(frozen=True)
class GapProfile:
    samples: tuple[tuple[float, float, float, float], ...]
    failed: tuple[float, ...] = ()
    final_degeneracy: int = 1
    tracks_degeneracy: bool = False

    @property
    def min_gap(self) -> float:
        return min(g for _, _, _, g in self.samples)

    @property
    def argmin_s(self) -> float:
        return min(self.samples, key=lambda row: row[3])[0]

    def to_csv(self) -> str:
        lines = ["s,e0,e1,gap"]
        lines += [",".join(f"{x:.12g}" for x in row) for row in self.samples]
        return "\n".join(lines) + "\n"


def _as_final(problem) -> HamiltonianSpec:
    if isinstance(problem, HamiltonianSpec):
        if problem.transverse_weight != 0.0 or problem.diagonal is None:
            raise ValueError("expected a diagonal final Hamiltonian")
        return problem
    return build_final(problem)


def ground_subspace(final: HamiltonianSpec, tol: float = 1e-9) -> np.ndarray:
    """Basis indices spanning the (possibly degenerate) ground space of a diagonal Hamiltonian."""
    d = final.diagonal
    return np.flatnonzero(d <= d.min() + tol)


def gap_profile(problem, num_samples: int, track_degeneracy: bool = True, method: str = "auto") -> GapProfile:
    """Sample the spectral gap of ``H(s)`` on a uniform grid ``s in [0, 1]``.

    ``problem`` is an :class:`IsingModel` or a diagonal final
    :class:`HamiltonianSpec`.  With ``track_degeneracy`` the upper level is the
    first one above the ``d`` levels that merge into the ``d``-fold degenerate
    final ground space (``E_d - E_0``); without it, it is the literal second
    eigenvalue (``E_1 - E_0``), which closes at ``s = 1`` whenever ``d > 1``.
    """
    if num_samples < 3:
        raise ValueError("num_samples must be >= 3")
    final = _as_final(problem)
    initial = build_initial(final.n)
    d = len(ground_subspace(final)) if track_degeneracy else 1
    if d + 1 > MAX_TRACKED_LEVELS and final.n > 10 and d < final.dim:
        raise EigensolverError(f"final ground space is {d}-fold degenerate; tracking more than {MAX_TRACKED_LEVELS} levels is not supported")
    samples, failed = [], []
    for s in np.linspace(0.0, 1.0, num_samples):
        h = interpolate(initial, final, float(s))
        if d >= h.dim:
            e0 = float(lowest_levels(h, 1, method=method)[0])
            samples.append((float(s), e0, math.inf, math.inf))
            continue
        try:
            levels = lowest_levels(h, d + 1, method=method)
        except EigensolverError as exc:
            log.warning("gap sample at s=%g failed: %s", s, exc)
            failed.append(float(s))
            continue
        e0, e1 = float(levels[0]), float(levels[d])
        samples.append((float(s), e0, e1, max(e1 - e0, 0.0)))
    if len(samples) < 0.8 * num_samples:
        raise EigensolverError(f"{len(failed)} of {num_samples} gap samples failed")
    return GapProfile(tuple(samples), tuple(failed), d, track_degeneracy)


def estimate_adiabatic_time(profile: GapProfile | float, c: float = 10.0) -> float:
    """``c / g_min**2``, the usual first-order adiabatic criterion."""
    if c <= 0:
        raise ValueError("c must be positive")
    g = profile.min_gap if isinstance(profile, GapProfile) else float(profile)
    if not g > 0 or math.isnan(g):
        raise GapError(f"minimum gap {g} is not positive; no adiabatic time exists")
    if math.isinf(g):
        return 0.0
    return c / g**2


# --------------------------------------------------------------------------- adiabatic run


@dataclass(frozen=True)
class AdiabaticResult:
    final_state: QuantumState
    success_prob: float
    t_adiabatic: float
    steps: int
    degeneracy: int = 1
    norm_drift: float = field(default=0.0)

    def to_dict(self) -> dict:
        return {
            "t_adiabatic": self.t_adiabatic,
            "steps": self.steps,
            "success_prob": self.success_prob,
            "norm_drift": self.norm_drift,
            "degeneracy": self.degeneracy,
        }


def default_steps(t_adiabatic: float) -> int:
    return max(1000, math.ceil(100 * t_adiabatic))


def linear_schedule(u: float) -> float:
    return u


def adiabatic_run(
    problem,
    t_adiabatic: float,
    steps: int | None = None,
    schedule: Callable[[float], float] = linear_schedule,
) -> AdiabaticResult:
    """Evolve the uniform superposition under ``H(s(t))`` for time ``t_adiabatic``.

    ``schedule`` maps the fraction ``t / t_adiabatic`` to ``s``.  A zero
    duration is the sudden limit: the initial state is returned unchanged.
    """
    if t_adiabatic < 0:
        raise ValueError("t_adiabatic must be non-negative")
    final = _as_final(problem)
    initial = build_initial(final.n)
    steps = default_steps(t_adiabatic) if steps is None else int(steps)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    psi0 = QuantumState.uniform(final.n)
    if t_adiabatic == 0.0:
        state = psi0
    else:
        state = propagate(
            lambda t: interpolate(initial, final, min(max(schedule(t / t_adiabatic), 0.0), 1.0)),
            psi0, 0.0, t_adiabatic, steps,
        )
    ground = ground_subspace(final)
    prob = float(np.sum(np.abs(state.amplitudes[ground]) ** 2))
    return AdiabaticResult(state, min(prob, 1.0), float(t_adiabatic), steps, len(ground), state.norm_drift)
