"""Environment tracing: reduced density matrices, their mixedness, and a dephasing toy model.

A pure total state is written as ``|Phi> = sum_n c_n |n>_C |eps_n>_E`` where
``|n>`` runs over the computational basis of the collective qubits.  Tracing
out E gives ``rho_C[n, m] = c_n conj(c_m) <eps_m|eps_n>``; once the
conditional environment states are orthogonal, the off-diagonal entries vanish
and only the populations ``|c_n|**2`` survive.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .quantum import HamiltonianSpec, QuantumState, propagate

MAX_COLLECTIVE = 10
MAX_DEPHASING_QUBITS = 16
HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class Partition:
    n_total: int
    collective_qubits: tuple[int, ...]

    def __post_init__(self):
        cq = tuple(int(q) for q in self.collective_qubits)
        if len(set(cq)) != len(cq):
            raise ValueError("collective qubits must be distinct")
        if any(not 1 <= q <= self.n_total for q in cq):
            raise ValueError(f"collective qubits must lie in 1..{self.n_total}")
        if not 1 <= len(cq) <= MAX_COLLECTIVE:
            raise ValueError(f"collective system must have 1..{MAX_COLLECTIVE} qubits")
        object.__setattr__(self, "collective_qubits", cq)

    @property
    def environment_qubits(self) -> tuple[int, ...]:
        return tuple(q for q in range(1, self.n_total + 1) if q not in self.collective_qubits)

    @property
    def dim_collective(self) -> int:
        return 1 << len(self.collective_qubits)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    entries: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.entries, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError("density matrix must be square")
        if np.max(np.abs(rho - rho.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1.0) > HERMITIAN_TOL:
            raise ValueError(f"density matrix trace is {np.trace(rho)}")
        if np.linalg.eigvalsh(rho).min() < -HERMITIAN_TOL:
            raise ValueError("density matrix has a negative eigenvalue")
        rho.setflags(write=False)
        object.__setattr__(self, "entries", rho)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def to_json(self) -> str:
        return json.dumps([[[float(z.real), float(z.imag)] for z in row] for row in self.entries])

    @classmethod
    def from_json(cls, text: str) -> "DensityMatrix":
        data = np.asarray(json.loads(text), dtype=float)
        return cls(data[..., 0] + 1j * data[..., 1])


def _branch_matrix(state: QuantumState, partition: Partition) -> np.ndarray:
    """``M[n, e]`` = amplitude of collective index ``n`` and environment index ``e``."""
    if state.n_qubits != partition.n_total:
        raise ValueError(f"state has {state.n_qubits} qubits, partition expects {partition.n_total}")
    n = state.n_qubits
    tensor = state.amplitudes.reshape((2,) * n)
    # tensor axis n - q holds qubit q; the last listed axis becomes the least significant bit
    axes = [n - q for q in reversed(partition.collective_qubits)]
    axes += [n - q for q in reversed(partition.environment_qubits)]
    return tensor.transpose(axes).reshape(partition.dim_collective, -1)


def partial_trace(state: QuantumState, partition: Partition) -> DensityMatrix:
    m = _branch_matrix(state, partition)
    return DensityMatrix(m @ m.conj().T)


def purity(rho: DensityMatrix) -> float:
    return float(np.real(np.vdot(rho.entries, rho.entries)))


def entropy(rho: DensityMatrix) -> float:
    """Von Neumann entropy in bits."""
    lam = np.linalg.eigvalsh(rho.entries)
    lam = lam[lam > 1e-15]
    return float(max(0.0, -np.sum(lam * np.log2(lam))))


def max_offdiag(rho: DensityMatrix) -> float:
    off = rho.entries - np.diag(np.diag(rho.entries))
    return float(np.abs(off).max(initial=0.0))


@dataclass(frozen=True, eq=False)
class EnvGram:
    """Overlaps ``gram[n, m] = <eps_n|eps_m>`` of the normalized conditional environment states.

    ``coefficients[n]`` is the complex branch amplitude ``c_n``; its phase is
    chosen so that every ``<eps_ref|eps_n>`` is real and non-negative.
    Entries touching a branch with zero weight are NaN and ``defined[n]`` is
    False for it.
    """

    gram: np.ndarray
    coefficients: np.ndarray
    defined: np.ndarray


def env_gram(state: QuantumState, partition: Partition, tol: float = 1e-14) -> EnvGram:
    m = _branch_matrix(state, partition)
    weight = np.linalg.norm(m, axis=1)
    defined = weight > tol
    eps = np.zeros_like(m)
    eps[defined] = m[defined] / weight[defined, None]
    # branch phases go into c_n: <eps_ref|eps_n> is made real and non-negative,
    # where ref is the heaviest branch (falls back to the largest component)
    ref = eps[int(np.argmax(weight))]
    phase = np.ones(len(m), dtype=complex)
    for i in np.flatnonzero(defined):
        z = np.vdot(ref, eps[i])
        if abs(z) < 1e-12:
            z = eps[i][int(np.argmax(np.abs(eps[i])))]
        phase[i] = z / abs(z)
    eps = eps / phase[:, None]
    c = weight * phase
    gram = eps.conj() @ eps.T
    for i in range(len(gram)):
        if defined[i]:
            gram[i, i] = 1.0
    gram[~defined, :] = np.nan
    gram[:, ~defined] = np.nan
    return EnvGram(gram, c, defined)


def dephasing_couplings(n_collective: int, n_env: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.uniform(0.5, 1.5, size=(n_collective, n_env))


def dephasing_hamiltonian(couplings: np.ndarray) -> HamiltonianSpec:
    """Diagonal ``sum_{j in C, k in E} g_jk Z_j Z_k``; C occupies the low qubits."""
    n_c, n_e = couplings.shape
    n = n_c + n_e
    idx = np.arange(1 << n)
    z = 1.0 - 2.0 * ((idx[:, None] >> np.arange(n)) & 1)
    diag = np.einsum("bj,jk,bk->b", z[:, :n_c], couplings, z[:, n_c:])
    return HamiltonianSpec("final", n, diag, 0.0)


def dephasing_initial(n_collective: int, n_env: int) -> QuantumState:
    # |+...+>_C (x) |+...+>_E ; an environment prepared in a Z eigenstate would never entangle under ZZ
    return QuantumState.uniform(n_collective + n_env)


def dephasing_run(
    n_collective: int,
    n_env: int,
    coupling_seed: int,
    t: float,
    steps: int,
    couplings: np.ndarray | None = None,
) -> list[tuple[float, float, float, float]]:
    """Trajectory ``(time, purity, entropy, max_offdiag)`` of the collective qubits at ``steps + 1`` times."""
    if n_collective < 1 or n_env < 0 or n_collective + n_env > MAX_DEPHASING_QUBITS:
        raise ValueError(f"need 1 <= n_collective and n_collective + n_env <= {MAX_DEPHASING_QUBITS}")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if t < 0:
        raise ValueError("t must be non-negative")
    g = dephasing_couplings(n_collective, n_env, coupling_seed) if couplings is None else np.asarray(couplings, float)
    h = dephasing_hamiltonian(g)
    partition = Partition(n_collective + n_env, tuple(range(1, n_collective + 1)))
    state = dephasing_initial(n_collective, n_env)
    times = np.linspace(0.0, t, steps + 1)
    rows = []
    for k, tk in enumerate(times):
        if k > 0 and tk > times[k - 1]:
            state = propagate(lambda _: h, state, float(times[k - 1]), float(tk), 1)
        rho = partial_trace(state, partition)
        rows.append((float(tk), purity(rho), entropy(rho), max_offdiag(rho)))
    return rows


def dephasing_populations(
    n_collective: int, n_env: int, coupling_seed: int, t: float, steps: int
) -> np.ndarray:
    """Diagonal of ``rho_C`` at each recorded time, shape ``(steps + 1, 2**n_collective)``."""
    g = dephasing_couplings(n_collective, n_env, coupling_seed)
    h = dephasing_hamiltonian(g)
    partition = Partition(n_collective + n_env, tuple(range(1, n_collective + 1)))
    state = dephasing_initial(n_collective, n_env)
    times = np.linspace(0.0, t, steps + 1)
    pops = [np.real(np.diag(partial_trace(state, partition).entries))]
    for a, b in zip(times[:-1], times[1:]):
        state = propagate(lambda _: h, state, float(a), float(b), 1)
        pops.append(np.real(np.diag(partial_trace(state, partition).entries)))
    return np.array(pops)


def trajectory_csv(rows) -> str:
    lines = ["t,purity,entropy,max_offdiag"]
    lines += [",".join(f"{x:.12g}" for x in row) for row in rows]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class Recovery:
    state: QuantumState
    amplitudes_required: int


def recover_information(state_total: QuantumState, partition: Partition | None = None) -> Recovery:
    """Return the total state unchanged, with the number of amplitudes needed to hold it."""
    if partition is not None and partition.n_total != state_total.n_qubits:
        raise ValueError("partition does not match the state")
    return Recovery(state_total, 1 << state_total.n_qubits)
