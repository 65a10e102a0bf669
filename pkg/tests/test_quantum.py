import math

import numpy as np
import pytest
import scipy.linalg
from scipy.integrate import solve_ivp

from adiabatic_race.cnf import CnfFormula
from adiabatic_race.ising import IsingModel, energy, ground_states, spins_of_index
from adiabatic_race.quantum import (
    GapError,
    GapProfile,
    HamiltonianSpec,
    NormDriftError,
    QuantumState,
    adiabatic_run,
    apply,
    build_final,
    build_initial,
    estimate_adiabatic_time,
    expectation,
    final_from_diagonal,
    gap_profile,
    interpolate,
    lowest_levels,
    lowest_two,
    propagate,
)
from adiabatic_race.reduction import reduce_3sat
from oracles import dense_hamiltonian, diagonal_from_model_naive, random_spec_args

SINGLE_SPIN = IsingModel(1, {}, (1.0,), 1.0)
FERRO = IsingModel(2, {(1, 2): 1.0}, (0.0, 0.0), 0.0)


def single_clause_model():
    return reduce_3sat(CnfFormula.from_clauses(3, [(1, 2, 3)]))[0]


def random_spec(rng, n):
    diag, w = random_spec_args(rng, n)
    return HamiltonianSpec("interpolated", n, diag, w, 0.5)


class TestState:
    def test_normalization_enforced(self):
        with pytest.raises(ValueError):
            QuantumState(1, np.array([1.0, 1.0]))
        with pytest.raises(ValueError):
            QuantumState(2, np.array([1.0, 0.0]))

    def test_immutable(self):
        s = QuantumState.basis(2, 1)
        with pytest.raises(ValueError):
            s.amplitudes[0] = 1.0


class TestBuild:
    def test_initial_n1(self):
        out = apply(build_initial(1), QuantumState.basis(1, 0))
        assert np.allclose(out, [0, -1])

    def test_initial_n2(self):
        out = apply(build_initial(2), QuantumState.basis(2, 0))
        assert np.allclose(out, [0, -1, -1, 0])

    def test_initial_n3_uniform_expectation(self):
        assert expectation(build_initial(3), QuantumState.uniform(3)) == pytest.approx(-3, abs=1e-14)

    @pytest.mark.parametrize("n", [0, 21])
    def test_initial_range(self, n):
        with pytest.raises(ValueError):
            build_initial(n)

    def test_final_examples(self):
        assert np.array_equal(build_final(SINGLE_SPIN).diagonal, [-1, 1])
        assert np.array_equal(build_final(FERRO).diagonal, [-1, 1, 1, -1])

    def test_final_random_n6_matches_classical_energies(self, rng):
        couplings = {(j, k): rng.normal() for j in range(1, 7) for k in range(j + 1, 7)}
        m = IsingModel(6, couplings, tuple(rng.normal(size=6)), 0.7, 0.3)
        diag = build_final(m).diagonal
        assert np.allclose(diag, diagonal_from_model_naive(m), atol=1e-12, rtol=0)
        assert all(diag[b] == pytest.approx(energy(m, spins_of_index(b, 6))) for b in range(64))

    def test_final_size_limit(self):
        with pytest.raises(ValueError):
            build_final(IsingModel(21))


class TestInterpolate:
    def test_endpoints_operational(self, rng):
        m = IsingModel(3, {(1, 2): 1.0, (2, 3): -0.5}, (0.3, 0.0, -1.0), 1.0)
        h0, h1 = build_initial(3), build_final(m)
        for b in range(8):
            e = QuantumState.basis(3, b)
            assert np.allclose(apply(interpolate(h0, h1, 0.0), e), apply(h0, e), atol=1e-15)
            assert np.allclose(apply(interpolate(h0, h1, 1.0), e), apply(h1, e), atol=1e-15)

    def test_linearity(self, rng):
        m = IsingModel(4, {(1, 3): 0.7}, tuple(rng.normal(size=4)), 1.0)
        h0, h1 = build_initial(4), build_final(m)
        for s in np.linspace(0, 1, 7):
            psi = QuantumState.random(4, rng)
            lhs = expectation(interpolate(h0, h1, s), psi)
            rhs = (1 - s) * expectation(h0, psi) + s * expectation(h1, psi)
            assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_errors(self):
        with pytest.raises(ValueError):
            interpolate(build_initial(1), build_final(SINGLE_SPIN), 1.5)
        with pytest.raises(ValueError):
            interpolate(build_initial(2), build_final(SINGLE_SPIN), 0.5)


class TestApply:
    def test_zero_operator(self, rng):
        zero = HamiltonianSpec("interpolated", 3, np.zeros(8), 0.0, 0.5)
        assert np.all(apply(zero, QuantumState.random(3, rng)) == 0)

    @pytest.mark.parametrize("n", range(1, 9))
    def test_matches_dense_oracle(self, rng, n):
        h = random_spec(rng, n)
        mat = dense_hamiltonian(n, h.diagonal, h.transverse_weight) if n <= 6 else None
        if mat is None:  # the entry-by-entry oracle is O(4^n); for n = 7, 8 use Kronecker products
            x = np.array([[0.0, 1.0], [1.0, 0.0]])
            mat = np.diag(h.diagonal_or_zero())
            for j in range(n):
                mat = mat - h.transverse_weight * np.kron(np.kron(np.eye(2 ** (n - 1 - j)), x), np.eye(2**j))
        psi = QuantumState.random(n, rng)
        assert np.max(np.abs(apply(h, psi) - mat @ psi.amplitudes)) <= 1e-12

    def test_hermiticity(self, rng):
        for n in (2, 5, 8):
            h = random_spec(rng, n)
            phi, psi = QuantumState.random(n, rng), QuantumState.random(n, rng)
            a = np.vdot(phi.amplitudes, apply(h, psi))
            b = np.vdot(psi.amplitudes, apply(h, phi))
            assert abs(a - np.conj(b)) <= 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            apply(build_initial(2), QuantumState.basis(1, 0))


class TestPropagate:
    def test_zero_hamiltonian_identity(self, rng):
        psi = QuantumState.random(3, rng)
        zero = HamiltonianSpec("interpolated", 3, np.zeros(8), 0.0, 0.5)
        out = propagate(lambda t: zero, psi, 0.0, 2.0, 10)
        assert np.allclose(out.amplitudes, psi.amplitudes, atol=1e-15)

    @pytest.mark.parametrize("t", [math.pi / 4, 0.3, 1.7])
    def test_sigma_z_closed_form(self, t):
        sz = HamiltonianSpec("final", 1, np.array([1.0, -1.0]), 0.0)
        out = propagate(lambda _: sz, QuantumState.from_vector([1, 1]), 0.0, t, 7)
        a = out.amplitudes
        sx = 2 * np.real(np.conj(a[0]) * a[1])
        assert sx == pytest.approx(math.cos(2 * t), abs=1e-12)

    @pytest.mark.parametrize("t", [0.25, 1.0, 3.3])
    def test_transverse_closed_form(self, t):
        # H = -X from |0>: <Z>(t) = cos(2t), exercising the polynomial step
        out = propagate(lambda _: build_initial(1), QuantumState.basis(1, 0), 0.0, t, 5)
        a = out.amplitudes
        assert abs(a[0]) ** 2 - abs(a[1]) ** 2 == pytest.approx(math.cos(2 * t), abs=1e-12)

    def test_constant_h_matches_expm(self, rng):
        h = HamiltonianSpec("interpolated", 6, rng.normal(size=64), 0.8, 0.4)
        psi = QuantumState.random(6, rng)
        out = propagate(lambda t: h, psi, 0.0, 1.0, 1000)
        ref = scipy.linalg.expm(-1j * dense_hamiltonian(6, h.diagonal, 0.8)) @ psi.amplitudes
        assert np.max(np.abs(out.amplitudes - ref)) <= 1e-6
        assert out.norm_drift <= 1e-9

    def test_energy_conservation(self, rng):
        h = HamiltonianSpec("interpolated", 5, rng.normal(size=32), 1.1, 0.4)
        psi = QuantumState.random(5, rng)
        out = propagate(lambda t: h, psi, 0.0, 5.0, 50)
        assert abs(expectation(h, out) - expectation(h, psi)) <= 1e-7

    def test_time_dependent_matches_ode_solver(self, rng):
        m = IsingModel(3, {(1, 2): 1.0, (2, 3): -0.6}, (0.4, -0.2, 0.9), 1.0)
        h0, h1 = build_initial(3), build_final(m)
        T = 4.0
        sched = lambda t: interpolate(h0, h1, t / T)
        psi = QuantumState.uniform(3)
        out = propagate(sched, psi, 0.0, T, 2000)
        d0, d1 = dense_hamiltonian(3, None, 1.0), np.diag(h1.diagonal)

        def rhs(t, y):
            s = t / T
            return -1j * (((1 - s) * d0 + s * d1) @ y)

        ref = solve_ivp(rhs, (0, T), psi.amplitudes, rtol=1e-11, atol=1e-12, method="DOP853").y[:, -1]
        assert np.max(np.abs(out.amplitudes - ref)) <= 1e-5

    def test_errors(self, rng):
        h = build_initial(1)
        psi = QuantumState.basis(1, 0)
        with pytest.raises(ValueError):
            propagate(lambda t: h, psi, 0.0, 1.0, 0)
        with pytest.raises(ValueError):
            propagate(lambda t: h, psi, 1.0, 1.0, 3)

    def test_drift_guard(self, monkeypatch):
        import adiabatic_race.quantum as q

        monkeypatch.setattr(q, "_chebyshev_step", lambda h, psi, dt, tol: psi * (1 + 1e-6))
        with pytest.raises(NormDriftError):
            propagate(lambda t: build_initial(1), QuantumState.basis(1, 0), 0.0, 1.0, 2)


class TestSpectrum:
    def test_initial_n1(self):
        assert lowest_two(build_initial(1)) == pytest.approx((-1, 1), abs=1e-14)

    @pytest.mark.parametrize("s", np.linspace(0, 1, 11))
    def test_single_qubit_gap(self, s):
        h = interpolate(build_initial(1), build_final(SINGLE_SPIN), s)
        e0, e1 = lowest_two(h)
        assert e1 - e0 == pytest.approx(2 * math.sqrt((1 - s) ** 2 + s**2), abs=1e-10)

    def test_degenerate_reports_equal_levels(self):
        e0, e1 = lowest_two(build_final(FERRO))
        assert e0 == e1 == -1

    def test_iterative_matches_dense_on_reduced_instance(self, rng):
        from adiabatic_race.cnf import random_3cnf

        model, _ = reduce_3sat(random_3cnf(4, 4, rng))
        assert model.n == 8
        h = interpolate(build_initial(8), build_final(model), 0.6)
        it = lowest_two(h, method="iterative")
        de = scipy.linalg.eigvalsh(dense_hamiltonian(8, h.diagonal, h.transverse_weight))[:2]
        assert np.max(np.abs(np.array(it) - de)) <= 1e-8

    def test_levels_with_multiplicity(self, rng):
        # s = 0 on 4 qubits: -4, then -2 four times
        levels = lowest_levels(build_initial(4), 5, method="iterative")
        assert np.allclose(levels, [-4, -2, -2, -2, -2], atol=1e-9)

    def test_variational_bound(self, rng):
        h = random_spec(rng, 6)
        e0 = lowest_two(h)[0]
        for _ in range(100):
            assert e0 <= expectation(h, QuantumState.random(6, rng)) + 1e-12


class TestGapProfile:
    def test_single_spin(self):
        p = gap_profile(SINGLE_SPIN, 11)
        assert p.argmin_s == pytest.approx(0.5)
        assert p.min_gap == pytest.approx(math.sqrt(2), abs=1e-10)
        assert all(g == pytest.approx(e1 - e0) and g >= 0 for _, e0, e1, g in p.samples)

    def test_gap_at_zero_is_two(self, rng):
        for m in (SINGLE_SPIN, FERRO, single_clause_model()):
            assert gap_profile(m, 3, track_degeneracy=False).samples[0][3] == pytest.approx(2, abs=1e-9)
        # tracked gap is also 2 at s = 0 whenever the final degeneracy d is at most n
        p = gap_profile(FERRO, 3)
        assert p.final_degeneracy == 2 and p.samples[0][3] == pytest.approx(2, abs=1e-9)

    def test_literal_gap_closes_for_degenerate_final(self):
        p = gap_profile(single_clause_model(), 5, track_degeneracy=False)
        assert p.samples[-1][3] == 0
        with pytest.raises(GapError):
            estimate_adiabatic_time(p)

    def test_tracked_gap_positive_for_reduced_instance(self):
        p = gap_profile(single_clause_model(), 21)
        assert p.final_degeneracy == 7
        assert p.min_gap > 0 and p.samples[-1][3] == pytest.approx(1.0)

    def test_refinement_never_increases_min_gap(self, rng):
        from adiabatic_race.cnf import random_3cnf

        model, _ = reduce_3sat(random_3cnf(4, 2, rng))
        # a grid of 2k - 1 points contains the k-point grid
        for k in (3, 6, 11):
            assert gap_profile(model, 2 * k - 1).min_gap <= gap_profile(model, k).min_gap + 1e-12

    def test_csv(self):
        text = gap_profile(SINGLE_SPIN, 3).to_csv()
        lines = text.splitlines()
        assert lines[0] == "s,e0,e1,gap" and len(lines) == 4
        assert lines[2].split(",")[3] == f"{math.sqrt(2):.12g}"

    def test_all_ground_final(self):
        p = gap_profile(final_from_diagonal(np.zeros(4)), 3)
        assert math.isinf(p.min_gap) and estimate_adiabatic_time(p) == 0.0

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            gap_profile(SINGLE_SPIN, 2)


class TestEstimate:
    def test_examples(self):
        assert estimate_adiabatic_time(math.sqrt(2), 10) == pytest.approx(5)
        assert estimate_adiabatic_time(0.25) == pytest.approx(4 * estimate_adiabatic_time(0.5))
        profile = GapProfile(((0.0, -1.0, 1.0, 2.0), (1.0, -1.0, -1.0, 0.0)))
        with pytest.raises(GapError):
            estimate_adiabatic_time(profile)
        with pytest.raises(ValueError):
            estimate_adiabatic_time(1.0, c=0)


class TestAdiabaticRun:
    def test_sudden_limit(self):
        m = single_clause_model()
        d = ground_states(m).degeneracy
        for t, steps in ((0.0, 1), (1e-12, 1)):
            r = adiabatic_run(m, t, steps)
            assert r.success_prob == pytest.approx(d / 16, abs=1e-9)

    def test_single_clause_success(self):
        m = single_clause_model()
        T = estimate_adiabatic_time(gap_profile(m, 41))
        r = adiabatic_run(m, T)
        assert r.success_prob >= 0.9
        assert r.steps == 1000 and r.degeneracy == 7
        assert abs(np.linalg.norm(r.final_state.amplitudes) - 1) <= 1e-9 and r.norm_drift <= 1e-9

    def test_monotone_trend(self):
        m = single_clause_model()
        T = estimate_adiabatic_time(gap_profile(m, 41))
        probs = [adiabatic_run(m, k * T).success_prob for k in (1, 2, 4)]
        assert probs[1] >= probs[0] - 0.02 and probs[2] >= probs[1] - 0.02

    def test_accepts_diagonal_final(self):
        r = adiabatic_run(final_from_diagonal([0.0, 1.0, 1.0, 2.0]), 20.0)
        assert r.success_prob > 0.9 and r.steps == 2000

    def test_custom_schedule(self):
        m = single_clause_model()
        smooth = lambda u: u * u * (3 - 2 * u)
        r = adiabatic_run(m, 10.0, schedule=smooth)
        assert 0 <= r.success_prob <= 1

    def test_negative_time(self):
        with pytest.raises(ValueError):
            adiabatic_run(SINGLE_SPIN, -1.0)
