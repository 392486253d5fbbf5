"""Propagators, the switching protocol and the RK4 on-phase integrators."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gauss_engine import EngineConfig, build_engine, initial_state
from gauss_engine.dynamics import (
    DriveProtocol,
    Propagator,
    bump_derivative,
    bump_value,
    constant_propagator,
    cycle_propagator,
    evolve,
    potential_at,
    prepare_cycle,
    propagate_driven,
    propagate_driven_lab,
    symplecticity_defect,
)
from gauss_engine.errors import LayoutMismatchError, SymplecticityLostError
from gauss_engine.gaussian import (
    GaussianState,
    ModeLayout,
    build_hamiltonian,
    symplectic_eigenvalues,
    thermal_state,
)


@pytest.fixture(scope="module")
def protocol():
    return build_engine(EngineConfig(n_bath=3)).protocol


@pytest.fixture(scope="module")
def small_model():
    return build_engine(EngineConfig(n_bath=8))


def single(w=1.0):
    return build_hamiltonian(ModeLayout(("x",)), [[w * w]])


class TestBump:
    def test_values(self, protocol):
        p = protocol
        assert bump_value(p, 0.0) == 0.0
        assert bump_value(p, p.delta / 2) == pytest.approx(0.5, abs=1e-15)
        assert bump_value(p, p.t_on / 2) == 1.0
        assert bump_value(p, p.t_on) == 0.0
        assert bump_value(p, p.t_on + 0.3 * p.t_off) == 0.0

    def test_range_and_continuity(self, protocol):
        t = np.linspace(0, 2 * protocol.period, 20001)
        f = bump_value(protocol, t)
        assert f.min() >= 0.0 and f.max() <= 1.0
        assert np.max(np.abs(np.diff(f))) < 0.01

    def test_periodic(self, protocol):
        t = np.linspace(0, protocol.period, 101)
        assert np.max(np.abs(bump_value(protocol, t + 5 * protocol.period) - bump_value(protocol, t))) < 1e-12

    def test_fall_mirrors_rise(self, protocol):
        u = np.linspace(0.01, protocol.delta - 0.01, 50)
        assert np.allclose(bump_value(protocol, u), bump_value(protocol, protocol.t_on - u), atol=1e-12)

    def test_derivative_matches_finite_differences(self, protocol):
        t = np.linspace(0.05, protocol.t_on - 0.05, 400)
        h = 1e-6
        fd = (bump_value(protocol, t + h) - bump_value(protocol, t - h)) / (2 * h)
        assert np.max(np.abs(fd - bump_derivative(protocol, t))) < 1e-6

    def test_derivative_integrates_to_one_over_the_rise(self, protocol):
        from scipy.integrate import simpson

        t = np.linspace(0, protocol.t_on, 4001)
        rise = t <= protocol.t_on / 2
        assert simpson(bump_derivative(protocol, t[rise]), x=t[rise]) == pytest.approx(1.0, abs=1e-8)

    def test_bad_protocol(self):
        with pytest.raises(ValueError):
            DriveProtocol(t_on=1.0, t_off=1.0, delta=0.6, lam=0.1)
        with pytest.raises(ValueError):
            DriveProtocol(t_on=1.0, t_off=-1.0, delta=0.2, lam=0.1)


class TestPotential:
    def test_off_and_on(self, small_model):
        m = small_model
        assert np.array_equal(potential_at(m, 0.0), m.V_base)
        V = potential_at(m, m.protocol.t_on / 2)
        diff = V - m.V_base
        assert diff[0, 1] == diff[1, 0] == pytest.approx(m.protocol.lam)
        diff[0, 1] = diff[1, 0] = 0
        assert np.all(diff == 0)

    def test_symmetric(self, small_model):
        for t in np.linspace(0, small_model.protocol.period, 23):
            V = potential_at(small_model, t)
            assert np.array_equal(V, V.T)


class TestConstantPropagator:
    def test_zero_time(self, small_model):
        P = constant_propagator(small_model.H_base, 0.0)
        assert np.allclose(P.S, np.eye(P.dim), atol=1e-15)

    def test_full_period(self):
        assert np.allclose(constant_propagator(single(), 2 * math.pi).S, np.eye(2), atol=1e-10)

    def test_quarter_period(self):
        assert np.allclose(constant_propagator(single(), math.pi / 2).S, [[0, 1], [-1, 0]], atol=1e-12)

    def test_thermal_state_stationary(self, small_model):
        H = small_model.H_base
        s = thermal_state(H, 1.3)
        for dt in (0.37, 12.0, 400.0):
            s2 = evolve(s, constant_propagator(H, dt))
            assert np.max(np.abs(s2.cov - s.cov)) < 1e-10

    def test_exact_is_symplectic(self, small_model):
        assert symplecticity_defect(constant_propagator(small_model.H_base, 17.3)) <= 1e-12

    def test_composition(self, small_model):
        H = small_model.H_base
        a, b = constant_propagator(H, 1.1), constant_propagator(H, 2.2, t0=1.1)
        ab = a.then(b)
        assert np.allclose(ab.S, constant_propagator(H, 3.3).S, atol=1e-12)
        assert ab.interval == (0.0, pytest.approx(3.3))
        assert np.allclose(a.power(3).S, constant_propagator(H, 3.3).S, atol=1e-12)


class TestEvolve:
    def test_identity(self):
        s = thermal_state(single(), 0.8)
        s2 = evolve(s, Propagator(np.eye(2), (0, 0)))
        assert np.array_equal(s2.cov, s.cov)

    def test_moments(self, rng):
        s = GaussianState(ModeLayout(("x",)), np.array([0.3, -0.2]), np.array([[1.0, 0.1], [0.1, 0.7]]))
        P = constant_propagator(single(1.7), 0.9)
        s2 = evolve(s, P)
        assert np.allclose(s2.mean, P.S @ s.mean)
        assert np.allclose(s2.cov, P.S @ s.cov @ P.S.T)

    def test_symplectic_spectrum_preserved(self, small_model):
        s = initial_state(small_model)
        s2 = evolve(s, cycle_propagator(small_model, 400))
        assert np.max(np.abs(symplectic_eigenvalues(s.cov) - symplectic_eigenvalues(s2.cov))) < 1e-8

    def test_size_mismatch(self):
        with pytest.raises(LayoutMismatchError):
            evolve(thermal_state(single(), 0.8), Propagator(np.eye(4), (0, 1)))


class TestSymplecticityDefect:
    def test_identity(self):
        assert symplecticity_defect(np.eye(6)) == 0.0

    def test_scaled(self):
        S = constant_propagator(single(), 0.4).S
        assert symplecticity_defect(1.01 * S) > 1e-3

    @settings(max_examples=25, deadline=None)
    @given(w=st.floats(0.1, 5.0), dt=st.floats(0.0, 100.0))
    def test_exact_single_mode(self, w, dt):
        assert symplecticity_defect(constant_propagator(single(w), dt)) <= 1e-12


class TestDrivenPropagation:
    def test_integrators_agree(self, small_model):
        m = small_model
        S_ip, tr_ip = propagate_driven(m.V_base, m.drive_pair, m.protocol, 2000)
        S_lab, tr_lab = propagate_driven_lab(m.V_base, m.drive_pair, m.protocol, 2000)
        assert np.max(np.abs(S_ip.S - S_lab.S)) < 1e-8
        assert np.max(np.abs(tr_ip.rows_a - tr_lab.rows_a)) < 1e-8
        assert np.max(np.abs(tr_ip.rows_b - tr_lab.rows_b)) < 1e-8

    def test_trace_rows_are_propagator_rows(self, small_model):
        m = small_model
        P, tr = propagate_driven(m.V_base, m.drive_pair, m.protocol, 200)
        a, b = m.drive_pair
        assert np.allclose(tr.rows_a[-1], P.S[a], atol=1e-13)
        assert np.allclose(tr.rows_b[-1], P.S[b], atol=1e-13)
        assert np.allclose(tr.rows_a[0], np.eye(P.dim)[a])

    @pytest.mark.parametrize("block", [1, 7, 50, 5000])
    def test_block_size_irrelevant(self, small_model, block):
        m = small_model
        ref, _ = propagate_driven(m.V_base, m.drive_pair, m.protocol, 200, block=50)
        S, _ = propagate_driven(m.V_base, m.drive_pair, m.protocol, 200, block=block)
        assert np.max(np.abs(S.S - ref.S)) < 1e-12

    @pytest.mark.parametrize("step", [propagate_driven, propagate_driven_lab])
    def test_fourth_order_convergence(self, small_model, step):
        m = small_model
        off = constant_propagator(m.H_base, m.protocol.t_off).S
        S = [off @ step(m.V_base, m.drive_pair, m.protocol, n)[0].S for n in (100, 200, 400)]
        ratio = np.linalg.norm(S[0] - S[1]) / np.linalg.norm(S[1] - S[2])
        assert ratio == pytest.approx(16.0, rel=0.15)

    def test_undriven_cycle_is_free_motion(self):
        m = build_engine(EngineConfig(n_bath=8, lam=0.0))
        S = cycle_propagator(m).S
        assert np.max(np.abs(S - constant_propagator(m.H_base, m.protocol.period).S)) < 1e-10

    def test_default_symplectic(self, small_model):
        dyn = prepare_cycle(small_model)
        assert dyn.defect <= 1e-8
        assert symplecticity_defect(dyn.cycle) == dyn.defect

    def test_coarse_lab_integration_detected(self, small_model):
        with pytest.raises(SymplecticityLostError):
            prepare_cycle(small_model, 50, integrator="lab")

    def test_coarse_default_integration_detected(self, small_model):
        # the on-phase with only 50 RK4 steps should be flagged as too coarse
        with pytest.raises(SymplecticityLostError):
            prepare_cycle(small_model, 50)

    def test_odd_steps_rejected(self, small_model):
        with pytest.raises(ValueError):
            prepare_cycle(small_model, 101)
        with pytest.raises(ValueError):
            prepare_cycle(small_model, 100, integrator="euler")


def test_work_integral_matches_energy_change(small_model):
    dyn = prepare_cycle(small_model)
    s0 = initial_state(small_model)
    s1 = evolve(s0, dyn.cycle)
    from gauss_engine.gaussian import mean_energy

    W = mean_energy(s1, small_model.H_base) - mean_energy(s0, small_model.H_base)
    assert dyn.work_integral(s0) == pytest.approx(W, rel=1e-6)
