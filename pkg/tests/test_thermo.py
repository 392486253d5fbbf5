"""Energy ledger, entropy bookkeeping, efficiencies and regime classification."""

from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gauss_engine import EngineConfig, build_engine, initial_state, run_engine
from gauss_engine.errors import NoHeatInputError
from gauss_engine.gaussian import direct_sum, reduce, thermal_state
from gauss_engine.simulate import recount
from gauss_engine.thermo import (
    ATHERMAL,
    JOINT,
    NOT_ENGINE,
    THERMAL,
    CycleLedger,
    bound_surface,
    classify,
    conservation_residual,
    cycle_ledger,
    efficiency_bound,
    efficiency_report,
    entropy_report,
    local_carnot,
    second_law_residual,
    work_decomposition_residual,
)

T_SI = {"c": 0.8, "h": 8.0}


def ledger(Q=(0.0, 0.0), dU_S=(0.0, 0.0), dU_int=(0.0, 0.0), W=None):
    Q, dU_S, dU_int = (dict(zip("ch", v)) for v in (Q, dU_S, dU_int))
    if W is None:
        W = sum(Q.values()) + sum(dU_S.values()) + sum(dU_int.values())
    return CycleLedger(Q, dU_S, dU_int, W)


@pytest.fixture(scope="module")
def small():
    return build_engine(EngineConfig(n_bath=10))


class TestLedger:
    def test_no_change(self, small):
        s = initial_state(small)
        led = cycle_ledger(s, s, small)
        assert led.W_tot == 0
        assert all(v == 0 for part in (led.Q, led.dU_S, led.dU_int) for v in part.values())

    def test_undriven_engine_does_no_work(self):
        traj = run_engine(EngineConfig(n_bath=10, lam=0.0), n_cycles=3)
        for rec in traj.records:
            led = rec.ledger
            assert abs(led.W_tot) < 1e-8
            assert abs(sum(led.Q.values()) + sum(led.dU_S.values()) + sum(led.dU_int.values())) < 1e-8

    def test_first_cycle_heat_flows_hot_to_cold(self, desk_thermal):
        led = desk_thermal.records[0].ledger
        assert led.Q["h"] < 0 < led.Q["c"]

    def test_first_law_on_every_cycle(self, desk_thermal, desk_athermal):
        for traj in (desk_thermal, desk_athermal):
            for rec in traj.records:
                assert rec.ledger.relative(rec.ledger.first_law_residual) <= 1e-6


class TestEntropyReport:
    def test_reference_product_state_has_no_resources(self, small):
        m = small
        T_min = m.T_min
        parts = [thermal_state(m.H_sys["c"], T_min), thermal_state(m.H_sys["h"], T_min),
                 thermal_state(m.H_bath["c"], 0.8), thermal_state(m.H_bath["h"], 8.0)]
        s = reduce(direct_sum(*parts), list(m.layout.labels))
        r = entropy_report(s, m)
        assert abs(r.Sigma) < 1e-10 and abs(r.sigma) < 1e-10
        for v in r.constituents().values():
            assert abs(v) < 1e-10

    def test_initial_state_carries_resources(self, small):
        r = entropy_report(initial_state(small), small)
        assert r.I_SR > 0
        assert r.sigma > 0
        assert r.Sigma > 0

    def test_decompositions(self, desk_thermal):
        r = desk_thermal.records[5].entropy
        assert r.Sigma == pytest.approx(r.I_SR + r.C_S + r.C_R + sum(r.D_j.values()), abs=1e-14)
        assert r.sigma == pytest.approx(r.Sigma + sum(r.D_i.values()), abs=1e-14)

    def test_conservation_identity_between_any_two_times(self, desk_thermal):
        reports = [desk_thermal.initial] + [rec.entropy for rec in desk_thermal.records]
        for i, j in [(0, 1), (0, 50), (7, 31), (49, 50)]:
            assert conservation_residual(reports[i], reports[j]) <= 1e-7

    def test_constituents_nonnegative(self, desk_thermal, desk_athermal):
        for traj in (desk_thermal, desk_athermal):
            for rec in traj.records:
                assert rec.entropy.Sigma >= -1e-9
                for v in rec.entropy.constituents().values():
                    assert v >= -1e-9


class TestSecondLaw:
    def test_zero_change(self, small):
        r = entropy_report(initial_state(small), small)
        assert second_law_residual(r, r, ledger(), T_SI) == 0

    def test_simulated_cycles(self, desk_thermal, desk_athermal):
        for traj in (desk_thermal, desk_athermal):
            for rec in traj.records:
                dS = abs(rec.entropy.Sigma - rec.sigma_start)
                assert rec.second_law_residual <= 1e-6 * max(1.0, dS)

    @pytest.mark.parametrize("side", ["c", "h"])
    def test_linear_sensitivity(self, desk_thermal, side):
        recs = desk_thermal.records
        r0, r1, led = recs[2].entropy, recs[3].entropy, recs[3].ledger
        Q = dict(led.Q)
        Q[side] += 1e-3
        bumped = replace(led, Q=Q)
        res = second_law_residual(r0, r1, bumped, T_SI)
        assert res == pytest.approx(1e-3 / T_SI[side], rel=1e-5)


class TestWorkDecomposition:
    def test_zero_change(self, small):
        r = entropy_report(initial_state(small), small)
        assert work_decomposition_residual(ledger(), r, r, T_SI) == 0

    def test_simulated_cycles(self, desk_thermal, desk_athermal):
        for traj in (desk_thermal, desk_athermal):
            for rec in traj.records:
                assert rec.work_residual <= 1e-6 * abs(rec.ledger.W_tot) + 1e-9

    def test_decoupled_baths(self):
        traj = run_engine(EngineConfig(n_bath=8, lambda_c=0.0, lambda_h=0.0), n_cycles=2)
        for rec in traj.records:
            led = rec.ledger
            assert abs(led.Q["c"]) < 1e-12 and abs(led.Q["h"]) < 1e-12
            assert sum(led.dU_int.values()) == 0
            assert led.W_tot == pytest.approx(rec.efficiency.T_min * rec.efficiency.d_sigma, abs=1e-12)


class TestEfficiency:
    def test_definitions(self):
        led = ledger(Q=(0.5, -1.0), W=-0.3)
        eff = efficiency_report(led, 0.0, T_SI, (1.0, 2.0))
        assert eff.Q_in == 1.0
        assert eff.gamma == 1.0
        assert eff.eta_j["h"] == pytest.approx(0.9)
        assert eff.eta_j["c"] == 0.0
        assert eff.eta_th == pytest.approx(0.9)
        assert eff.eta == pytest.approx(0.3)
        assert eff.eta_C == pytest.approx(0.9)
        assert eff.eta_O == pytest.approx(0.5)

    def test_intake_sums_only_outflows(self):
        led = ledger(Q=(0.2, -1.0), dU_S=(0.3, -0.5), dU_int=(-0.1, 0.05), W=-0.4)
        eff = efficiency_report(led, 0.0, T_SI)
        assert eff.Q_in == pytest.approx(1.0)
        assert eff.dU_S_in == pytest.approx(0.5)
        assert eff.dU_int_in == pytest.approx(0.1)
        assert eff.eta == pytest.approx(0.4 / 1.6)
        assert eff.gamma == pytest.approx(1 / 1.6)

    def test_joint_intake_counts_net_working_substance_energy(self):
        led = ledger(Q=(0.2, -1.0), dU_S=(0.3, -0.5), W=-0.4)
        joint = efficiency_report(led, 0.0, T_SI, intake=JOINT)
        assert joint.dU_S_in == pytest.approx(0.2)
        led2 = ledger(Q=(0.2, -1.0), dU_S=(0.6, -0.5), W=-0.4)
        assert efficiency_report(led2, 0.0, T_SI, intake=JOINT).dU_S_in == 0.0
        with pytest.raises(ValueError):
            efficiency_report(led, 0.0, T_SI, intake="bogus")

    def test_no_heat_intake(self):
        eff = efficiency_report(ledger(Q=(0.1, 0.2), dU_S=(-0.5, 0.0), W=-0.2), 0.0, T_SI)
        assert eff.gamma == 0.0
        assert eff.eta_th is None and eff.ratio is None
        assert eff.regime == ATHERMAL
        with pytest.raises(NoHeatInputError):
            efficiency_bound(eff, 0.1)

    def test_ratio_example(self):
        ratio = 0.4 / (0.8 * 0.9)
        assert ratio == pytest.approx(0.5556, abs=1e-4)
        assert classify(-1.0, ratio) == THERMAL
        assert classify(-1.0, 2.5) == ATHERMAL
        assert classify(0.0, 0.5) == NOT_ENGINE
        assert classify(1.0, 0.5) == NOT_ENGINE

    def test_not_an_engine(self):
        eff = efficiency_report(ledger(Q=(-0.5, 1.0)), 0.0, T_SI)
        assert eff.regime == NOT_ENGINE
        assert not eff.is_engine

    @settings(max_examples=60, deadline=None)
    @given(
        q=st.lists(st.floats(-1, 1), min_size=2, max_size=2),
        u=st.lists(st.floats(-1, 1), min_size=4, max_size=4),
        W=st.floats(-2, -0.01),
        scale=st.floats(0.01, 1e3),
    )
    def test_classification_scale_free(self, q, u, W, scale):
        a = efficiency_report(ledger(q, u[:2], u[2:], W), 0.01, T_SI)
        b = efficiency_report(ledger([scale * v for v in q], [scale * v for v in u[:2]],
                                     [scale * v for v in u[2:]], scale * W), 0.01 * scale, T_SI)
        assert a.regime == b.regime
        if a.ratio is not None:
            assert b.ratio == pytest.approx(a.ratio, rel=1e-9)

    def test_regime_identity(self, desk_thermal, desk_athermal):
        for traj in (desk_thermal, desk_athermal):
            for rec in traj.records:
                res = rec.efficiency.eq6_residual
                if res is not None:
                    assert res <= 1e-6

    def test_ratio_independent_of_intake_convention(self, desk_athermal):
        for rec in desk_athermal.records[:10]:
            joint = recount(rec, desk_athermal.model, JOINT)
            assert joint.ratio == pytest.approx(rec.efficiency.ratio, rel=1e-12)
            assert joint.regime == rec.efficiency.regime
            assert joint.eta >= rec.efficiency.eta


class TestBounds:
    def test_uncorrelated_thermal_bound_is_carnot(self):
        eff = efficiency_report(ledger(Q=(0.5, -1.0), W=-0.3), 0.0, T_SI)
        b_th, b_C = efficiency_bound(eff, 0.0)
        assert b_C == pytest.approx(eff.eta_C)
        assert b_th == pytest.approx(eff.eta_th)

    def test_linear_in_sigma(self):
        eff = efficiency_report(ledger(Q=(0.5, -2.0), W=-0.3), 0.0, T_SI)
        b1 = efficiency_bound(eff, 0.05)
        b2 = efficiency_bound(eff, 0.10)
        step = eff.T_min * 0.05 / eff.Q_in
        assert b2[0] - b1[0] == pytest.approx(step)
        assert b2[1] - b1[1] == pytest.approx(step)

    def test_simulated_cycles_respect_bounds(self, desk_thermal, desk_athermal):
        for traj in (desk_thermal, desk_athermal):
            for rec in traj.records:
                if rec.efficiency.is_engine and rec.bounds is not None:
                    assert rec.efficiency.eta <= rec.bounds[0] + 1e-9
                    assert rec.efficiency.eta <= rec.bounds[1] + 1e-9

    def test_local_carnot(self):
        assert local_carnot({"c": 0.8, "h": 1.7}) == {"c": 0.0, "h": pytest.approx(1 - 0.8 / 1.7)}


class TestBoundSurface:
    def test_corner_values(self):
        bound, mask = bound_surface([1.0, 0.5, 0.626], [1.0, 0.9])
        assert bound[0, 0] == 0.0
        assert bound[1, 0] == 1.0 and not mask[1, 0]
        assert bound[2, 1] == pytest.approx(1 / (0.626 * 0.9) - 1, abs=1e-12)
        assert bound[2, 1] == pytest.approx(0.7749, abs=1e-4)
        assert mask[2, 1]

    def test_mask_is_guarantee_region(self):
        g = np.linspace(0.01, 1.0, 100)
        e = np.linspace(0.01, 1.0, 100)
        bound, mask = bound_surface(g, e)
        assert np.array_equal(mask, np.outer(g, e) > 0.5)
        assert np.array_equal(mask, bound < 1.0)

    def test_domain(self):
        with pytest.raises(ValueError):
            bound_surface([0.0, 0.5], [0.5])
        with pytest.raises(ValueError):
            bound_surface([0.5], [1.2])
