import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from qotto import (
    BathContact,
    BathSpec,
    CrossingConfig,
    DynamicsModel,
    InvalidParameterError,
    NoCrossingError,
    OttoScenario,
    SpectralDensity,
    TwoLevelState,
    carnot_cycle,
    closed_form_report,
    default_integrator,
    entropy_decomposition,
    evolve_markovian,
    find_crossing_time,
    mean_energy,
    nm_lower_bound,
    run_otto_cycle,
    thermal_state,
    two_step_protocol,
)
from qotto.cycle import carnot_heat_from_log_odds
from qotto.dynamics import IntegratorConfig

# Frozen closed-form ledger for the reference engine (omega 5.2/2.5, T 2/1).
Q_H = 0.034942750325063
Q_C = -0.016799399194741826
WORK = 0.018143351130321173
COST_H = 6.815513544891488e-4
COST_C = 3.3120029054518624e-4
W_TILDE = 0.017130599485286946
DELTA_S_V = 0.017130599485286946
ETA = 1.0 - 2.5 / 5.2


def _tcl2_bath(T, gamma, lam):
    return BathSpec(temperature=T, spectral=SpectralDensity(gamma=gamma, lam=lam))


def _markov_bath(T, gamma, lam):
    return BathSpec(
        temperature=T,
        spectral=SpectralDensity(gamma=gamma, lam=lam),
        model=DynamicsModel.LINDBLAD_REFERENCE,
    )


class TestCrossingSolver:
    def test_hot_contact_crossing(self, fig5, hot_crossing):
        assert 0.0 < hot_crossing.time < 1.0
        assert hot_crossing.x_residual <= 1e-8
        p = hot_crossing.state.p_excited
        assert_allclose(math.log1p(-p) - math.log(p), 2.5, atol=1e-8)

    def test_cold_contact_crossing(self, fig5, cold_crossing):
        assert 0.0 < cold_crossing.time < 1.0
        assert cold_crossing.x_residual <= 1e-8

    def test_time_reported_to_microtolerance(self, fig5, hot_contact, hot_crossing):
        loose = find_crossing_time(hot_contact, fig5.x_cold, CrossingConfig(bisect_tol=1e-6))
        assert abs(loose.time - hot_crossing.time) <= 1e-6

    def test_target_equal_to_start_rejected(self, fig5, hot_contact):
        with pytest.raises(NoCrossingError):
            find_crossing_time(hot_contact, fig5.x_hot, fig5.crossing)

    def test_markovian_cannot_overshoot(self):
        # start below equilibrium ratio; the target sits past it
        bath = _markov_bath(2.0, 0.1, 20.8)
        contact = BathContact(
            initial=TwoLevelState(5.2, 0.10),  # x ~ 2.2 < 2.6
            bath=bath,
            omega_A=5.2,
            cfg=default_integrator(5.2, bath, t_max=5.0),
        )
        with pytest.raises(NoCrossingError):
            find_crossing_time(contact, 2.8, CrossingConfig())

    def test_markovian_equilibrium_start_never_moves(self):
        bath = _markov_bath(2.0, 0.1, 20.8)
        contact = BathContact(
            initial=thermal_state(5.2, 2.0),
            bath=bath,
            omega_A=5.2,
            cfg=default_integrator(5.2, bath, t_max=3.0),
        )
        with pytest.raises(NoCrossingError):
            find_crossing_time(contact, 2.5, CrossingConfig())

    def test_horizon_exhaustion(self, fig5):
        contact = BathContact(
            initial=thermal_state(fig5.omega_h, fig5.hot.temperature),
            bath=fig5.hot,
            omega_A=fig5.omega_h,
            cfg=default_integrator(fig5.omega_h, fig5.hot, t_max=2.0),
        )
        with pytest.raises(NoCrossingError):
            find_crossing_time(contact, 1.0, CrossingConfig())  # far below any dip


class TestOttoCycle:
    def test_reference_ledger(self, fig5_report):
        rep = fig5_report
        assert rep.engine_condition_met
        assert 0.0 < rep.tau1 < 1.0 and 0.0 < rep.tau2 < 1.0
        assert_allclose(rep.q_h, Q_H, rtol=1e-12)
        assert_allclose(rep.q_c, Q_C, rtol=1e-12)
        assert_allclose(rep.w, WORK, rtol=1e-12)
        assert_allclose(rep.w, 0.018143, atol=1e-6)
        assert_allclose(rep.q_h, 0.034942, atol=1e-6)
        assert_allclose(rep.cost_h, COST_H, rtol=1e-10)
        assert_allclose(rep.cost_c, COST_C, rtol=1e-10)
        assert_allclose(rep.w_tilde, W_TILDE, rtol=1e-9)
        assert_allclose(rep.w_tilde, 0.017131, atol=1e-6)
        assert_allclose(rep.delta_s_v, DELTA_S_V, rtol=1e-10)

    def test_efficiency_identities(self, fig5_report):
        rep = fig5_report
        assert abs(rep.eta - ETA) <= 1e-12
        assert rep.eta > 0.5  # apparently beats the Carnot bound
        assert abs(rep.eta_tilde - 0.5) <= 1e-12  # until the cost is charged
        root = math.sqrt(
            rep.temp_c * rep.t_c_prime / (rep.temp_h * rep.t_h_prime)
        )
        assert abs(rep.eta - (1.0 - root)) <= 1e-9

    def test_first_law(self, fig5_report):
        rep = fig5_report
        assert abs(rep.w - (rep.q_h + rep.q_c)) <= 1e-12
        assert abs(rep.w_tilde - (rep.q_h_tilde + rep.q_c_tilde)) <= 1e-12

    def test_sign_structure(self, fig5_report):
        assert fig5_report.q_h > 0.0
        assert fig5_report.q_c < 0.0
        assert fig5_report.w > 0.0

    def test_corrected_work_identity(self, fig5_report):
        rep = fig5_report
        want = (rep.temp_h - rep.temp_c) * rep.delta_s_v
        assert abs(rep.w_tilde - want) <= 1e-12

    def test_entropy_balance_closes_after_correction(self, fig5_report):
        rep = fig5_report
        assert abs(-(rep.q_h - rep.cost_h) / rep.temp_h + rep.delta_s_v) <= 1e-12
        assert_allclose(rep.delta_s_tot_hot, -rep.cost_h / rep.temp_h, rtol=1e-9)

    def test_boundary_temperatures(self, fig5_report):
        rep = fig5_report
        assert_allclose(rep.t_h_prime, 2.08, rtol=1e-9)
        assert_allclose(rep.t_c_prime, 2.5 / 2.6, rtol=1e-9)
        assert_allclose(rep.t_c_dprime, 1.0, rtol=1e-9)
        assert_allclose(rep.t_h_dprime, 2.0, rtol=1e-9)

    def test_degenerate_equal_ratios(self):
        s = OttoScenario(
            omega_h=5.2,
            omega_c=2.6,
            hot=_tcl2_bath(2.0, 0.1, 20.8),
            cold=_tcl2_bath(1.0, 0.1, 10.4),
        )
        rep = run_otto_cycle(s)
        assert rep.tau1 == 0.0 and rep.tau2 == 0.0
        assert rep.w == 0.0 and rep.q_h == 0.0
        assert rep.engine_condition_met

    def test_infeasible_ordering_reports_not_raises(self):
        # hot ratio below cold ratio: cycle runs backwards, W <= 0
        s = OttoScenario(
            omega_h=5.2,
            omega_c=2.5,
            hot=_tcl2_bath(2.2, 0.1, 20.8),
            cold=_tcl2_bath(1.0, 0.1, 10.0),
            integrator=IntegratorConfig(dt=2 * math.pi / (80 * 5.2), t_max=8.0),
        )
        rep = run_otto_cycle(s)
        assert not rep.engine_condition_met
        assert rep.w <= 0.0
        assert rep.q_h < 0.0

    def test_equal_temperature_raw_work_positive_corrected_zero(self):
        s = OttoScenario(
            omega_h=5.2,
            omega_c=5.0,
            hot=_tcl2_bath(2.0, 0.1, 20.8),
            cold=_tcl2_bath(2.0, 0.1, 20.0),
        )
        rep = run_otto_cycle(s)
        assert rep.w > 0.0
        assert abs(rep.w_tilde) <= 1e-12
        assert rep.eta > 0.0

    def test_scenario_validation(self):
        with pytest.raises(InvalidParameterError):
            OttoScenario(
                omega_h=2.5, omega_c=5.2, hot=_tcl2_bath(2.0, 0.1, 10), cold=_tcl2_bath(1.0, 0.1, 10)
            )
        with pytest.raises(InvalidParameterError):
            OttoScenario(
                omega_h=5.2, omega_c=2.5, hot=_tcl2_bath(1.0, 0.1, 20), cold=_tcl2_bath(2.0, 0.1, 10)
            )


class TestEntropyDecomposition:
    def test_terms_sum_to_heat(self):
        initial = thermal_state(5.2, 2.0)
        final = TwoLevelState(5.2, thermal_state(2.5, 1.0).p_excited)
        t_dd, t_dsv = entropy_decomposition(initial, final, 2.0)
        q = mean_energy(final) - mean_energy(initial)
        assert abs((t_dd + t_dsv) - q) <= 1e-12
        assert_allclose(t_dd, COST_H, rtol=1e-10)
        assert_allclose(t_dsv, 2.0 * DELTA_S_V, rtol=1e-10)

    def test_equilibrium_endpoint(self):
        initial = TwoLevelState(5.2, 0.04)
        final = thermal_state(5.2, 2.0)
        t_dd, t_dsv = entropy_decomposition(initial, final, 2.0)
        q = mean_energy(final) - mean_energy(initial)
        assert abs((t_dd + t_dsv) - q) <= 1e-12

    def test_identical_states_zero(self):
        s = thermal_state(5.2, 2.0)
        assert entropy_decomposition(s, s, 2.0) == (0.0, 0.0)

    def test_spacing_mismatch_rejected(self):
        with pytest.raises(InvalidParameterError):
            entropy_decomposition(thermal_state(5.2, 2.0), thermal_state(2.5, 1.0), 2.0)


class TestTwoStepProtocol:
    def test_reference_pair(self):
        start = thermal_state(5.2, 2.0)
        target = thermal_state(2.5, 1.0)
        rep = two_step_protocol(start, target, 2.0)
        assert_allclose(rep.total_work, COST_H, rtol=1e-10)
        assert_allclose(rep.delta_f, 0.08550991535024055, rtol=1e-12)
        assert_allclose(rep.adiabatic_work, -0.0848283639957514, rtol=1e-11)
        assert_allclose(rep.isothermal_heat, 2.0 * DELTA_S_V, rtol=1e-10)

    def test_adiabatic_work_is_energy_change(self):
        # Tr[rho (H_final - H_intermediate)] with the intermediate spacing T*x.
        start = thermal_state(5.2, 2.0)
        target = thermal_state(2.5, 1.0)
        rep = two_step_protocol(start, target, 2.0)
        omega_in = 2.0 * 2.5
        direct = (5.2 - omega_in) / 2.0 * (2.0 * target.p_excited - 1.0)
        assert abs(rep.adiabatic_work - direct) <= 1e-12

    def test_work_ledger_closes(self):
        rep = two_step_protocol(thermal_state(5.2, 2.0), thermal_state(2.5, 1.0), 2.0)
        assert abs(rep.isothermal_work + rep.adiabatic_work - rep.total_work) <= 1e-12

    def test_identity_transformation_is_free(self):
        s = thermal_state(5.2, 2.0)
        rep = two_step_protocol(s, s, 2.0)
        assert abs(rep.delta_f) <= 1e-14
        assert rep.total_work == 0.0
        assert rep.isothermal_heat == 0.0
        assert abs(rep.adiabatic_work) <= 1e-14

    def test_unrealizable_target_rejected(self):
        with pytest.raises(InvalidParameterError):
            two_step_protocol(thermal_state(5.2, 2.0), TwoLevelState(1.0, 0.6), 2.0)

    def test_non_thermal_start_rejected(self):
        with pytest.raises(InvalidParameterError):
            two_step_protocol(TwoLevelState(5.2, 0.3), thermal_state(2.5, 1.0), 2.0)


class TestCarnotReference:
    def test_reference_values(self, fig5, fig5_report):
        car = carnot_cycle(fig5)
        assert_allclose(car.q_h_c, 0.034262, atol=1e-6)
        assert_allclose(car.w_c, 0.017131, atol=1e-6)
        assert car.eta_c == 0.5
        assert car.omega_h_prime == 5.0
        assert_allclose(car.omega_c_prime, 2.6, rtol=1e-14)
        assert_allclose(car.k_h, 2.6, rtol=1e-14)
        assert_allclose(car.k_c, 2.5, rtol=1e-14)

    def test_matches_corrected_otto(self, fig5, fig5_report):
        car = carnot_cycle(fig5)
        assert abs(car.q_h_c - fig5_report.q_h_tilde) <= 1e-12
        assert abs(car.q_c_c - fig5_report.q_c_tilde) <= 1e-12
        assert abs(car.w_c - fig5_report.w_tilde) <= 1e-12

    def test_log_odds_form_agrees(self, fig5):
        car = carnot_cycle(fig5)
        p_h = thermal_state(5.2, 2.0).p_excited
        p_c = thermal_state(2.5, 1.0).p_excited
        odds_form = carnot_heat_from_log_odds(5.2, car.k_h, car.k_c, p_h, p_c)
        assert abs(car.q_h_c - odds_form) <= 1e-12

    def test_equal_temperatures_yield_no_work(self):
        s = OttoScenario(
            omega_h=5.2,
            omega_c=5.0,
            hot=_tcl2_bath(2.0, 0.1, 20.8),
            cold=_tcl2_bath(2.0, 0.1, 20.0),
        )
        car = carnot_cycle(s)
        assert car.eta_c == 0.0
        assert abs(car.w_c) <= 1e-15

    def test_first_law(self, fig5):
        car = carnot_cycle(fig5)
        assert abs(car.w_c - (car.q_h_c + car.q_c_c)) <= 1e-15


class TestMemoryLowerBound:
    def test_memoryless_trajectory_gives_zero(self):
        bath = _markov_bath(2.0, 0.1, 20.8)
        cfg = default_integrator(5.2, bath, t_max=2.0)
        traj = evolve_markovian(thermal_state(5.2, 2.0), bath, 5.2, cfg)
        assert nm_lower_bound(traj, 2.0) <= 1e-14

    def test_bounded_below_by_preparation_cost(self, fig5, hot_traj_to_crossing, hot_crossing):
        bound = nm_lower_bound(hot_traj_to_crossing, fig5.hot.temperature)
        assert bound >= COST_H - 1e-12
        # at the crossing itself the excursion equals the preparation cost
        from qotto import relative_entropy

        d_tau = relative_entropy(hot_crossing.state, thermal_state(5.2, 2.0))
        assert_allclose(2.0 * d_tau, COST_H, rtol=1e-6)

    def test_linear_in_temperature(self, hot_traj_to_crossing):
        b1 = nm_lower_bound(hot_traj_to_crossing, 2.0)
        b2 = nm_lower_bound(hot_traj_to_crossing, 4.0)
        assert_allclose(b2, 2.0 * b1, rtol=1e-14)
