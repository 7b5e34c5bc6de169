"""Shared fixtures. The expensive memoryful runs are session-scoped."""

from pathlib import Path

import pytest

from qotto import (
    BathContact,
    QuadratureSettings,
    build_scenario,
    default_integrator,
    evolve_nonmarkovian,
    find_crossing_time,
    parse_scenario,
    run_otto_cycle,
    thermal_state,
)

REPO_ROOT = Path(__file__).resolve().parent.parent
FIG5_PATH = REPO_ROOT / "scenarios" / "fig5.toml"
SWEEP_PATH = REPO_ROOT / "scenarios" / "sweep_gamma.toml"


@pytest.fixture(scope="session")
def fig5_text() -> str:
    return FIG5_PATH.read_text()


@pytest.fixture(scope="session")
def fig5_file(fig5_text):
    return parse_scenario(fig5_text)


@pytest.fixture(scope="session")
def fig5(fig5_file):
    return build_scenario(fig5_file)


@pytest.fixture(scope="session")
def hot_contact(fig5):
    return BathContact(
        initial=thermal_state(fig5.omega_h, fig5.hot.temperature),
        bath=fig5.hot,
        omega_A=fig5.omega_h,
        cfg=default_integrator(fig5.omega_h, fig5.hot),
        quad=QuadratureSettings(),
    )


@pytest.fixture(scope="session")
def cold_contact(fig5):
    return BathContact(
        initial=thermal_state(fig5.omega_c, fig5.cold.temperature),
        bath=fig5.cold,
        omega_A=fig5.omega_c,
        cfg=default_integrator(fig5.omega_c, fig5.cold),
        quad=QuadratureSettings(),
    )


@pytest.fixture(scope="session")
def hot_crossing(fig5, hot_contact):
    return find_crossing_time(hot_contact, fig5.x_cold, fig5.crossing)


@pytest.fixture(scope="session")
def cold_crossing(fig5, cold_contact):
    return find_crossing_time(cold_contact, fig5.x_hot, fig5.crossing)


@pytest.fixture(scope="session")
def fig5_report(fig5):
    return run_otto_cycle(fig5)


@pytest.fixture(scope="session")
def hot_traj_settled(fig5):
    """Hot contact integrated well past its relaxation time (t = 8)."""
    cfg = default_integrator(fig5.omega_h, fig5.hot, t_max=8.0)
    initial = thermal_state(fig5.omega_h, fig5.hot.temperature)
    return evolve_nonmarkovian(initial, fig5.hot, fig5.omega_h, cfg)


@pytest.fixture(scope="session")
def hot_traj_to_crossing(fig5, hot_contact, hot_crossing):
    return hot_contact.trajectory(t_max=hot_crossing.time)


@pytest.fixture(scope="session")
def cold_traj_settled(fig5):
    """Cold contact integrated well past its relaxation time (t = 8)."""
    cfg = default_integrator(fig5.omega_c, fig5.cold, t_max=8.0)
    initial = thermal_state(fig5.omega_c, fig5.cold.temperature)
    return evolve_nonmarkovian(initial, fig5.cold, fig5.omega_c, cfg)
