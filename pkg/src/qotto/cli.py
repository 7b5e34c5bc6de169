"""Command-line interface: trajectories, cycle reports, sweeps.

Exit codes: 0 success, 2 configuration error, 3 physically infeasible
(no crossing / engine condition failed), 4 numerical failure. Outputs
are byte-deterministic: fixed key order, shortest round-trip float
representation, no timestamps.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .bath import BathSpec, QuadratureSettings
from .config import (
    ScenarioFile,
    SweepSpec,
    apply_assignments,
    build_scenario,
    parse_scenario,
    parse_sweep,
    quadrature_settings,
    scenario_to_dict,
)
from .cycle import (
    CarnotReport,
    CycleReport,
    OttoScenario,
    carnot_cycle,
    closed_form_report,
    find_crossing_time,
    run_otto_cycle,
    two_step_protocol,
)
from .dynamics import BathContact, Trajectory
from .errors import (
    ConfigError,
    InvalidParameterError,
    NoCrossingError,
    NumericalFailureError,
    QottoError,
)
from .states import relative_entropy, thermal_state, von_neumann_entropy

_ENV_QUAD_TOL = "QOTTO_QUAD_TOL"

TRAJECTORY_COLUMNS = "t,sigma_z,x_ratio,T_eff,rel_entropy_to_eq,von_neumann_entropy"
REFERENCE_COLUMNS = ",x_hot_eq,x_cold_eq"


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "handler"):
        parser.print_help()
        return 2
    try:
        return args.handler(args)
    except ConfigError as exc:
        return _fail(exc, 2)
    except InvalidParameterError as exc:
        return _fail(exc, 2)
    except NoCrossingError as exc:
        return _fail(exc, 3)
    except NumericalFailureError as exc:
        return _fail(exc, 4)
    except QottoError as exc:  # anything else from this package
        return _fail(exc, 4)


def _fail(exc: Exception, code: int) -> int:
    print(f"qotto: error: {exc}", file=sys.stderr)
    return code


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qotto",
        description="Two-level Otto engine with memoryless and memoryful reservoirs.",
    )
    parser.add_argument("--version", action="version", version=f"qotto {__version__}")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("trajectory", help="CSV of one bath contact's observables over time")
    p.add_argument("--config", required=True, help="scenario TOML file")
    p.add_argument("--bath", required=True, choices=("hot", "cold"))
    p.add_argument("--t-max", type=float, default=None, help="override the horizon")
    p.add_argument(
        "--until-crossing",
        type=float,
        default=None,
        metavar="X",
        help="stop at the first time omega/T_eff reaches X (exit 3 if never)",
    )
    p.add_argument("--with-refs", action="store_true", help="append equilibrium-ratio columns")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(handler=_cmd_trajectory)

    p = sub.add_parser("cycle", help="run the full cycle and emit its JSON ledger")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_cycle)

    p = sub.add_parser("carnot", help="closed-form reference cycle JSON")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_carnot)

    p = sub.add_parser("two-step", help="preparation-protocol ledger for the hot contact pair")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_two_step)

    p = sub.add_parser("sweep", help="evaluate a parameter grid of cycles")
    p.add_argument("--config", required=True, help="base scenario TOML")
    p.add_argument("--axes", required=True, help="sweep axes TOML")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(handler=_cmd_sweep)

    return parser


def _load_scenario(path: str) -> ScenarioFile:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return parse_scenario(text)


def _env_quad_tol() -> float | None:
    raw = os.environ.get(_ENV_QUAD_TOL)
    if raw is None:
        return None
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{_ENV_QUAD_TOL}={raw!r} is not a number") from exc


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_text(path: str, text: str):
    out = Path(path)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)


def _write_json(path: str, doc: dict):
    _write_text(path, json.dumps(doc, indent=2) + "\n")


def _cmd_trajectory(args) -> int:
    sf = _load_scenario(args.config)
    scenario = build_scenario(sf)
    quad = quadrature_settings(sf, _env_quad_tol())
    if args.bath == "hot":
        omega_A, bath = scenario.omega_h, scenario.hot
    else:
        omega_A, bath = scenario.omega_c, scenario.cold
    cfg = scenario.contact_integrator(omega_A, bath)
    if args.t_max is not None:
        cfg = cfg.with_horizon(args.t_max)
    contact = BathContact(
        initial=thermal_state(omega_A, bath.temperature),
        bath=bath,
        omega_A=omega_A,
        cfg=cfg,
        quad=quad,
    )

    extra_row = None
    if args.until_crossing is not None:
        crossing = find_crossing_time(contact, args.until_crossing, scenario.crossing)
        if crossing.time >= cfg.dt:
            traj = contact.trajectory(t_max=crossing.time)
        else:
            traj = contact.trajectory(t_max=cfg.dt)  # keep only t=0 below
        extra_row = _state_row(crossing.time, crossing.state, bath)
        keep = traj.times < crossing.time - 1e-12
        rows = [_traj_row(traj, i) for i in range(len(traj)) if keep[i]]
    else:
        traj = contact.trajectory()
        rows = [_traj_row(traj, i) for i in range(len(traj))]
    if extra_row is not None:
        rows.append(extra_row)

    header = TRAJECTORY_COLUMNS
    if args.with_refs:
        header += REFERENCE_COLUMNS
        refs = [repr(scenario.x_hot), repr(scenario.x_cold)]
        rows = [row + refs for row in rows]
    lines = [header] + [",".join(row) for row in rows]
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def _traj_row(traj: Trajectory, i: int) -> list[str]:
    x = float(traj.x_ratio[i])
    t_eff = traj.omega / x if x != 0.0 and math.isfinite(x) else math.inf
    return [
        _fmt(float(traj.times[i])),
        _fmt(float(traj.sigma_z[i])),
        _fmt(x),
        _fmt(t_eff),
        _fmt(float(traj.rel_entropy_to_eq[i])),
        _fmt(float(traj.s_von_neumann[i])),
    ]


def _state_row(t: float, state, bath: BathSpec) -> list[str]:
    eq = thermal_state(state.omega, bath.temperature)
    p = state.p_excited
    x = math.log1p(-p) - math.log(p)
    return [
        _fmt(t),
        _fmt(2.0 * p - 1.0),
        _fmt(x),
        _fmt(state.omega / x if x != 0.0 else math.inf),
        _fmt(relative_entropy(state, eq)),
        _fmt(von_neumann_entropy(state)),
    ]


def _cycle_doc(report: CycleReport, carnot: CarnotReport, sf: ScenarioFile) -> dict:
    return {
        "tau1": report.tau1,
        "tau2": report.tau2,
        "q_h": report.q_h,
        "q_c": report.q_c,
        "w": report.w,
        "eta": report.eta,
        "cost_h": report.cost_h,
        "cost_c": report.cost_c,
        "q_h_tilde": report.q_h_tilde,
        "q_c_tilde": report.q_c_tilde,
        "w_tilde": report.w_tilde,
        "eta_tilde": report.eta_tilde,
        "delta_s_v": report.delta_s_v,
        "eta_carnot": carnot.eta_c,
        "engine_condition_met": report.engine_condition_met,
        "carnot": {
            "q_h_c": carnot.q_h_c,
            "q_c_c": carnot.q_c_c,
            "w_c": carnot.w_c,
            "omega_h_prime": carnot.omega_h_prime,
            "omega_c_prime": carnot.omega_c_prime,
            "k_h": carnot.k_h,
            "k_c": carnot.k_c,
        },
        "scenario": scenario_to_dict(sf),
    }


def _evaluate_cycle(sf: ScenarioFile, quad: QuadratureSettings):
    """(report doc, status): no-crossing yields a closed-form doc with null times."""
    scenario = build_scenario(sf)
    try:
        report = run_otto_cycle(scenario, quad)
        status = "ok"
    except NoCrossingError:
        report = closed_form_report(scenario)
        status = "no-crossing"
    return _cycle_doc(report, carnot_cycle(scenario), sf), status


def _cmd_cycle(args) -> int:
    sf = _load_scenario(args.config)
    doc, status = _evaluate_cycle(sf, quadrature_settings(sf, _env_quad_tol()))
    _write_json(args.out, doc)
    if status == "no-crossing":
        print("qotto: no crossing within horizon; report has null contact times", file=sys.stderr)
        return 3
    if not doc["engine_condition_met"]:
        print("qotto: engine condition failed (W <= 0); diagnostic report written", file=sys.stderr)
        return 3
    return 0


def _cmd_carnot(args) -> int:
    sf = _load_scenario(args.config)
    scenario = build_scenario(sf)
    carnot = carnot_cycle(scenario)
    doc = {
        "q_h_c": carnot.q_h_c,
        "q_c_c": carnot.q_c_c,
        "w_c": carnot.w_c,
        "eta_c": carnot.eta_c,
        "omega_h_prime": carnot.omega_h_prime,
        "omega_c_prime": carnot.omega_c_prime,
        "k_h": carnot.k_h,
        "k_c": carnot.k_c,
        "scenario": scenario_to_dict(sf),
    }
    _write_json(args.out, doc)
    return 0


def _cmd_two_step(args) -> int:
    sf = _load_scenario(args.config)
    scenario = build_scenario(sf)
    start = thermal_state(scenario.omega_h, scenario.hot.temperature)
    target = thermal_state(scenario.omega_c, scenario.cold.temperature)
    if target.p_excited == start.p_excited:
        # Degenerate pair: identical populations, nothing to prepare.
        report = two_step_protocol(start, start, scenario.hot.temperature)
    else:
        report = two_step_protocol(start, target, scenario.hot.temperature)
    doc = {
        "delta_f": report.delta_f,
        "isothermal_heat": report.isothermal_heat,
        "isothermal_work": report.isothermal_work,
        "adiabatic_work": report.adiabatic_work,
        "total_work": report.total_work,
        "scenario": scenario_to_dict(sf),
    }
    _write_json(args.out, doc)
    return 0


def _sweep_worker(payload):
    sf, quad = payload
    try:
        doc, status = _evaluate_cycle(sf, quad)
        return doc, status
    except NumericalFailureError as exc:
        return None, f"numerical-failure: {exc}"


def _cmd_sweep(args) -> int:
    base = _load_scenario(args.config)
    try:
        axes_text = Path(args.axes).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {args.axes}: {exc}") from exc
    spec: SweepSpec = parse_sweep(axes_text, base)
    quad_tol = _env_quad_tol()
    if args.jobs < 1:
        raise ConfigError(f"--jobs must be >= 1, got {args.jobs}")

    # Resolve every grid point up front so configuration errors exit 2
    # before any work starts, and workers only ever see valid scenarios.
    points = []
    for assignments in spec.grid():
        sf = apply_assignments(base, assignments)
        label = "__".join(f"{axis.name}={_fmt(value)}" for axis, value in assignments)
        points.append((assignments, label, sf))

    payloads = [(sf, quadrature_settings(sf, quad_tol)) for _, _, sf in points]
    if args.jobs == 1:
        results = [_sweep_worker(p) for p in payloads]
    else:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_worker, payloads, chunksize=1))

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    axis_names = [axis.name for axis in spec.axes]
    index_lines = [
        ",".join(["point"] + axis_names + ["tau1", "tau2", "w", "eta", "w_tilde", "feasible", "status", "report"])
    ]
    any_failed = False
    for i, ((assignments, label, _), (doc, status)) in enumerate(zip(points, results)):
        values = [_fmt(value) for _, value in assignments]
        if doc is None:
            any_failed = True
            row = [f"{i:04d}"] + values + ["", "", "", "", "", "", status, ""]
        else:
            name = f"report__{label}.json"
            _write_json(str(out_dir / name), doc)
            row = (
                [f"{i:04d}"]
                + values
                + [
                    _fmt(doc["tau1"]),
                    _fmt(doc["tau2"]),
                    _fmt(doc["w"]),
                    _fmt(doc["eta"]),
                    _fmt(doc["w_tilde"]),
                    _fmt(doc["engine_condition_met"]),
                    status,
                    name,
                ]
            )
        index_lines.append(",".join(row))
    _write_text(str(out_dir / "index.csv"), "\n".join(index_lines) + "\n")
    return 4 if any_failed else 0


if __name__ == "__main__":
    sys.exit(main())
