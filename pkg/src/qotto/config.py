"""Scenario and sweep documents: parsing, validation, serialization.

Scenarios are TOML (human-edited); reports echo the fully-resolved
scenario so every output is reproducible from itself. Validation is
strict: unknown keys are rejected with their full path.
"""

from __future__ import annotations

import itertools
import math
import sys
from dataclasses import dataclass, replace

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .bath import BathSpec, DynamicsModel, QuadratureSettings, SpectralDensity
from .cycle import CrossingConfig, OttoScenario
from .dynamics import default_integrator
from .errors import ConfigError, InvalidParameterError

# Missing cutoff defaults to this multiple of the contact's spacing.
CUTOFF_OVER_OMEGA = 4.0

_MODEL_NAMES = {
    "tcl2": DynamicsModel.TCL2,
    "lindblad": DynamicsModel.LINDBLAD_REFERENCE,
}
_DEFAULT_SWEEP_LIMIT = 4096


@dataclass(frozen=True)
class BathSection:
    temperature: float
    gamma: float
    lam: float
    model: DynamicsModel


@dataclass(frozen=True)
class IntegrationSection:
    dt: float | None = None
    t_max: float | None = None
    quad_abs_tol: float = 1e-10
    quad_rel_tol: float = 1e-8


@dataclass(frozen=True)
class CrossingSection:
    scan_dt: float | None = None
    bisect_tol: float = 1e-9


@dataclass(frozen=True)
class ScenarioFile:
    omega_h: float
    omega_c: float
    hot_bath: BathSection
    cold_bath: BathSection
    integration: IntegrationSection
    crossing: CrossingSection


def parse_scenario(text: str) -> ScenarioFile:
    """Parse and validate a scenario document, applying defaults."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"scenario is not valid TOML: {exc}") from exc
    return scenario_from_dict(raw)


def scenario_from_dict(raw: dict) -> ScenarioFile:
    _reject_unknown(raw, {"system", "hot_bath", "cold_bath", "integration", "crossing"}, "")
    system = _section(raw, "system", required=True)
    _reject_unknown(system, {"omega_h", "omega_c"}, "system.")
    omega_h = _positive(system, "omega_h", "system.")
    omega_c = _positive(system, "omega_c", "system.")
    if not omega_c < omega_h:
        raise ConfigError(
            f"system: need omega_c < omega_h, got omega_c={omega_c!r}, omega_h={omega_h!r}"
        )

    hot = _bath_section(raw, "hot_bath", omega_h)
    cold = _bath_section(raw, "cold_bath", omega_c)

    integ = _section(raw, "integration", required=False)
    _reject_unknown(integ, {"dt", "t_max", "quad_abs_tol", "quad_rel_tol"}, "integration.")
    integration = IntegrationSection(
        dt=_optional_positive(integ, "dt", "integration."),
        t_max=_optional_positive(integ, "t_max", "integration."),
        quad_abs_tol=_optional_positive(integ, "quad_abs_tol", "integration.") or 1e-10,
        quad_rel_tol=_optional_positive(integ, "quad_rel_tol", "integration.") or 1e-8,
    )

    cross = _section(raw, "crossing", required=False)
    _reject_unknown(cross, {"scan_dt", "bisect_tol"}, "crossing.")
    crossing = CrossingSection(
        scan_dt=_optional_positive(cross, "scan_dt", "crossing."),
        bisect_tol=_optional_positive(cross, "bisect_tol", "crossing.") or 1e-9,
    )

    return ScenarioFile(
        omega_h=omega_h,
        omega_c=omega_c,
        hot_bath=hot,
        cold_bath=cold,
        integration=integration,
        crossing=crossing,
    )


def _bath_section(raw: dict, key: str, omega: float) -> BathSection:
    sec = _section(raw, key, required=True)
    _reject_unknown(sec, {"temperature", "gamma", "lambda", "model"}, f"{key}.")
    temperature = _positive(sec, "temperature", f"{key}.")
    gamma = _positive(sec, "gamma", f"{key}.")
    lam = _optional_positive(sec, "lambda", f"{key}.")
    if lam is None:
        lam = CUTOFF_OVER_OMEGA * omega
    model_name = sec.get("model", "tcl2")
    if not isinstance(model_name, str) or model_name.lower() not in _MODEL_NAMES:
        raise ConfigError(
            f"{key}.model: expected one of {sorted(_MODEL_NAMES)}, got {model_name!r}"
        )
    return BathSection(
        temperature=temperature, gamma=gamma, lam=lam, model=_MODEL_NAMES[model_name.lower()]
    )


def scenario_to_dict(sf: ScenarioFile) -> dict:
    """Fully-resolved scenario as a plain dict with fixed key order."""
    def bath(b: BathSection) -> dict:
        return {
            "temperature": b.temperature,
            "gamma": b.gamma,
            "lambda": b.lam,
            "model": b.model.value,
        }

    integration: dict = {}
    if sf.integration.dt is not None:
        integration["dt"] = sf.integration.dt
    if sf.integration.t_max is not None:
        integration["t_max"] = sf.integration.t_max
    integration["quad_abs_tol"] = sf.integration.quad_abs_tol
    integration["quad_rel_tol"] = sf.integration.quad_rel_tol
    crossing: dict = {}
    if sf.crossing.scan_dt is not None:
        crossing["scan_dt"] = sf.crossing.scan_dt
    crossing["bisect_tol"] = sf.crossing.bisect_tol
    return {
        "system": {"omega_h": sf.omega_h, "omega_c": sf.omega_c},
        "hot_bath": bath(sf.hot_bath),
        "cold_bath": bath(sf.cold_bath),
        "integration": integration,
        "crossing": crossing,
    }


def scenario_to_toml(sf: ScenarioFile) -> str:
    """Render a scenario as TOML that parses back to an equal value."""
    lines: list[str] = []
    for section, body in scenario_to_dict(sf).items():
        lines.append(f"[{section}]")
        for key, value in body.items():
            lines.append(f"{key} = {_toml_value(value)}")
        lines.append("")
    return "\n".join(lines)


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return f'"{value}"'
    if isinstance(value, float) and value == int(value) and abs(value) < 1e15:
        return f"{value:.1f}"  # TOML floats need a dot
    return repr(value)


def build_scenario(sf: ScenarioFile) -> OttoScenario:
    """Materialize the simulation objects behind a parsed scenario.

    A partially specified [integration] section is completed with the
    hot-contact defaults (dt resolving omega_h, horizon of 100 hot
    relaxation times) so both contacts share one explicit config.
    """
    try:
        hot = _bath_spec(sf.hot_bath)
        cold = _bath_spec(sf.cold_bath)
        integrator = None
        if sf.integration.dt is not None or sf.integration.t_max is not None:
            integrator = default_integrator(
                sf.omega_h, hot, dt=sf.integration.dt, t_max=sf.integration.t_max
            )
        crossing = CrossingConfig(
            scan_dt=sf.crossing.scan_dt, bisect_tol=sf.crossing.bisect_tol
        )
        return OttoScenario(
            omega_h=sf.omega_h,
            omega_c=sf.omega_c,
            hot=hot,
            cold=cold,
            integrator=integrator,
            crossing=crossing,
        )
    except InvalidParameterError as exc:
        raise ConfigError(str(exc)) from exc


def _bath_spec(section: BathSection) -> BathSpec:
    return BathSpec(
        temperature=section.temperature,
        spectral=SpectralDensity(gamma=section.gamma, lam=section.lam),
        model=section.model,
    )


def quadrature_settings(sf: ScenarioFile, override_tol: float | None = None) -> QuadratureSettings:
    if override_tol is not None:
        if not (math.isfinite(override_tol) and override_tol > 0.0):
            raise ConfigError(f"quadrature tolerance override must be positive, got {override_tol!r}")
        return QuadratureSettings(abs_tol=override_tol, rel_tol=override_tol)
    return QuadratureSettings(
        abs_tol=sf.integration.quad_abs_tol, rel_tol=sf.integration.quad_rel_tol
    )


@dataclass(frozen=True)
class SweepAxis:
    name: str
    paths: tuple[str, ...]
    values: tuple[float, ...]


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple[SweepAxis, ...]
    max_points: int = _DEFAULT_SWEEP_LIMIT

    @property
    def size(self) -> int:
        n = 1
        for axis in self.axes:
            n *= len(axis.values)
        return n

    def grid(self):
        """Cartesian product of axis values, in document order."""
        for combo in itertools.product(*(axis.values for axis in self.axes)):
            yield tuple(zip(self.axes, combo))


def parse_sweep(text: str, base: ScenarioFile) -> SweepSpec:
    """Parse a sweep axes document and validate every path against the base."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"sweep file is not valid TOML: {exc}") from exc
    _reject_unknown(raw, {"axes", "max_points"}, "")
    max_points = raw.get("max_points", _DEFAULT_SWEEP_LIMIT)
    if not isinstance(max_points, int) or max_points < 1:
        raise ConfigError(f"max_points must be a positive integer, got {max_points!r}")
    axes_raw = raw.get("axes")
    if not axes_raw or not isinstance(axes_raw, list):
        raise ConfigError("sweep needs a non-empty [[axes]] list")

    axes = []
    for i, entry in enumerate(axes_raw):
        where = f"axes[{i}]."
        _reject_unknown(entry, {"name", "path", "values"}, where)
        paths = entry.get("path")
        if isinstance(paths, str):
            paths = [paths]
        if not paths or not all(isinstance(p, str) for p in paths):
            raise ConfigError(f"{where}path must be a string or list of strings")
        values = entry.get("values")
        if not values or not isinstance(values, list):
            raise ConfigError(f"{where}values must be a non-empty list")
        values = tuple(float(v) for v in values)
        name = entry.get("name") or paths[0].split(".")[-1]
        if not isinstance(name, str):
            raise ConfigError(f"{where}name must be a string")
        axes.append(SweepAxis(name=name, paths=tuple(paths), values=values))

    spec = SweepSpec(axes=tuple(axes), max_points=max_points)
    if spec.size > spec.max_points:
        raise ConfigError(f"sweep grid has {spec.size} points, above the limit {spec.max_points}")
    # Every path must address an existing scalar in the base scenario.
    base_dict = scenario_to_dict(base)
    for axis in spec.axes:
        for path in axis.paths:
            _resolve_path(base_dict, path)
    return spec


def apply_assignments(base: ScenarioFile, assignments) -> ScenarioFile:
    """New scenario with (axis, value) assignments applied along their paths."""
    doc = scenario_to_dict(base)
    for axis, value in assignments:
        for path in axis.paths:
            parent, key = _resolve_path(doc, path)
            parent[key] = value
    return scenario_from_dict(doc)


def _resolve_path(doc: dict, path: str):
    parts = path.split(".")
    node = doc
    for part in parts[:-1]:
        if not isinstance(node, dict) or part not in node:
            raise ConfigError(f"sweep path {path!r} does not exist in the scenario")
        node = node[part]
    leaf = parts[-1]
    if not isinstance(node, dict) or leaf not in node:
        raise ConfigError(f"sweep path {path!r} does not exist in the scenario")
    if isinstance(node[leaf], dict):
        raise ConfigError(f"sweep path {path!r} addresses a section, not a value")
    return node, leaf


def _section(raw: dict, key: str, required: bool) -> dict:
    sec = raw.get(key)
    if sec is None:
        if required:
            raise ConfigError(f"missing required section [{key}]")
        return {}
    if not isinstance(sec, dict):
        raise ConfigError(f"[{key}] must be a table")
    return sec


def _reject_unknown(table: dict, known: set[str], prefix: str):
    for key in table:
        if key not in known:
            raise ConfigError(f"unknown key {prefix}{key!r}")


def _positive(table: dict, key: str, prefix: str) -> float:
    if key not in table:
        raise ConfigError(f"missing required key {prefix}{key}")
    return _as_positive_float(table[key], f"{prefix}{key}")


def _optional_positive(table: dict, key: str, prefix: str) -> float | None:
    if key not in table or table[key] is None:
        return None
    return _as_positive_float(table[key], f"{prefix}{key}")


def _as_positive_float(value, label: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{label}: expected a number, got {value!r}")
    value = float(value)
    if not (math.isfinite(value) and value > 0.0):
        raise ConfigError(f"{label}: must be positive and finite, got {value!r}")
    return value
