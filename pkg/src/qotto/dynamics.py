"""Time evolution of a two-level state in contact with one reservoir.

Populations obey d<sigma_z>/dt = -a(t) <sigma_z> - b(t) with coefficients
from the bath module; the coherence obeys a linear complex equation that
is integrated in the rotating frame (the free phase e^{-i omega_A t} is
pulled out so the step size only needs to resolve the envelope).

Three solvers share this contract:

* ``evolve_nonmarkovian`` -- fixed-step classical RK4 on the memoryful
  coefficients; deterministic and reproducible across platforms.
* ``evolve_markovian`` -- the memoryless reference with constant
  asymptotic rates; an exact exponential, no stepping error.
* ``evolve_oracle`` -- the same memoryful equation solved by the
  integrating-factor closed form on a twice-refined grid with composite
  (cumulative Simpson) quadrature; shares nothing with the RK4 stepper
  and exists to cross-check it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .bath import (
    BathSpec,
    DEFAULT_QUADRATURE,
    DynamicsModel,
    QuadratureSettings,
    Tcl2Coefficients,
    lindblad_rates,
    tcl2_coefficients,
)
from .errors import InvalidParameterError, PositivityError
from .states import (
    TwoLevelState,
    entropy_series,
    rel_entropy_to_thermal_series,
    thermal_state,
    x_ratio_series,
)

# Steps per fastest oscillation period demanded of dt at construction.
_MIN_STEPS_PER_PERIOD = 40
_DEFAULT_STEPS_PER_PERIOD = 80
# Relaxation times covered by the default horizon.
_DEFAULT_RELAXATION_SPAN = 100.0
_POSITIVITY_TOL = 1e-9


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step integration settings for one bath contact."""

    dt: float
    t_max: float
    sample_every: int = 1
    oracle_tol: float = 1e-6

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0.0):
            raise InvalidParameterError(f"dt must be positive, got {self.dt!r}")
        if not (math.isfinite(self.t_max) and self.t_max >= self.dt):
            raise InvalidParameterError("t_max must be at least one step long")
        if self.sample_every < 1:
            raise InvalidParameterError("sample_every must be a positive integer")

    def validate_for(self, omega_max: float) -> "IntegratorConfig":
        """Require dt to resolve the fastest oscillation of the scenario."""
        limit = 2.0 * math.pi / (_MIN_STEPS_PER_PERIOD * omega_max)
        if self.dt > limit:
            raise InvalidParameterError(
                f"dt={self.dt!r} too coarse for omega={omega_max!r}; need dt <= {limit!r}"
            )
        return self

    def with_horizon(self, t_max: float) -> "IntegratorConfig":
        return replace(self, t_max=t_max)


def default_integrator(
    omega_A: float,
    bath: BathSpec,
    dt: float | None = None,
    t_max: float | None = None,
    sample_every: int = 1,
) -> IntegratorConfig:
    """dt resolving the Bohr frequency 80-fold, horizon of 100 relaxation times."""
    if dt is None:
        dt = 2.0 * math.pi / (_DEFAULT_STEPS_PER_PERIOD * omega_A)
    if t_max is None:
        decay_inf, _ = lindblad_rates(omega_A, bath)
        t_max = _DEFAULT_RELAXATION_SPAN / decay_inf
    cfg = IntegratorConfig(dt=dt, t_max=t_max, sample_every=sample_every)
    return cfg.validate_for(omega_A)


@dataclass(frozen=True)
class Trajectory:
    """Time-sampled observables along one bath contact.

    All arrays share one length; times start at 0 and increase strictly.
    ``rel_entropy_to_eq`` is measured against the thermal state of the
    contact's own bath, so it starts at zero for an equilibrium start and
    is the memory witness D(t) plotted against time.
    """

    times: np.ndarray
    sigma_z: np.ndarray
    coherence: np.ndarray
    x_ratio: np.ndarray
    rel_entropy_to_eq: np.ndarray
    s_von_neumann: np.ndarray
    omega: float
    bath_temperature: float

    def __len__(self) -> int:
        return len(self.times)

    def state_at(self, i: int) -> TwoLevelState:
        p = 0.5 * (1.0 + float(self.sigma_z[i]))
        return TwoLevelState(self.omega, min(max(p, 0.0), 1.0), complex(self.coherence[i]))

    @property
    def final_state(self) -> TwoLevelState:
        return self.state_at(len(self) - 1)

    @classmethod
    def build(
        cls,
        times: np.ndarray,
        sigma_z: np.ndarray,
        coherence: np.ndarray,
        omega: float,
        bath_temperature: float,
    ) -> "Trajectory":
        p = 0.5 * (1.0 + np.asarray(sigma_z))
        p_eq = thermal_state(omega, bath_temperature).p_excited
        cabs = np.abs(coherence)
        arrays = dict(
            times=np.asarray(times, dtype=float),
            sigma_z=np.asarray(sigma_z, dtype=float),
            coherence=np.asarray(coherence, dtype=complex),
            x_ratio=x_ratio_series(p),
            rel_entropy_to_eq=rel_entropy_to_thermal_series(p, cabs, p_eq),
            s_von_neumann=entropy_series(p, cabs),
        )
        for arr in arrays.values():
            arr.setflags(write=False)
        return cls(omega=omega, bath_temperature=bath_temperature, **arrays)


class Tcl2Propagator:
    """RK4 stepping of (sigma_z, rotating-frame coherence) with memoized coefficients.

    The memo table is owned by one propagator instance (one task); sharing
    a propagator across threads is not supported, sharing results is.
    """

    def __init__(
        self,
        bath: BathSpec,
        omega_A: float,
        quad: QuadratureSettings = DEFAULT_QUADRATURE,
    ):
        self.bath = bath
        self.omega_A = omega_A
        self.quad = quad
        self._memo: dict[float, Tcl2Coefficients] = {}

    def coefficients(self, t: float) -> Tcl2Coefficients:
        c = self._memo.get(t)
        if c is None:
            c = tcl2_coefficients(t, self.omega_A, self.bath, self.quad)
            self._memo[t] = c
        return c

    def step(self, sz: float, ct: complex, t0: float, t1: float) -> tuple[float, complex]:
        """One classical RK4 step from t0 to t1 for both variables."""
        h = t1 - t0
        c_lo = self.coefficients(t0)
        c_mid = self.coefficients(0.5 * (t0 + t1))
        c_hi = self.coefficients(t1)

        k1 = -(c_lo.decay_a * sz + c_lo.drift_b)
        k2 = -(c_mid.decay_a * (sz + 0.5 * h * k1) + c_mid.drift_b)
        k3 = -(c_mid.decay_a * (sz + 0.5 * h * k2) + c_mid.drift_b)
        k4 = -(c_hi.decay_a * (sz + h * k3) + c_hi.drift_b)
        sz_next = sz + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        if ct != 0:
            q1, qm, q2 = c_lo.coherence_rate, c_mid.coherence_rate, c_hi.coherence_rate
            m1 = -q1 * ct
            m2 = -qm * (ct + 0.5 * h * m1)
            m3 = -qm * (ct + 0.5 * h * m2)
            m4 = -q2 * (ct + h * m3)
            ct = ct + (h / 6.0) * (m1 + 2.0 * m2 + 2.0 * m3 + m4)
        return sz_next, ct

    def advance(
        self, sz: float, ct: complex, t0: float, duration: float, substeps: int
    ) -> tuple[float, complex]:
        """Advance by ``duration`` from t0 in ``substeps`` equal RK4 steps."""
        h = duration / substeps
        for j in range(substeps):
            sz, ct = self.step(sz, ct, t0 + j * h, t0 + (j + 1) * h)
        return sz, ct


class MarkovPropagator:
    """Exact exponential relaxation at the asymptotic rates (no stepping error)."""

    def __init__(self, bath: BathSpec, omega_A: float):
        self.bath = bath
        self.omega_A = omega_A
        self.decay_inf, drift_inf = lindblad_rates(omega_A, bath)
        self.sz_eq = -drift_inf / self.decay_inf

    def step(self, sz: float, ct: complex, t0: float, t1: float) -> tuple[float, complex]:
        return self.advance(sz, ct, t0, t1 - t0, 1)

    def advance(
        self, sz: float, ct: complex, t0: float, duration: float, substeps: int = 1
    ) -> tuple[float, complex]:
        decay = math.exp(-self.decay_inf * duration)
        sz_next = self.sz_eq + (sz - self.sz_eq) * decay
        # Rotating frame: only the T2 = 2 T1 envelope remains.
        ct_next = ct * math.exp(-0.5 * self.decay_inf * duration)
        return sz_next, ct_next


def make_propagator(bath: BathSpec, omega_A: float, quad: QuadratureSettings = DEFAULT_QUADRATURE):
    if bath.model is DynamicsModel.TCL2:
        return Tcl2Propagator(bath, omega_A, quad)
    return MarkovPropagator(bath, omega_A)


def evolve_nonmarkovian(
    initial: TwoLevelState,
    bath: BathSpec,
    omega_A: float,
    cfg: IntegratorConfig,
    quad: QuadratureSettings = DEFAULT_QUADRATURE,
) -> Trajectory:
    """Integrate the memoryful equations of motion from ``initial``.

    Raises PositivityError if |<sigma_z>| ever exceeds 1 + 1e-9: every
    downstream thermodynamic quantity would be meaningless, so breaches
    are reported with their time rather than clamped.
    """
    _check_contact(initial, omega_A)
    if bath.model is not DynamicsModel.TCL2:
        raise InvalidParameterError("evolve_nonmarkovian needs a bath with the TCL2 model")
    prop = Tcl2Propagator(bath, omega_A, quad)
    times, sz, ct = _run_stepper(prop, initial, cfg)
    coherence = ct * np.exp(-1j * omega_A * times)
    return _sampled_trajectory(times, sz, coherence, omega_A, bath.temperature, cfg)


def evolve_coherence(
    initial: TwoLevelState,
    bath: BathSpec,
    omega_A: float,
    cfg: IntegratorConfig,
    quad: QuadratureSettings = DEFAULT_QUADRATURE,
) -> np.ndarray:
    """The <sigma_-> samples of the memoryful evolution; <sigma_+> is its conjugate."""
    return evolve_nonmarkovian(initial, bath, omega_A, cfg, quad).coherence


def evolve_markovian(
    initial: TwoLevelState,
    bath: BathSpec,
    omega_A: float,
    cfg: IntegratorConfig,
) -> Trajectory:
    """Closed-form exponential relaxation toward the bath's thermal state."""
    _check_contact(initial, omega_A)
    if bath.model is not DynamicsModel.LINDBLAD_REFERENCE:
        raise InvalidParameterError(
            "evolve_markovian needs a bath with the LINDBLAD_REFERENCE model"
        )
    prop = MarkovPropagator(bath, omega_A)
    n = _step_count(cfg)
    times = np.arange(n + 1) * cfg.dt
    decay = np.exp(-prop.decay_inf * times)
    sz0 = 2.0 * initial.p_excited - 1.0
    sz = prop.sz_eq + (sz0 - prop.sz_eq) * decay
    coherence = initial.coherence * np.exp(
        (-1j * omega_A - 0.5 * prop.decay_inf) * times
    )
    return _sampled_trajectory(times, sz, coherence, omega_A, bath.temperature, cfg)


def evolve_oracle(
    initial: TwoLevelState,
    bath: BathSpec,
    omega_A: float,
    cfg: IntegratorConfig,
    quad: QuadratureSettings = DEFAULT_QUADRATURE,
) -> Trajectory:
    """Integrating-factor solution of the same memoryful equation.

    <sigma_z>(t) = e^{-A(t)} [<sigma_z>(0) - int_0^t e^{A(s)} b(s) ds] with
    A(t) = int_0^t a(s) ds, both integrals by cumulative Simpson on a grid
    of half the stepper's dt. The coherence uses the matching closed form
    with the complex damping rate.
    """
    _check_contact(initial, omega_A)
    if bath.model is not DynamicsModel.TCL2:
        raise InvalidParameterError("evolve_oracle needs a bath with the TCL2 model")
    prop = Tcl2Propagator(bath, omega_A, quad)
    n = _step_count(cfg)
    h = 0.5 * cfg.dt
    fine_times = np.arange(2 * n + 1) * h
    coeffs = [prop.coefficients(float(t)) for t in fine_times]
    a = np.array([c.decay_a for c in coeffs])
    b = np.array([c.drift_b for c in coeffs])

    sz0 = 2.0 * initial.p_excited - 1.0
    big_a = _cumulative_simpson(a, h)
    growth = np.exp(big_a)
    inner = _cumulative_simpson(growth * b, h)
    sz_fine = np.exp(-big_a) * (sz0 - inner)

    if initial.coherence != 0:
        q = np.array([c.coherence_rate for c in coeffs])
        phase = _cumulative_simpson(q, h)
        coh_fine = initial.coherence * np.exp(-1j * omega_A * fine_times - phase)
    else:
        coh_fine = np.zeros_like(fine_times, dtype=complex)

    times = fine_times[::2]
    return _sampled_trajectory(times, sz_fine[::2], coh_fine[::2], omega_A, bath.temperature, cfg)


def oracle_deviation(
    initial: TwoLevelState,
    bath: BathSpec,
    omega_A: float,
    cfg: IntegratorConfig,
    quad: QuadratureSettings = DEFAULT_QUADRATURE,
) -> float:
    """max_t |stepper - oracle| over the shared sample times."""
    stepped = evolve_nonmarkovian(initial, bath, omega_A, cfg, quad)
    closed = evolve_oracle(initial, bath, omega_A, cfg, quad)
    return float(np.max(np.abs(stepped.sigma_z - closed.sigma_z)))


@dataclass(frozen=True)
class BathContact:
    """One reservoir contact: who evolves, under which bath, for how long.

    This is the trajectory source handed to the crossing solver; the
    propagator it creates owns its own coefficient memo, so contacts can
    be evaluated concurrently without shared state.
    """

    initial: TwoLevelState
    bath: BathSpec
    omega_A: float
    cfg: IntegratorConfig
    quad: QuadratureSettings = DEFAULT_QUADRATURE

    def propagator(self):
        return make_propagator(self.bath, self.omega_A, self.quad)

    def trajectory(self, t_max: float | None = None) -> Trajectory:
        cfg = self.cfg if t_max is None else self.cfg.with_horizon(t_max)
        if self.bath.model is DynamicsModel.TCL2:
            return evolve_nonmarkovian(self.initial, self.bath, self.omega_A, cfg, self.quad)
        return evolve_markovian(self.initial, self.bath, self.omega_A, cfg)


def _run_stepper(prop, initial: TwoLevelState, cfg: IntegratorConfig):
    n = _step_count(cfg)
    times = np.arange(n + 1) * cfg.dt
    sz = np.empty(n + 1)
    ct = np.empty(n + 1, dtype=complex)
    sz[0] = 2.0 * initial.p_excited - 1.0
    ct[0] = initial.coherence
    for k in range(n):
        sz[k + 1], ct[k + 1] = prop.step(
            float(sz[k]), complex(ct[k]), float(times[k]), float(times[k + 1])
        )
        if abs(sz[k + 1]) > 1.0 + _POSITIVITY_TOL:
            raise PositivityError(time=float(times[k + 1]), sigma_z=float(sz[k + 1]))
    return times, sz, ct


def _sampled_trajectory(times, sz, coherence, omega_A, bath_T, cfg) -> Trajectory:
    idx = np.arange(0, len(times), cfg.sample_every)
    if idx[-1] != len(times) - 1:
        idx = np.append(idx, len(times) - 1)
    return Trajectory.build(times[idx], sz[idx], coherence[idx], omega_A, bath_T)


def _step_count(cfg: IntegratorConfig) -> int:
    # floor with slack so t_max = k*dt yields exactly k steps.
    return max(1, int(math.floor(cfg.t_max / cfg.dt + 1e-9)))


def _check_contact(initial: TwoLevelState, omega_A: float):
    if initial.omega != omega_A:
        raise InvalidParameterError(
            f"initial state spacing {initial.omega!r} differs from contact omega {omega_A!r}"
        )


def _cumulative_simpson(y: np.ndarray, h: float) -> np.ndarray:
    """Cumulative integral of uniformly sampled y, 4th-order composite rule.

    Even nodes use standard Simpson pairs; odd nodes use the three-point
    half-panel formula h(5 y_j-1 + 8 y_j - y_j+1)/12. Independent of any
    Runge-Kutta machinery by construction.
    """
    n = len(y)
    out = np.zeros(n, dtype=y.dtype)
    if n < 2:
        return out
    if n == 2:  # single interval: trapezoid is the best available
        out[1] = 0.5 * h * (y[0] + y[1])
        return out
    even = np.arange(2, n, 2)
    pair_integrals = (h / 3.0) * (y[even - 2] + 4.0 * y[even - 1] + y[even])
    out[even] = np.cumsum(pair_integrals)
    odd = np.arange(1, n - 1, 2)
    out[odd] = out[odd - 1] + (h / 12.0) * (5.0 * y[odd - 1] + 8.0 * y[odd] - y[odd + 1])
    if n % 2 == 0:  # trailing odd node uses the left-biased half-panel form
        j = n - 1
        out[j] = out[j - 1] + (h / 12.0) * (-y[j - 2] + 8.0 * y[j - 1] + 5.0 * y[j])
    return out
