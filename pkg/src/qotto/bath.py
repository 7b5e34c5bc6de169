"""Reservoir spectral data and time-dependent relaxation coefficients.

The bath couples through a Gaussian-cutoff spectral density
J(w) = gamma * w * exp(-w^2 / lam^2) at temperature T, with Bose
occupation n(w) = 1/(e^{w/T} - 1). The memory-kernel coefficients of the
second-order time-convolutionless equations of motion are

    G1(t) = int_0^inf dw (n+1) J(w) [sin(D t)/D + i (1 - cos(D t))/D],
    G2(t) = int_0^inf dw   n   J(w) [sin(D't)/D' + i (1 - cos(D't))/D'],

with D = omega_A - w and D' = -D: the time integral of the original
nested definition has been done analytically, leaving one frequency
quadrature with a smooth sinc-type kernel (limits t and 0 at D -> 0).
Since D' = -D, the second kernel is the conjugate of the first, so both
coefficients share one set of quadrature nodes.

The population relaxation rate entering d<sigma_z>/dt = -a(t)<sigma_z> - b(t)
is a(t) = 2 Re[G1 + G2], the drift is b(t) = 2 Re[G1 - G2]; their t -> inf
limits give the memoryless reference rates.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import InvalidParameterError
from .quadrature import PanelQuadResult, integrate_adaptive

# Beyond 8 cutoffs the Gaussian factor is < 1e-27; nothing left to integrate.
_RANGE_CUTOFFS = 8.0
# Branch to the series form of the kernel when |D|*t is below this.
_KERNEL_SERIES_THRESHOLD = 1e-6
# Couplings above this are outside the weak-coupling regime the model assumes.
WEAK_COUPLING_ADVISORY = 0.2


class DynamicsModel(Enum):
    TCL2 = "tcl2"
    LINDBLAD_REFERENCE = "lindblad"


@dataclass(frozen=True)
class SpectralDensity:
    """Gaussian-cutoff coupling density J(w) = gamma * w * exp(-w^2/lam^2)."""

    gamma: float
    lam: float

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma > 0.0):
            raise InvalidParameterError(f"gamma must be positive, got {self.gamma!r}")
        if not (math.isfinite(self.lam) and self.lam > 0.0):
            raise InvalidParameterError(f"cutoff lam must be positive, got {self.lam!r}")
        if self.weak_coupling_advisory:
            warnings.warn(
                f"gamma={self.gamma} exceeds {WEAK_COUPLING_ADVISORY}; the weak-coupling "
                "equations of motion may be unreliable",
                UserWarning,
                stacklevel=2,
            )

    @property
    def weak_coupling_advisory(self) -> bool:
        return self.gamma > WEAK_COUPLING_ADVISORY


@dataclass(frozen=True)
class BathSpec:
    """A thermal reservoir: temperature, spectral density, dynamics model."""

    temperature: float
    spectral: SpectralDensity
    model: DynamicsModel = DynamicsModel.TCL2

    def __post_init__(self):
        if not (math.isfinite(self.temperature) and self.temperature > 0.0):
            raise InvalidParameterError(
                f"temperature must be positive, got {self.temperature!r}"
            )


@dataclass(frozen=True)
class QuadratureSettings:
    """Tolerances for the coefficient quadrature (env/config overridable)."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_panels: int = 200_000


DEFAULT_QUADRATURE = QuadratureSettings()


@dataclass(frozen=True)
class Tcl2Coefficients:
    """Complex memory coefficients and their real relaxation combinations.

    decay_a = 2 Re[gamma1 + gamma2] and drift_b = 2 Re[gamma1 - gamma2] are
    stored alongside the complex pair; quad_error is the quadrature's own
    error estimate for the worst of the four underlying real integrals.
    """

    gamma1: complex
    gamma2: complex
    decay_a: float
    drift_b: float
    quad_error: float = 0.0

    @classmethod
    def from_gammas(cls, gamma1: complex, gamma2: complex, quad_error: float = 0.0):
        return cls(
            gamma1=gamma1,
            gamma2=gamma2,
            decay_a=2.0 * (gamma1.real + gamma2.real),
            drift_b=2.0 * (gamma1.real - gamma2.real),
            quad_error=quad_error,
        )

    @property
    def coherence_rate(self) -> complex:
        """Damping of <sigma_-> in the rotating frame: gamma1 + conj(gamma2)."""
        return self.gamma1 + self.gamma2.conjugate()


def spectral_density(omega: float, sd: SpectralDensity) -> float:
    """J(omega); defined for omega >= 0 and zero at the origin."""
    if omega < 0.0:
        raise InvalidParameterError(f"spectral density needs omega >= 0, got {omega!r}")
    return sd.gamma * omega * math.exp(-((omega / sd.lam) ** 2))


def bose_occupation(omega: float, T: float) -> float:
    """Mean thermal occupation 1/(e^{omega/T} - 1), underflow-safe at large ratios."""
    if omega <= 0.0:
        raise InvalidParameterError(
            "bose_occupation needs omega > 0; use weighted_emission for the w -> 0 limit"
        )
    if T <= 0.0:
        raise InvalidParameterError(f"temperature must be positive, got {T!r}")
    x = omega / T
    # e^{-x}/(1 - e^{-x}) is stable both for x -> 0 and x >> 1.
    return math.exp(-x) / (-math.expm1(-x))


def weighted_emission(omega: float, bath: BathSpec) -> float:
    """n(omega) * J(omega) with its removable omega -> 0 limit gamma * T."""
    if omega < 0.0:
        raise InvalidParameterError(f"weighted_emission needs omega >= 0, got {omega!r}")
    sd = bath.spectral
    if omega == 0.0:
        return sd.gamma * bath.temperature
    return spectral_density(omega, sd) * bose_occupation(omega, bath.temperature)


def lindblad_rates(omega_A: float, bath: BathSpec) -> tuple[float, float]:
    """Asymptotic (decay, drift) rates: the t -> inf limits of the coefficients.

    decay_a_inf = 2 pi J(omega_A) (2 n(omega_A) + 1), drift_b_inf = 2 pi J(omega_A).
    Their ratio reproduces detailed balance: -drift/decay = -tanh(omega_A / 2T).
    """
    if omega_A <= 0.0:
        raise InvalidParameterError(f"omega_A must be positive, got {omega_A!r}")
    j = spectral_density(omega_A, bath.spectral)
    n = bose_occupation(omega_A, bath.temperature)
    return 2.0 * math.pi * j * (2.0 * n + 1.0), 2.0 * math.pi * j


def tcl2_coefficients(
    t: float,
    omega_A: float,
    bath: BathSpec,
    quad: QuadratureSettings = DEFAULT_QUADRATURE,
) -> Tcl2Coefficients:
    """Evaluate G1(t), G2(t) by adaptive panel quadrature over frequency.

    The frequency integral runs to 8 cutoffs; panel width is capped at
    pi/(4t) so the oscillation of the kernel (period 2 pi / t) is always
    resolved deterministically. Raises QuadratureError when the tolerance
    cannot be met within the panel budget.
    """
    if t < 0.0:
        raise InvalidParameterError(f"time must be nonnegative, got {t!r}")
    if omega_A <= 0.0:
        raise InvalidParameterError(f"omega_A must be positive, got {omega_A!r}")
    if t == 0.0:
        return Tcl2Coefficients.from_gammas(0j, 0j)

    sd = bath.spectral
    upper = _RANGE_CUTOFFS * sd.lam
    max_width = min(sd.lam / 4.0, math.pi / (4.0 * t))

    def rows(w: np.ndarray) -> np.ndarray:
        f1, f2 = _emission_pair(w, sd.gamma, sd.lam, bath.temperature)
        kernel = _sinc_kernel(omega_A - w, t)
        return np.stack([f1 * kernel, f2 * kernel.conjugate()])

    result: PanelQuadResult = integrate_adaptive(
        rows,
        0.0,
        upper,
        max_width=max_width,
        abs_tol=quad.abs_tol,
        rel_tol=quad.rel_tol,
        max_panels=quad.max_panels,
    )
    g1, g2 = result.values
    return Tcl2Coefficients.from_gammas(complex(g1), complex(g2), quad_error=result.error)


def _emission_pair(w: np.ndarray, gamma: float, lam: float, T: float):
    """(n+1) J and n J on an array of strictly interior frequencies."""
    x = w / T
    n = np.exp(-x) / (-np.expm1(-x))
    j = gamma * w * np.exp(-((w / lam) ** 2))
    return (n + 1.0) * j, n * j


def _sinc_kernel(delta: np.ndarray, t: float) -> np.ndarray:
    """sin(delta t)/delta + i (1 - cos(delta t))/delta with series at delta ~ 0."""
    theta = delta * t
    small = np.abs(theta) < _KERNEL_SERIES_THRESHOLD
    safe = np.where(small, 1.0, delta)
    re = np.where(small, t * (1.0 - theta * theta / 6.0), np.sin(theta) / safe)
    # 1 - cos as 2 sin^2(theta/2): no cancellation at moderate theta either.
    im = np.where(
        small,
        0.5 * t * theta * (1.0 - theta * theta / 12.0),
        2.0 * np.sin(0.5 * theta) ** 2 / safe,
    )
    return re + 1j * im
