"""Closed-form thermodynamics of a two-level system.

Natural units throughout: k_B = hbar = 1, so temperatures and level
spacings share one energy unit and entropies are dimensionless (natural
log). A state is the triple (omega, p_excited, coherence): the level
spacing, the excited-state population, and the amplitude of the lowering
operator <sigma_->. The density matrix it represents is

    [[p_excited, conj(coherence)],
     [coherence,  1 - p_excited]]

in the (excited, ground) basis, with energies +omega/2 and -omega/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DivergentRatioError,
    DivergentRelativeEntropyError,
    InvalidParameterError,
    UndefinedTemperatureError,
)

_POSITIVITY_SLACK = 1e-12


@dataclass(frozen=True)
class TwoLevelState:
    """State of a two-level system with spacing ``omega``.

    Invariants: omega > 0, p_excited in [0, 1], and
    |coherence|^2 <= p_excited * (1 - p_excited) (matrix positivity).
    Instances are immutable and safe to share between tasks.
    """

    omega: float
    p_excited: float
    coherence: complex = 0j

    def __post_init__(self):
        if not (math.isfinite(self.omega) and self.omega > 0.0):
            raise InvalidParameterError(f"omega must be positive and finite, got {self.omega!r}")
        if not (0.0 <= self.p_excited <= 1.0):
            raise InvalidParameterError(f"p_excited must lie in [0, 1], got {self.p_excited!r}")
        c2 = abs(self.coherence) ** 2
        if c2 > self.p_excited * (1.0 - self.p_excited) + _POSITIVITY_SLACK:
            raise InvalidParameterError(
                f"|coherence|^2={c2!r} exceeds p(1-p)={self.p_excited * (1 - self.p_excited)!r}"
            )

    @property
    def is_diagonal(self) -> bool:
        return self.coherence == 0

    def with_omega(self, omega: float) -> "TwoLevelState":
        """Spacing change at frozen populations (an instantaneous adiabat)."""
        return TwoLevelState(omega, self.p_excited, self.coherence)


@dataclass(frozen=True)
class EntropyLedger:
    """Von Neumann entropy of a state and its relative entropy to a reference."""

    von_neumann: float
    rel_entropy_to_ref: float

    def __post_init__(self):
        if self.von_neumann < 0.0 or self.rel_entropy_to_ref < 0.0:
            raise InvalidParameterError("entropies must be nonnegative")


def thermal_state(omega: float, T: float) -> TwoLevelState:
    """Thermal (canonical) state: p_excited = 1 / (1 + exp(omega/T))."""
    if not (math.isfinite(omega) and omega > 0.0):
        raise InvalidParameterError(f"omega must be positive, got {omega!r}")
    if not (math.isfinite(T) and T > 0.0):
        raise InvalidParameterError(f"temperature must be positive, got {T!r}")
    return TwoLevelState(omega, canonical_population(omega / T))


def canonical_population(x: float) -> float:
    """Excited-state probability 1/(1 + e^x) for spacing/temperature ratio x."""
    if x > 0:
        return math.exp(-x) / (1.0 + math.exp(-x))
    return 1.0 / (1.0 + math.exp(x))


def sigma_z_expectation(s: TwoLevelState) -> float:
    """<sigma_z> = 2 p_excited - 1; equals -tanh(omega/2T) for thermal states."""
    return 2.0 * s.p_excited - 1.0


def x_ratio(s: TwoLevelState) -> float:
    """Spacing over effective temperature, omega/T_eff = -2 atanh(<sigma_z>).

    Computed as the population log-odds log((1-p)/p): the same quantity in
    a form that stays exact arbitrarily deep into the tails (atanh on
    2p - 1 would saturate at |<sigma_z>| ~ 1 - 1e-16). Divergence happens
    only for populations pinned exactly at 0 or 1. Positive iff
    p_excited < 1/2.
    """
    _require_diagonal(s)
    p = s.p_excited
    if p <= 0.0 or p >= 1.0:
        raise DivergentRatioError(
            f"population {p!r} is pinned; the ratio omega/T_eff diverges"
        )
    return math.log1p(-p) - math.log(p)


def effective_temperature(s: TwoLevelState) -> float:
    """Temperature whose thermal state has this state's populations."""
    return s.omega / x_ratio(s)


def mean_energy(s: TwoLevelState) -> float:
    """Mean energy (omega/2) <sigma_z> for levels at +-omega/2."""
    return 0.5 * s.omega * sigma_z_expectation(s)


def von_neumann_entropy(s: TwoLevelState) -> float:
    """-Tr[rho ln rho] over the two eigenvalues, with the 0 ln 0 = 0 convention.

    For diagonal states this is the binary entropy of p_excited; a nonzero
    coherence shifts the eigenvalues to 1/2 +- sqrt((p - 1/2)^2 + |c|^2).
    """
    if s.coherence == 0:
        return binary_entropy(s.p_excited)
    r = math.hypot(s.p_excited - 0.5, abs(s.coherence))
    r = min(r, 0.5)  # positivity slack can push r infinitesimally past 1/2
    return binary_entropy(0.5 + r)


def binary_entropy(p: float) -> float:
    """-p ln p - (1-p) ln(1-p), zero at the endpoints."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log(p) - (1.0 - p) * math.log1p(-p)


def relative_entropy(a: TwoLevelState, b: TwoLevelState) -> float:
    """Relative entropy S(a||b) = -Tr[a ln b] - S_v[a] of the populations.

    The reference ``b`` must be diagonal with populations strictly inside
    (0, 1) unless ``a`` shares the pinned population exactly. ``a`` may
    carry coherence; only its eigen-decomposition enters through S_v[a].
    States may have different spacings: the comparison is between
    population distributions, as used by the cycle ledgers.
    """
    if not b.is_diagonal:
        raise InvalidParameterError("reference state of relative_entropy must be diagonal")
    pa, pb = a.p_excited, b.p_excited
    if pb <= 0.0 or pb >= 1.0:
        if pa == pb:
            return 0.0
        raise DivergentRelativeEntropyError(
            f"reference population {pb!r} has smaller support than {pa!r}"
        )
    if a.is_diagonal:
        # Direct KL form: exactly zero for equal populations.
        out = 0.0
        if pa > 0.0:
            out += pa * math.log(pa / pb)
        if pa < 1.0:
            out += (1.0 - pa) * math.log((1.0 - pa) / (1.0 - pb))
        return out
    cross = -(pa * math.log(pb) + (1.0 - pa) * math.log1p(-pb))
    return cross - von_neumann_entropy(a)


def entropy_ledger(s: TwoLevelState, ref: TwoLevelState) -> EntropyLedger:
    """Bundle S_v[s] with S(s||ref); tiny negative rounding is clipped at 0."""
    return EntropyLedger(
        von_neumann=von_neumann_entropy(s),
        rel_entropy_to_ref=max(relative_entropy(s, ref), 0.0),
    )


def _require_diagonal(s: TwoLevelState):
    if not s.is_diagonal:
        raise UndefinedTemperatureError(
            "effective temperature is undefined for states with coherence"
        )


# Vectorized forms used by trajectory bookkeeping. These mirror the scalar
# operations above for arrays of populations/coherences.

def x_ratio_series(p: np.ndarray) -> np.ndarray:
    """Log-odds log((1-p)/p) per sample; +-inf where the population is pinned."""
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore"):
        return np.log1p(-p) - np.log(p)


def binary_entropy_series(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    inside = (p > 0.0) & (p < 1.0)
    q = p[inside]
    out[inside] = -q * np.log(q) - (1.0 - q) * np.log1p(-q)
    return out


def entropy_series(p: np.ndarray, coherence_abs: np.ndarray) -> np.ndarray:
    """Von Neumann entropy per sample for populations with coherences."""
    r = np.minimum(np.hypot(np.asarray(p) - 0.5, coherence_abs), 0.5)
    return binary_entropy_series(0.5 + r)


def rel_entropy_to_thermal_series(
    p: np.ndarray, coherence_abs: np.ndarray, p_eq: float
) -> np.ndarray:
    """S(rho(t)||rho_eq) per sample against a fixed diagonal reference.

    Negative rounding residue (|.| < 1e-10) is clipped to satisfy the
    ledger's nonnegativity; anything larger is a genuine bug upstream.
    """
    if p_eq <= 0.0 or p_eq >= 1.0:
        raise DivergentRelativeEntropyError(f"reference population {p_eq!r} is pinned")
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        cross = -(p * math.log(p_eq) + (1.0 - p) * math.log1p(-p_eq))
    d = cross - entropy_series(p, coherence_abs)
    if np.any(d < -1e-10):
        raise InvalidParameterError("relative entropy fell below zero beyond rounding")
    return np.maximum(d, 0.0)
