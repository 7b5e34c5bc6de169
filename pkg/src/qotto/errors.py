"""Exception hierarchy shared across the package.

The CLI maps these onto its exit-code contract: configuration problems
exit 2, physically infeasible requests exit 3, numerical failures exit 4.
"""


class QottoError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameterError(QottoError, ValueError):
    """A parameter or state lies outside its physical domain."""


class DivergentRatioError(QottoError):
    """The spacing/temperature ratio diverges (population pinned at 0 or 1)."""


class UndefinedTemperatureError(QottoError):
    """No effective temperature exists for this state (coherent or inverted)."""


class DivergentRelativeEntropyError(QottoError):
    """Relative entropy is infinite because the supports do not match."""


class ConfigError(QottoError):
    """A scenario or sweep document failed to parse or validate."""


class NoCrossingError(QottoError):
    """The requested ratio crossing never occurs within the horizon."""


class NumericalFailureError(QottoError):
    """A numerical procedure could not meet its accuracy contract."""


class QuadratureError(NumericalFailureError):
    """Adaptive quadrature did not converge; carries its error estimate."""

    def __init__(self, message: str, error_estimate: float, panels: int):
        super().__init__(f"{message} (error estimate {error_estimate:.3e}, {panels} panels)")
        self.error_estimate = error_estimate
        self.panels = panels


class PositivityError(NumericalFailureError):
    """Time evolution left the physical state space (|<sigma_z>| > 1)."""

    def __init__(self, time: float, sigma_z: float):
        super().__init__(
            f"positivity breach at t={time:.6g}: <sigma_z>={sigma_z!r} lies outside [-1, 1]"
        )
        self.time = time
        self.sigma_z = sigma_z
