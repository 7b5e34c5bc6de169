"""Two-level Otto engine with memoryless and memoryful thermal reservoirs."""

__version__ = "0.1.0"

from .bath import (
    BathSpec,
    DynamicsModel,
    QuadratureSettings,
    SpectralDensity,
    Tcl2Coefficients,
    bose_occupation,
    lindblad_rates,
    spectral_density,
    tcl2_coefficients,
    weighted_emission,
)
from .cycle import (
    CarnotReport,
    Crossing,
    CrossingConfig,
    CrossingSelection,
    CycleReport,
    OttoScenario,
    TwoStepReport,
    carnot_cycle,
    closed_form_report,
    entropy_decomposition,
    find_crossing_time,
    nm_lower_bound,
    run_otto_cycle,
    two_step_protocol,
)
from .config import (
    ScenarioFile,
    SweepSpec,
    build_scenario,
    parse_scenario,
    parse_sweep,
    scenario_to_dict,
    scenario_to_toml,
)
from .dynamics import (
    BathContact,
    IntegratorConfig,
    Trajectory,
    default_integrator,
    evolve_coherence,
    evolve_markovian,
    evolve_nonmarkovian,
    evolve_oracle,
    oracle_deviation,
)
from .errors import (
    ConfigError,
    DivergentRatioError,
    DivergentRelativeEntropyError,
    InvalidParameterError,
    NoCrossingError,
    NumericalFailureError,
    PositivityError,
    QottoError,
    QuadratureError,
    UndefinedTemperatureError,
)
from .states import (
    EntropyLedger,
    TwoLevelState,
    effective_temperature,
    entropy_ledger,
    mean_energy,
    relative_entropy,
    sigma_z_expectation,
    thermal_state,
    von_neumann_entropy,
    x_ratio,
)

__all__ = [name for name in dir() if not name.startswith("_")]
