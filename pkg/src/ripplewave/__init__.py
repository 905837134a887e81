"""Travelling ripples in collectives of direction-reversing agents.

Two families of agents move across a periodic domain at unit speed in
opposite directions and stochastically reverse at a density-controlled
rate; freshly reversed agents pass through a refractory stage before they
can reverse again.  This package provides

* :mod:`ripplewave.rates` — the density-dependent reversal ("turning")
  and refractory-recovery ("aging") rate functions,
* :mod:`ripplewave.ode` — the well-mixed dynamics: fixed points,
  stability, the onset of reversal oscillations,
* :mod:`ripplewave.dispersion` — linear transport stability of the
  uniform state, mode by mode,
* :mod:`ripplewave.waves` — admissible plateau waves: existence,
  selection, and explicit construction of co-moving profiles,
* :mod:`ripplewave.sim` — an upwind finite-volume solver for the full
  transport–reaction system,
* :mod:`ripplewave.measure` — wave speeds and co-moving profiles
  extracted from simulations,
* :mod:`ripplewave.figures` — the parameter studies behind the headline
  results,
* :mod:`ripplewave.cli` — the ``ripplewave`` command.
"""

from .errors import (
    BlowUpError,
    ConfigError,
    ConsistencyError,
    ConstructionError,
    DomainError,
    IncomparableError,
    IntegrationError,
    NoWaveError,
    NumericError,
    ParameterError,
    ReachabilityError,
    RippleWaveError,
    SingularityError,
    UsageError,
)
from .model import DerivedCurves, ModelParams, load_model, nondimensionalize
from .rates import (
    Constant,
    DoubleSigmoid,
    Linear,
    PiecewiseLinearStep,
    Quadratic,
    RateFunction,
    SigmoidExp,
    SigmoidRational,
    TripleStep,
    rate_from_spec,
)
from .ode import (
    HopfThresholds,
    OdeState,
    SteadyState,
    Trajectory,
    anisotropy_onset,
    find_steady_states,
    hopf_thresholds,
    integrate_ode,
    net_drift,
    ode_rhs,
    ode_stability,
)
from .dispersion import (
    DispersionPoint,
    RhCoefficients,
    StabilityReport,
    anisotropic_necessary_conditions,
    isotropic_transport_stability,
    rh_coefficients,
    spectrum_at_k,
    wave_formation_range,
)
from .waves import (
    AdmissibleWave,
    Branch,
    PhaseOrbit,
    Segment,
    WaveBounds,
    WaveTuple,
    admissible_branches,
    antisymmetric_pair,
    construct_admissible_wave,
    find_stable_tuples,
    heteroclinic_check,
    jump_partner,
    reachable_values,
    wave_bounds,
    wave_profile_slope,
)
from .sim import (
    FieldState,
    Grid,
    SimConfig,
    SimResult,
    initial_condition,
    simulate,
    step,
)
from .measure import (
    ComparisonReport,
    WaveMeasurement,
    compare_profiles,
    estimate_switch_points,
    measure_wave_speed,
    plateau_fit,
)
from .figures import reproduce_figure

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "RippleWaveError", "ParameterError", "DomainError", "ConfigError",
    "UsageError", "ConsistencyError", "NumericError", "IntegrationError",
    "SingularityError", "BlowUpError", "ConstructionError", "NoWaveError",
    "ReachabilityError", "IncomparableError",
    # model and rates
    "ModelParams", "DerivedCurves", "load_model", "nondimensionalize",
    "RateFunction", "Constant", "Linear", "Quadratic", "SigmoidExp",
    "SigmoidRational", "PiecewiseLinearStep", "DoubleSigmoid", "TripleStep",
    "rate_from_spec",
    # well-mixed dynamics
    "OdeState", "SteadyState", "HopfThresholds", "Trajectory", "ode_rhs",
    "net_drift", "anisotropy_onset", "find_steady_states", "ode_stability",
    "hopf_thresholds", "integrate_ode",
    # transport stability
    "RhCoefficients", "DispersionPoint", "StabilityReport",
    "rh_coefficients", "spectrum_at_k", "isotropic_transport_stability",
    "anisotropic_necessary_conditions", "wave_formation_range",
    # waves
    "Branch", "WaveTuple", "PhaseOrbit", "AdmissibleWave", "WaveBounds",
    "Segment", "admissible_branches", "find_stable_tuples",
    "antisymmetric_pair", "heteroclinic_check", "wave_profile_slope",
    "jump_partner", "reachable_values", "wave_bounds",
    "construct_admissible_wave",
    # solver
    "Grid", "FieldState", "SimConfig", "SimResult", "initial_condition",
    "step", "simulate",
    # measurement
    "WaveMeasurement", "ComparisonReport", "measure_wave_speed",
    "compare_profiles", "plateau_fit", "estimate_switch_points",
    # studies
    "reproduce_figure",
]
