"""Numerical laboratory for partitioned fluid-structure coupling on the
leaky-piston model: discretized added-mass/added-damping operators,
monolithic and Dirichlet-Neumann solvers, and convergence-rate sweeps."""

__version__ = "0.1.0"

from .coupling import (
    CouplingConfig,
    CouplingDivergedError,
    CouplingError,
    IterationTrace,
    MaxIterationsExceededError,
    observed_rate,
    propagate_step_error,
    run_transient,
    subiterate_step,
)
from .operators import (
    GridFunction,
    GridMismatchError,
    OperatorConfig,
    ZeroInitialError,
    apply_ld,
    apply_lm,
    apply_mixture,
    commutator_norm,
    h1_norm,
    norm_history,
    quasi_nilpotency_estimate,
    sampled_derivative,
)
from .parameters import (
    DimensionlessGroups,
    PistonParams,
    ValidationError,
    nondimensionalize,
    params_from_config,
    parse_config,
    read_config,
)
from .piston import (
    AddedMassSingularityError,
    NewtonError,
    NonpositiveDisplacementError,
    PistonState,
    SolverError,
    Trajectory,
    fluid_step,
    initial_state,
    ps_pressure,
    solid_step,
    solve_monolithic,
    transfer_start_state,
)
from .sensitivity import RobinBoundarySpec, pressure_shift
from .sweep import SweepResult, SweepRun, SweepSpec, ramp_start_state, run_sweep

__all__ = [
    "AddedMassSingularityError",
    "CouplingConfig",
    "CouplingDivergedError",
    "CouplingError",
    "DimensionlessGroups",
    "GridFunction",
    "GridMismatchError",
    "IterationTrace",
    "MaxIterationsExceededError",
    "NewtonError",
    "NonpositiveDisplacementError",
    "OperatorConfig",
    "PistonParams",
    "PistonState",
    "RobinBoundarySpec",
    "SolverError",
    "SweepResult",
    "SweepRun",
    "SweepSpec",
    "Trajectory",
    "ValidationError",
    "ZeroInitialError",
    "apply_ld",
    "apply_lm",
    "apply_mixture",
    "commutator_norm",
    "fluid_step",
    "h1_norm",
    "initial_state",
    "nondimensionalize",
    "norm_history",
    "observed_rate",
    "params_from_config",
    "parse_config",
    "pressure_shift",
    "propagate_step_error",
    "ps_pressure",
    "quasi_nilpotency_estimate",
    "ramp_start_state",
    "read_config",
    "run_sweep",
    "run_transient",
    "sampled_derivative",
    "solid_step",
    "solve_monolithic",
    "transfer_start_state",
    "subiterate_step",
]
