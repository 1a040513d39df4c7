"""Parameter-sweep harness measuring subiteration convergence rates.

A sweep varies one physical parameter across a list of values, runs one
monitored coupling step per value from a shared smooth start state, and fits
the per-iteration rate exponent (decades per iteration) to the residual
history.  Rate differences across sweep values expose the scaling laws of
the added-damping effect: the rate shifts by one decade per decade of flow
resistance, by log10(2) per doubling of the time step, and by -log10(2) per
doubling of the structural mass, while it is insensitive to the fluid
density as long as the added-mass ratio stays small.

The start state is produced by a prescribed smooth velocity ramp
``v(t) = u0 * (1/2 - cos(pi t / T) / 2)`` over a spin-up window ``T``: the
measured step then starts from displacement ``ell0 + u0*T/2`` and velocity
``u0``, identical across all sweep values.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import List, Tuple

from .coupling import (
    CouplingConfig,
    CouplingDivergedError,
    IterationTrace,
    MaxIterationsExceededError,
    observed_rate,
    subiterate_step,
)
from .parameters import (
    DimensionlessGroups,
    PistonParams,
    ValidationError,
    nondimensionalize,
)
from .piston import DEFAULT_SUBSTEPS, PistonState

SWEEPABLE_PARAMETERS = ("kappa_f", "tau", "m_s", "rho_f")

#: One full period of the smooth start ramp [s].
DEFAULT_SPIN_UP_TIME = 1.0

#: Default iteration window for the rate fit.
DEFAULT_RATE_WINDOW = (2, 6)


@dataclass(frozen=True)
class SweepSpec:
    """One-parameter sweep description."""

    parameter: str
    values: tuple
    base: PistonParams
    coupling: CouplingConfig
    n_substeps: int = DEFAULT_SUBSTEPS
    linearized: bool = False
    spin_up_time: float = DEFAULT_SPIN_UP_TIME
    rate_window: Tuple[int, int] = DEFAULT_RATE_WINDOW

    def __post_init__(self) -> None:
        if self.parameter not in SWEEPABLE_PARAMETERS:
            raise ValidationError(
                f"parameter must be one of {SWEEPABLE_PARAMETERS}, got {self.parameter!r}"
            )
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ValidationError("values must be nonempty")
        if any(not (math.isfinite(v) and v > 0) for v in values):
            raise ValidationError("sweep values must be positive and finite")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValidationError("sweep values must be strictly increasing")
        if self.spin_up_time < 0:
            raise ValidationError(f"spin_up_time must be >= 0, got {self.spin_up_time}")
        k_lo, k_hi = self.rate_window
        if k_hi - k_lo < 2:
            raise ValidationError(f"rate window needs k_hi - k_lo >= 2, got {self.rate_window}")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class SweepRun:
    """Outcome of one sweep value: trace, fitted rate, and metadata."""

    value: float
    groups: DimensionlessGroups
    trace: IterationTrace
    rate: float
    status: str  # "converged" | "max_iters" | "diverged"

    @property
    def converged(self) -> bool:
        return self.status == "converged"


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    runs: Tuple[SweepRun, ...]


def with_parameter(base: PistonParams, name: str, value: float) -> PistonParams:
    """Copy ``base`` with one sweepable parameter replaced."""
    if name not in SWEEPABLE_PARAMETERS:
        raise ValidationError(f"cannot sweep {name!r}")
    return replace(base, **{name: float(value)})


def ramp_start_state(
    p: PistonParams, spin_up_time: float = DEFAULT_SPIN_UP_TIME
) -> PistonState:
    """State after the prescribed smooth velocity ramp.

    The ramp advances the displacement by ``u0 * spin_up_time / 2`` (the mean
    of the smooth ramp profile is 1/2) and ends at velocity ``u0`` with zero
    acceleration, so the recorded seed pressure is the fluid reaction
    ``-kappa_f * u0``.  No coupled-operator inversion is involved, hence the
    state exists in the added-mass-unstable regime as well.
    """
    d = p.ell0 + p.u0 * spin_up_time / 2.0
    if d <= 0:
        raise ValidationError(
            f"ramp end displacement {d:g} <= 0; shorten the spin-up or raise ell0"
        )
    return PistonState(d=d, v=p.u0, p_interface=-p.kappa_f * p.u0)


def _run_one(spec: SweepSpec, value: float) -> SweepRun:
    params = with_parameter(spec.base, spec.parameter, value)
    init = ramp_start_state(params, spec.spin_up_time, linearized=spec.linearized)
    try:
        _, trace = subiterate_step(
            params,
            spec.coupling,
            init,
            n_substeps=spec.n_substeps,
            linearized=spec.linearized,
        )
        status = "converged"
    except MaxIterationsExceededError as exc:
        trace, status = exc.trace, "max_iters"
    except CouplingDivergedError as exc:
        trace, status = exc.trace, "diverged"
    k_lo, k_hi = spec.rate_window
    try:
        rate = observed_rate(trace, k_lo, k_hi)
    except ValidationError:
        rate = math.nan
    return SweepRun(
        value=value,
        groups=nondimensionalize(params),
        trace=trace,
        rate=rate,
        status=status,
    )


def run_sweep(spec: SweepSpec, jobs: int = 1) -> SweepResult:
    """Run every sweep value; failures are recorded, not raised.

    ``jobs > 1`` evaluates values in a thread pool; results keep the order of
    ``spec.values`` either way.
    """
    if jobs <= 1:
        runs = [_run_one(spec, value) for value in spec.values]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(lambda v: _run_one(spec, v), spec.values))
    return SweepResult(spec=spec, runs=tuple(runs))
