"""Dirichlet-Neumann subiteration engine with convergence monitoring.

One coupling step alternates the two subproblem solves on the inner grid of
(0, tau): the solid receives the transferred pressure (Neumann data) and
returns a displacement trace; the fluid receives that displacement
(Dirichlet data) and returns the pressure it exerts.  Optional
under-relaxation blends the newly computed pressure with the previously
transferred one, ``p* = relaxation * p_new + (1 - relaxation) * p_old``
(relaxation = 1 is plain Gauss-Seidel).

The monitored residual is the plain node RMS of the transferred-pressure
update.  Iteration stops when the residual drops below ``tol``; it aborts as
"diverged" when a residual exceeds 1e12 times the first one (or turns
non-finite, or a nonlinear-mode iterate leaves d > 0), and as "max iterations
exceeded" when the cap is reached.  Both aborts carry the partial trace.

The engine core is generic over the two subproblem solvers; the public
functions instantiate it with the piston pair from :mod:`pistonlab.piston`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np

from . import piston
from .parameters import PistonParams, ValidationError
from .piston import DEFAULT_SUBSTEPS, PistonState, Trajectory

#: A residual exceeding this multiple of the first residual aborts the step.
DIVERGENCE_GUARD = 1e12


@dataclass(frozen=True)
class CouplingConfig:
    """Subiteration controls.

    ``tol``
        Convergence threshold on the RMS transferred-pressure update [Pa].
    ``max_iters``
        Iteration cap per coupling step.
    ``relaxation``
        Factor in (0, 1] applied to the fluid-to-solid pressure transfer;
        1 means plain Gauss-Seidel.
    ``extrapolation_order``
        Polynomial degree (0, 1 or 2) of the start-of-step prediction that
        seeds the iteration.  Degree 0 does not reproduce the start-of-step
        velocity, which degrades the error recursion the analysis assumes;
        degree >= 1 is recommended.
    """

    tol: float
    max_iters: int
    relaxation: float = 1.0
    extrapolation_order: int = 1

    def __post_init__(self) -> None:
        if not (self.tol > 0):
            raise ValidationError(f"tol must be > 0, got {self.tol}")
        if self.max_iters < 1:
            raise ValidationError(f"max_iters must be >= 1, got {self.max_iters}")
        if not (0.0 < self.relaxation <= 1.0):
            raise ValidationError(
                f"relaxation must be in (0, 1], got {self.relaxation}"
            )
        if self.extrapolation_order not in (0, 1, 2):
            raise ValidationError(
                f"extrapolation_order must be 0, 1 or 2, got {self.extrapolation_order}"
            )


@dataclass(frozen=True)
class IterationTrace:
    """Per-iteration RMS pressure-update norms of one coupling step."""

    residuals: np.ndarray
    converged: bool

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "residuals", np.asarray(self.residuals, dtype=float)
        )

    @property
    def iterations(self) -> int:
        return int(self.residuals.size)

    def to_csv(self, path) -> None:
        """Write the two-column CSV ``(k, residual_rms)``."""
        import csv

        with open(path, "w", newline="") as stream:
            writer = csv.writer(stream)
            writer.writerow(["k", "residual_rms"])
            for k, residual in enumerate(self.residuals, start=1):
                writer.writerow([k, repr(float(residual))])


class CouplingError(RuntimeError):
    """Coupling failure carrying the partial iteration trace."""

    def __init__(self, message: str, trace: IterationTrace, step_index=None, time=None):
        if step_index is not None:
            message = f"{message} (time step {step_index}, t={time:g})"
        super().__init__(message)
        self.trace = trace
        self.step_index = step_index
        self.time = time


class CouplingDivergedError(CouplingError):
    """The subiteration residual blew up or the iterate left the model range."""


class MaxIterationsExceededError(CouplingError):
    """The iteration cap was reached before the tolerance was met."""


def _rms(values: np.ndarray) -> float:
    return float(np.sqrt(np.mean(values * values)))


def gauss_seidel(
    solid_solve: Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]],
    fluid_solve: Callable[[np.ndarray], np.ndarray],
    first_iterate: np.ndarray,
    cfg: CouplingConfig,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, IterationTrace]:
    """Generic alternating solve; returns (d, v, transferred pressure, trace).

    ``solid_solve`` maps a pressure trace to (displacement, velocity) traces;
    ``fluid_solve`` maps a displacement trace to a pressure trace.  The
    iteration starts by transferring the fluid response to ``first_iterate``.
    """
    residuals: List[float] = []

    def partial(converged: bool = False) -> IterationTrace:
        return IterationTrace(residuals=np.array(residuals), converged=converged)

    def fluid_guarded(displacement: np.ndarray) -> np.ndarray:
        try:
            return fluid_solve(displacement)
        except piston.NonpositiveDisplacementError as exc:
            raise CouplingDivergedError(
                f"diverged: {exc}", trace=partial()
            ) from exc

    p_transfer = fluid_guarded(first_iterate)
    first_residual = None
    for _ in range(cfg.max_iters):
        d, v = solid_solve(p_transfer)
        p_new = fluid_guarded(d)
        p_next = cfg.relaxation * p_new + (1.0 - cfg.relaxation) * p_transfer
        residual = _rms(p_next - p_transfer)
        if not np.isfinite(residual):
            raise CouplingDivergedError(
                "diverged: non-finite pressure update", trace=partial()
            )
        residuals.append(residual)
        if first_residual is None:
            first_residual = residual
        elif residual > DIVERGENCE_GUARD * first_residual:
            raise CouplingDivergedError(
                f"diverged: residual {residual:g} exceeds {DIVERGENCE_GUARD:g} x "
                f"first residual {first_residual:g}",
                trace=partial(),
            )
        p_transfer = p_next
        if residual < cfg.tol:
            return d, v, p_transfer, partial(converged=True)
    raise MaxIterationsExceededError(
        f"max_iters exceeded: {cfg.max_iters} iterations, last residual "
        f"{residuals[-1]:g} >= tol {cfg.tol:g}",
        trace=partial(),
    )


def extrapolated_displacement(
    p: PistonParams, init: PistonState, times: np.ndarray, order: int
) -> np.ndarray:
    """Start-of-step displacement prediction of polynomial degree ``order``.

    Degree 2 uses the acceleration the solid equation of motion assigns to
    the initial state's transferred pressure.
    """
    if order == 0:
        return np.full(times.size, init.d)
    if order == 1:
        return init.d + init.v * times
    accel = (init.p_interface - p.kappa_s * init.d) / p.m_s
    return init.d + init.v * times + 0.5 * accel * times * times


def _piston_pair(p: PistonParams, init: PistonState, dt: float, linearized: bool):
    def solid_solve(pressure: np.ndarray):
        return piston.solid_step(p, pressure, init.d, init.v, dt)

    def fluid_solve(displacement: np.ndarray):
        return piston.fluid_step(p, displacement, dt, linearized=linearized)

    return solid_solve, fluid_solve


def subiterate_step(
    p: PistonParams,
    cfg: CouplingConfig,
    init: PistonState,
    n_substeps: int = DEFAULT_SUBSTEPS,
    linearized: bool = False,
) -> Tuple[PistonState, IterationTrace]:
    """Run one coupling step of size tau from ``init``.

    Returns the end-of-step state and the iteration trace.  Raises
    :class:`CouplingDivergedError` or :class:`MaxIterationsExceededError`
    (both carrying the partial trace) on failure.
    """
    if n_substeps < 2:
        raise ValidationError(f"n_substeps must be >= 2, got {n_substeps}")
    dt = p.tau / n_substeps
    times = np.arange(n_substeps + 1) * dt
    solid_solve, fluid_solve = _piston_pair(p, init, dt, linearized)
    first = extrapolated_displacement(p, init, times, cfg.extrapolation_order)
    d, v, p_transfer, trace = gauss_seidel(solid_solve, fluid_solve, first, cfg)
    state = PistonState(d=float(d[-1]), v=float(v[-1]), p_interface=float(p_transfer[-1]))
    return state, trace


def run_transient(
    p: PistonParams,
    cfg: CouplingConfig,
    t_fin: float,
    n_substeps: int = DEFAULT_SUBSTEPS,
    linearized: bool = False,
    init: PistonState = None,
) -> Tuple[Trajectory, List[IterationTrace]]:
    """March coupling steps of size tau until ``t_fin``.

    Each step is seeded by extrapolation of the previous converged state; the
    first starts from ``init`` (default: the transfer-consistent state of
    :func:`pistonlab.piston.transfer_start_state`, which exists even in the
    added-mass-unstable regime).  Step failures are re-raised with the
    time-step index and time attached.
    """
    if t_fin < p.tau:
        raise ValidationError(f"t_fin must be >= tau, got t_fin={t_fin}, tau={p.tau}")
    n_steps = int(np.floor(t_fin / p.tau + 1e-9))
    state = piston.transfer_start_state(p) if init is None else init
    states = [state]
    traces: List[IterationTrace] = []
    for step in range(1, n_steps + 1):
        try:
            state, trace = subiterate_step(
                p, cfg, state, n_substeps=n_substeps, linearized=linearized
            )
        except CouplingError as exc:
            raise type(exc)(
                str(exc), trace=exc.trace, step_index=step, time=step * p.tau
            ) from exc
        states.append(state)
        traces.append(trace)
    times = np.arange(n_steps + 1) * p.tau
    return Trajectory(times=times, states=tuple(states)), traces


def observed_rate(trace: IterationTrace, k_lo: int, k_hi: int) -> float:
    """Least-squares slope of log10(residual) vs iteration over [k_lo, k_hi].

    Iterations are numbered from 1 (the first recorded residual).  The slope
    is the per-iteration rate exponent in decades per iteration.
    """
    if k_hi - k_lo < 2:
        raise ValidationError(f"need k_hi - k_lo >= 2, got [{k_lo}, {k_hi}]")
    if k_lo < 1 or k_hi > trace.iterations:
        raise ValidationError(
            f"window [{k_lo}, {k_hi}] outside recorded iterations 1..{trace.iterations}"
        )
    window = trace.residuals[k_lo - 1 : k_hi]
    if np.any(window <= 0):
        raise ValidationError("rate undefined: nonpositive residual in window")
    ks = np.arange(k_lo, k_hi + 1, dtype=float)
    slope = np.polyfit(ks, np.log10(window), 1)[0]
    return float(slope)


def propagate_step_error(
    p: PistonParams,
    eps0: np.ndarray,
    k: int,
    n_substeps: int = DEFAULT_SUBSTEPS,
) -> List[np.ndarray]:
    """Apply the engine's per-iteration error map ``k`` times to ``eps0``.

    In the linearized piston with plain Gauss-Seidel transfer, consecutive
    iterates of :func:`subiterate_step` differ from the converged step
    solution by error traces obeying

        e_j = solid(fluid_lin(e_{j-1}))   with zero initial data,

    because the solid solve is affine in the pressure and the linearized
    fluid map is linear in the displacement.  This helper iterates exactly
    that map with the same discrete components the engine uses, so its output
    is the discrete counterpart of the added-mass/added-damping operator
    mixture acting on the initial error.
    """
    if k < 0:
        raise ValidationError(f"k must be >= 0, got {k}")
    if n_substeps < 2:
        raise ValidationError(f"n_substeps must be >= 2, got {n_substeps}")
    eps0 = np.asarray(eps0, dtype=float)
    if eps0.size != n_substeps + 1:
        raise ValidationError(
            f"eps0 must have n_substeps + 1 = {n_substeps + 1} samples, got {eps0.size}"
        )
    dt = p.tau / n_substeps
    history = [eps0]
    error = eps0
    for _ in range(int(k)):
        pressure = piston.fluid_step(p, error, dt, linearized=True)
        error, _ = piston.solid_step(p, pressure, 0.0, 0.0, dt)
        history.append(error)
    return history
