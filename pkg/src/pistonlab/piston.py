"""Leaky-piston solvers: monolithic reference and the fluid/solid subproblems.

The coupled model is

    m_s * d'' + kappa_s * d = p(t),      p(t) = rho_f * d * d'' - kappa_f * d'

with d(0) = ell0, d'(0) = u0, where d is both the piston position relative to
the unstretched spring and the fluid-column length (hence d > 0 is required).
Substituting the pressure relation yields the monolithic form

    (m_s - rho_f * d) * d'' + kappa_f * d' + kappa_s * d = 0.

The displacement-to-pressure map ``p = rho_f * d * d'' - kappa_f * d'`` is the
structure the partitioned scheme exploits: :func:`solid_step` integrates the
piston under a given pressure trace (Neumann data), :func:`fluid_step` turns a
displacement trace into the pressure the fluid exerts (Dirichlet data).

Every coupling step (0, tau) is resolved on an inner grid of implicit-Euler
substeps.  The "linearized" mode freezes the added-mass coefficient at
``rho_f * ell0`` (the initial column length), making the monolithic equation a
constant-coefficient damped oscillator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .operators import sampled_derivative
from .parameters import PistonParams, ValidationError


class SolverError(RuntimeError):
    """Base class for piston solver failures."""


class AddedMassSingularityError(SolverError):
    """Effective mass ``m_s - rho_f * d`` dropped to or below zero."""


class NewtonError(SolverError):
    """The implicit-Euler Newton iteration failed to converge."""


class NonpositiveDisplacementError(SolverError):
    """A displacement trace left the physical regime d > 0."""


#: Default number of implicit-Euler substeps resolving one coupling step.
DEFAULT_SUBSTEPS = 32

_NEWTON_MAX_ITERS = 50
_NEWTON_RTOL = 1e-12


@dataclass(frozen=True)
class PistonState:
    """Piston displacement, velocity and interface pressure at one instant."""

    d: float
    v: float
    p_interface: float

    def __post_init__(self) -> None:
        for name in ("d", "v", "p_interface"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ValidationError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.d <= 0:
            raise ValidationError(f"displacement must be > 0, got {self.d}")


@dataclass(frozen=True)
class Trajectory:
    """Time series of piston states."""

    times: np.ndarray
    states: tuple

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", tuple(self.states))
        if len(self.states) != times.size:
            raise ValidationError("times and states must have equal length")
        if times.size and not np.all(np.diff(times) > 0):
            raise ValidationError("times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.states)

    def displacements(self) -> np.ndarray:
        return np.array([s.d for s in self.states])

    def velocities(self) -> np.ndarray:
        return np.array([s.v for s in self.states])

    def pressures(self) -> np.ndarray:
        return np.array([s.p_interface for s in self.states])

    def to_csv(self, path) -> None:
        """Write the four-column CSV ``(t, d, v, p)``."""
        import csv

        with open(path, "w", newline="") as stream:
            writer = csv.writer(stream)
            writer.writerow(["t", "d", "v", "p"])
            for t, state in zip(self.times, self.states):
                writer.writerow(
                    [repr(float(t)), repr(state.d), repr(state.v), repr(state.p_interface)]
                )


def ps_pressure(p: PistonParams, d: float, v: float, a: float) -> float:
    """Interface pressure from displacement, velocity and acceleration.

    The displacement-to-pressure map ``p_f = rho_f * d * a - kappa_f * v``:
    an inertial reaction proportional to the acceleration (added mass) plus
    a resistance force proportional to the velocity (added damping).
    """
    if d <= 0:
        raise NonpositiveDisplacementError(f"displacement must be > 0, got {d}")
    return p.rho_f * d * a - p.kappa_f * v


def _added_mass_coefficient(p: PistonParams, d, linearized: bool):
    return p.rho_f * p.ell0 if linearized else p.rho_f * d


def initial_state(p: PistonParams, linearized: bool = False) -> PistonState:
    """Coupled-consistent state at t = 0.

    The initial acceleration solves the monolithic balance at (ell0, u0); the
    pressure follows from the piston equation of motion.  At t = 0 the
    linearized and nonlinear added-mass coefficients coincide.
    """
    effective_mass = p.m_s - p.rho_f * p.ell0
    if effective_mass <= 0:
        raise AddedMassSingularityError(
            f"added-mass singularity: m_s - rho_f*ell0 = {effective_mass} <= 0"
        )
    a0 = -(p.kappa_f * p.u0 + p.kappa_s * p.ell0) / effective_mass
    p0 = p.m_s * a0 + p.kappa_s * p.ell0
    return PistonState(d=p.ell0, v=p.u0, p_interface=p0)


def transfer_start_state(p: PistonParams) -> PistonState:
    """Initial state seen by the partitioned solver.

    The partitioned scheme only knows transfer data, so the recorded starting
    pressure is the fluid reaction at zero acceleration, ``-kappa_f * u0``.
    Unlike :func:`initial_state` this never requires inverting the coupled
    operator and therefore exists even when the added mass exceeds the piston
    mass (the regime where subiteration diverges).
    """
    return PistonState(d=p.ell0, v=p.u0, p_interface=-p.kappa_f * p.u0)


def _implicit_euler_velocity(
    p: PistonParams, d_old: float, v_old: float, dt: float, linearized: bool, t: float
) -> float:
    """Solve the implicit-Euler update for the monolithic system by Newton.

    The update eliminates d_new = d_old + dt*v and solves the scalar residual

        g(v) = (m_s - rho_eff(d_old + dt*v)) * (v - v_old)
               + dt*kappa_f*v + dt*kappa_s*(d_old + dt*v) = 0.
    """
    def residual_and_slope(v: float):
        d_new = d_old + dt * v
        if linearized:
            mass = p.m_s - p.rho_f * p.ell0
            dmass = 0.0
        else:
            mass = p.m_s - p.rho_f * d_new
            dmass = -p.rho_f * dt
        if mass <= 0:
            raise AddedMassSingularityError(
                f"added-mass singularity at t={t:g}: m_s - rho_f*d = {mass} <= 0"
            )
        g = mass * (v - v_old) + dt * p.kappa_f * v + dt * p.kappa_s * d_new
        slope = mass + dmass * (v - v_old) + dt * p.kappa_f + dt * dt * p.kappa_s
        return g, slope

    v = v_old
    g, slope = residual_and_slope(v)
    # Relative tolerance against the magnitudes entering the residual.
    scale = max(
        abs(g),
        p.m_s * abs(v_old),
        dt * p.kappa_f * abs(v_old),
        dt * p.kappa_s * abs(d_old),
        1e-300,
    )
    target = _NEWTON_RTOL * scale
    if abs(g) <= target:
        return v
    for _ in range(_NEWTON_MAX_ITERS):
        if slope == 0:
            raise NewtonError(f"singular Newton slope at t={t:g}")
        v = v - g / slope
        g, slope = residual_and_slope(v)
        if abs(g) <= target:
            return v
    raise NewtonError(
        f"implicit-Euler Newton did not reach tol {_NEWTON_RTOL:g} "
        f"within {_NEWTON_MAX_ITERS} iterations at t={t:g}"
    )


def solve_monolithic(
    p: PistonParams, t_fin: float, dt: float, linearized: bool = False
) -> Trajectory:
    """Integrate the monolithic piston equation by implicit Euler.

    First-order accurate in ``dt``; each step solves the (mildly nonlinear)
    implicit update by Newton iteration.  The interface pressure is recorded
    with the mode-consistent added-mass coefficient.
    """
    if dt <= 0:
        raise ValidationError(f"dt must be > 0, got {dt}")
    if t_fin < dt:
        raise ValidationError(f"t_fin must be >= dt, got t_fin={t_fin}, dt={dt}")
    n_steps = int(np.floor(t_fin / dt + 1e-9))
    states = [initial_state(p, linearized=linearized)]
    d, v = p.ell0, p.u0
    for j in range(n_steps):
        t_new = (j + 1) * dt
        v_new = _implicit_euler_velocity(p, d, v, dt, linearized, t_new)
        d_new = d + dt * v_new
        if d_new <= 0:
            raise NonpositiveDisplacementError(
                f"displacement {d_new:g} <= 0 at t={t_new:g}"
            )
        a_new = (v_new - v) / dt
        p_new = _added_mass_coefficient(p, d_new, linearized) * a_new - p.kappa_f * v_new
        states.append(PistonState(d=d_new, v=v_new, p_interface=p_new))
        d, v = d_new, v_new
    times = np.arange(n_steps + 1) * dt
    return Trajectory(times=times, states=tuple(states))


def _check_inner_grid(p: PistonParams, n_nodes: int, dt: float) -> None:
    if n_nodes < 3:
        raise ValidationError(f"inner grid needs at least 3 nodes, got {n_nodes}")
    if dt <= 0:
        raise ValidationError(f"dt must be > 0, got {dt}")
    if abs((n_nodes - 1) * dt - p.tau) > 1e-9 * p.tau:
        raise ValidationError(
            f"dt={dt!r} with {n_nodes} nodes does not resolve the coupling "
            f"step tau={p.tau!r}"
        )


def solid_step(
    p: PistonParams,
    pressure: np.ndarray,
    d0: float,
    v0: float,
    dt: float,
) -> Tuple[np.ndarray, np.ndarray]:
    """Neumann subproblem: integrate ``m_s d'' + kappa_s d = pressure``.

    ``pressure`` holds samples at the inner nodes ``t_j = j*dt`` covering
    (0, tau); entry 0 belongs to the initial instant and is not used by the
    implicit-Euler march.  Returns displacement and velocity samples on the
    same nodes, starting from ``(d0, v0)``.
    """
    pressure = np.asarray(pressure, dtype=float)
    _check_inner_grid(p, pressure.size, dt)
    n = pressure.size
    d = np.empty(n)
    v = np.empty(n)
    d[0], v[0] = d0, v0
    denom = p.m_s + dt * dt * p.kappa_s
    for j in range(n - 1):
        v[j + 1] = (p.m_s * v[j] + dt * (pressure[j + 1] - p.kappa_s * d[j])) / denom
        d[j + 1] = d[j] + dt * v[j + 1]
    return d, v


def fluid_step(
    p: PistonParams,
    displacement: np.ndarray,
    dt: float,
    linearized: bool = False,
) -> np.ndarray:
    """Dirichlet subproblem: pressure exerted for a given displacement trace.

    Velocity and acceleration are recovered from the received displacement by
    the shared finite-difference stencils (the transfer provides displacement
    only), then ``p = rho_eff * a - kappa_f * v`` is evaluated at the nodes.
    In the nonlinear mode ``rho_eff = rho_f * d`` and the trace must stay
    positive; the linearized mode uses ``rho_f * ell0`` and accepts any trace.
    """
    displacement = np.asarray(displacement, dtype=float)
    if displacement.size < 3:
        raise ValidationError(
            f"fluid_step needs at least 3 displacement samples, got {displacement.size}"
        )
    if dt <= 0:
        raise ValidationError(f"dt must be > 0, got {dt}")
    if not linearized and np.any(displacement <= 0):
        raise NonpositiveDisplacementError(
            "displacement trace is not positive everywhere"
        )
    velocity = sampled_derivative(displacement, dt)
    acceleration = sampled_derivative(velocity, dt)
    coefficient = _added_mass_coefficient(p, displacement, linearized)
    return coefficient * acceleration - p.kappa_f * velocity
