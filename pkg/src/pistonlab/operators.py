"""Discrete causal integral operators driving the subiteration error recursion.

Within one coupling step, rescaled to the unit interval, the iteration error
of Dirichlet-Neumann subiteration on the piston model obeys

    eps_k = (alpha_m * Lm + alpha_d * Ld) eps_{k-1},

where the added-mass operator ``Lm`` and the added-damping operator ``Ld``
act on functions over [0, 1] as

    (Lm e)(s) = e(s) - integral_0^s omega * sin(omega * (s - z)) * e(z) dz
    (Ld e)(s) = -integral_0^s cos(omega * (s - z)) * e(z) dz

Both kernels are causal (lower-triangular after discretization), the two
operators commute, and ``Ld`` is quasi-nilpotent: powers of ``alpha_d * Ld``
always decay eventually, but because the operator is nonnormal their norms
can grow transiently first, which is what makes the subiteration residual
history nonmonotone for large added damping.

Discretization: samples on the uniform grid ``s_i = i/(n-1)``, composite
trapezoidal quadrature on the same grid (the kernel matrices are dense,
lower triangular, materialized once per :class:`OperatorConfig` and reused
for powers), H1 norms from trapezoid integrals with a central-difference
derivative (second-order one-sided at the endpoints).  All discrete errors
are O(1/n^2).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np


class GridMismatchError(ValueError):
    """Operator and grid function were built for different grid sizes."""


class ZeroInitialError(ValueError):
    """A norm history was requested for an identically-zero initial error."""


@dataclass
class GridFunction:
    """Samples of a function on the uniform grid ``s_i = i/(n-1)`` over [0, 1]."""

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise ValueError("GridFunction needs a 1-d array of at least 2 samples")
        if not np.all(np.isfinite(values)):
            raise ValueError("GridFunction samples must be finite")
        values.flags.writeable = False
        self.values = values

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n)

    @classmethod
    def from_callable(cls, f, n: int) -> "GridFunction":
        return cls(np.asarray([f(s) for s in np.linspace(0.0, 1.0, n)], dtype=float))

    def to_csv(self, path) -> None:
        """Write the two-column CSV ``(s, value)``."""
        with open(path, "w", newline="") as stream:
            writer = csv.writer(stream)
            writer.writerow(["s", "value"])
            for s, value in zip(self.nodes, self.values):
                writer.writerow([repr(float(s)), repr(float(value))])

    @classmethod
    def from_csv(cls, path) -> "GridFunction":
        rows = list(csv.reader(Path(path).open()))
        if not rows or rows[0] != ["s", "value"]:
            raise ValueError(f"{path}: expected header 's,value'")
        data = np.array([[float(a), float(b)] for a, b in rows[1:]], dtype=float)
        gf = cls(data[:, 1])
        if not np.allclose(data[:, 0], gf.nodes, atol=1e-9, rtol=0.0):
            raise ValueError(f"{path}: s column is not the uniform grid on [0, 1]")
        return gf


@dataclass(frozen=True)
class OperatorConfig:
    """Kernel frequency and grid resolution shared by ``Lm`` and ``Ld``."""

    omega: float
    n: int

    def __post_init__(self) -> None:
        if not (isinstance(self.omega, (int, float)) and math.isfinite(self.omega)):
            raise ValueError(f"omega must be finite, got {self.omega!r}")
        if self.omega < 0:
            raise ValueError(f"omega must be >= 0, got {self.omega}")
        if self.n < 2:
            raise ValueError(f"grid resolution n must be >= 2, got {self.n}")
        object.__setattr__(self, "omega", float(self.omega))
        object.__setattr__(self, "n", int(self.n))


def _trapezoid_weights(n: int) -> np.ndarray:
    # Row i integrates over [0, s_i]; row 0 is the empty integral.
    h = 1.0 / (n - 1)
    weights = np.tril(np.full((n, n), h))
    weights[:, 0] *= 0.5
    idx = np.arange(n)
    weights[idx, idx] *= 0.5
    weights[0, :] = 0.0
    return weights


@lru_cache(maxsize=16)
def _kernel_matrices(cfg: OperatorConfig):
    """Dense lower-triangular matrices: Ld and the integral part of Lm."""
    s = np.linspace(0.0, 1.0, cfg.n)
    lag = s[:, None] - s[None, :]
    weights = _trapezoid_weights(cfg.n)
    damping = -np.cos(cfg.omega * lag) * weights
    mass_integral = (cfg.omega * np.sin(cfg.omega * lag)) * weights
    damping.flags.writeable = False
    mass_integral.flags.writeable = False
    return damping, mass_integral


def mixture_matrix(cfg: OperatorConfig, alpha_m: float, alpha_d: float) -> np.ndarray:
    """Matrix of ``alpha_m * Lm + alpha_d * Ld`` on the grid of ``cfg``."""
    damping, mass_integral = _kernel_matrices(cfg)
    matrix = alpha_m * (np.eye(cfg.n) - mass_integral) + alpha_d * damping
    return matrix


def _check_size(cfg: OperatorConfig, eps: GridFunction) -> None:
    if eps.n != cfg.n:
        raise GridMismatchError(
            f"grid-size mismatch: operator has n={cfg.n}, grid function has n={eps.n}"
        )


def apply_ld(cfg: OperatorConfig, eps: GridFunction) -> GridFunction:
    """Apply the added-damping operator ``Ld`` (cosine kernel, causal)."""
    _check_size(cfg, eps)
    damping, _ = _kernel_matrices(cfg)
    return GridFunction(damping @ eps.values)


def apply_lm(cfg: OperatorConfig, eps: GridFunction) -> GridFunction:
    """Apply the added-mass operator ``Lm`` (identity minus sine kernel).

    At ``omega == 0`` the kernel vanishes and the input samples are returned
    unchanged (exactly, no rounding).
    """
    _check_size(cfg, eps)
    _, mass_integral = _kernel_matrices(cfg)
    return GridFunction(eps.values - mass_integral @ eps.values)


def apply_mixture(
    cfg: OperatorConfig,
    alpha_m: float,
    alpha_d: float,
    eps: GridFunction,
    k: int,
) -> list:
    """Iterate ``eps_j = (alpha_m Lm + alpha_d Ld) eps_{j-1}``.

    Returns ``[eps_0, eps_1, ..., eps_k]`` with ``eps_0 = eps``.
    """
    if k < 0:
        raise ValueError(f"iteration count k must be >= 0, got {k}")
    _check_size(cfg, eps)
    matrix = mixture_matrix(cfg, alpha_m, alpha_d)
    history = [eps]
    values = eps.values
    for _ in range(int(k)):
        values = matrix @ values
        history.append(GridFunction(values))
    return history


def sampled_derivative(values: np.ndarray, spacing: float) -> np.ndarray:
    """First derivative of uniform samples.

    Central differences at interior nodes, second-order one-sided stencils at
    the endpoints.  This is the single derivative stencil shared by the H1
    norm and by the velocity/acceleration recovery in the fluid subproblem.
    """
    return np.gradient(np.asarray(values, dtype=float), spacing, edge_order=2)


def h1_norm(eps: GridFunction) -> float:
    """H1(0, 1) norm: sqrt(int eps^2 + int (eps')^2), both by trapezoid."""
    if eps.n < 3:
        raise ValueError(f"h1_norm needs n >= 3 (second-order stencils), got n={eps.n}")
    h = 1.0 / (eps.n - 1)
    deriv = sampled_derivative(eps.values, h)
    return float(
        math.sqrt(np.trapezoid(eps.values**2, dx=h) + np.trapezoid(deriv**2, dx=h))
    )


def norm_history(
    cfg: OperatorConfig,
    alpha_m: float,
    alpha_d: float,
    eps0: GridFunction,
    k: int,
) -> np.ndarray:
    """Relative H1 norms ``||eps_j|| / ||eps_0||`` for ``j = 0..k``.

    Entry 0 is exactly 1.  Raises :class:`ZeroInitialError` if
    ``||eps_0|| == 0``.
    """
    norm0 = h1_norm(eps0)
    if norm0 == 0.0:
        raise ZeroInitialError("zero initial error")
    history = apply_mixture(cfg, alpha_m, alpha_d, eps0, k)
    ratios = np.array([h1_norm(eps) / norm0 for eps in history])
    ratios[0] = 1.0
    return ratios


def commutator_norm(cfg: OperatorConfig, eps: GridFunction) -> float:
    """H1 norm of ``(Lm Ld - Ld Lm) eps``.

    The continuous operators commute; the discrete commutator is pure
    quadrature error and decays as O(1/n^2).
    """
    forward = apply_lm(cfg, apply_ld(cfg, eps))
    reverse = apply_ld(cfg, apply_lm(cfg, eps))
    return h1_norm(GridFunction(forward.values - reverse.values))


def quasi_nilpotency_estimate(
    cfg: OperatorConfig, eps0: GridFunction, k_max: int
) -> np.ndarray:
    """Spectral-radius surrogates ``r_k = (||Ld^k eps0|| / ||eps0||)^(1/k)``.

    For ``k = 1..k_max``; the tail decreases toward 0 because ``Ld`` has no
    nonzero eigenvalues.
    """
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    norm0 = h1_norm(eps0)
    if norm0 == 0.0:
        raise ZeroInitialError("zero initial error")
    damping, _ = _kernel_matrices(cfg)
    _check_size(cfg, eps0)
    values = eps0.values
    estimates = np.empty(int(k_max))
    for k in range(1, int(k_max) + 1):
        values = damping @ values
        estimates[k - 1] = (h1_norm(GridFunction(values)) / norm0) ** (1.0 / k)
    return estimates
