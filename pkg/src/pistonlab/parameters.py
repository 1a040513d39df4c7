"""Physical parameters of the leaky-piston model and their dimensionless groups.

The model is a rigid piston of mass ``m_s`` (per unit area) closing a
cylinder of incompressible fluid of density ``rho_f`` and initial column
length ``ell0``.  The piston is restrained by a spring of stiffness
``kappa_s`` (per unit area); the far end of the cylinder is a permeable
cover with flow resistance ``kappa_f``.  ``tau`` is the coupling time-step
size of the partitioned solver.

All parameters are carried in SI units.  :func:`nondimensionalize` is the
single point where they are condensed into the three dimensionless groups
that govern the subiteration behavior::

    omega   = tau * sqrt(kappa_s / m_s)     stiffness frequency
    alpha_m = rho_f * ell0 / m_s            added-mass ratio
    alpha_d = tau * kappa_f / m_s           added-damping ratio
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from pathlib import Path


class ValidationError(ValueError):
    """A parameter or configuration value violates its documented range."""


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ValidationError(message)


@dataclass(frozen=True)
class PistonParams:
    """Physical parameters of the leaky-piston problem (SI units).

    Attributes
    ----------
    rho_f : float
        Fluid density [kg/m^3], >= 0.
    ell0 : float
        Initial fluid-column length [m], > 0.
    u0 : float
        Initial piston velocity [m/s].
    m_s : float
        Piston mass per unit area [kg/m^2], > 0.
    kappa_s : float
        Spring constant per unit area [N/m^3], >= 0.
    kappa_f : float
        Flow resistance of the permeable cover [kg/(m^2 s)], >= 0.
    tau : float
        Coupling time-step size [s], > 0.
    """

    rho_f: float
    ell0: float
    u0: float
    m_s: float
    kappa_s: float
    kappa_f: float
    tau: float

    def __post_init__(self) -> None:
        for field in fields(self):
            value = getattr(self, field.name)
            _require(
                isinstance(value, (int, float)) and math.isfinite(value),
                f"{field.name} must be a finite number, got {value!r}",
            )
            object.__setattr__(self, field.name, float(value))
        _require(self.rho_f >= 0, f"rho_f must be >= 0, got {self.rho_f}")
        _require(self.ell0 > 0, f"ell0 must be > 0, got {self.ell0}")
        _require(self.m_s > 0, f"m_s must be > 0, got {self.m_s}")
        _require(self.kappa_s >= 0, f"kappa_s must be >= 0, got {self.kappa_s}")
        _require(self.kappa_f >= 0, f"kappa_f must be >= 0, got {self.kappa_f}")
        _require(self.tau > 0, f"tau must be > 0, got {self.tau}")


@dataclass(frozen=True)
class DimensionlessGroups:
    """Dimensionless stiffness frequency, added-mass and added-damping ratios."""

    omega: float
    alpha_m: float
    alpha_d: float

    def __post_init__(self) -> None:
        for field in fields(self):
            value = getattr(self, field.name)
            _require(
                isinstance(value, (int, float)) and math.isfinite(value) and value >= 0,
                f"{field.name} must be finite and >= 0, got {value!r}",
            )
            object.__setattr__(self, field.name, float(value))


def nondimensionalize(p: PistonParams) -> DimensionlessGroups:
    """Condense piston parameters into ``(omega, alpha_m, alpha_d)``."""
    return DimensionlessGroups(
        omega=p.tau * math.sqrt(p.kappa_s / p.m_s),
        alpha_m=p.rho_f * p.ell0 / p.m_s,
        alpha_d=p.tau * p.kappa_f / p.m_s,
    )


#: Configuration keys that define a :class:`PistonParams`.
PARAM_KEYS = ("rho_f", "ell0", "u0", "m_s", "kappa_s", "kappa_f", "tau")


def parse_config(text: str, known_keys=None) -> dict:
    """Parse a plain key-value configuration.

    One ``name = value`` assignment per line, ``#`` starts a comment, blank
    lines are ignored.  Values are parsed as floats.  Unknown keys (when
    ``known_keys`` is given), malformed lines and duplicate keys raise
    :class:`ValidationError`.
    """
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(
                f"line {lineno}: expected 'name = value', got {raw.strip()!r}"
            )
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ValidationError(f"line {lineno}: missing key")
        if known_keys is not None and key not in known_keys:
            raise ValidationError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ValidationError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = float(value)
        except ValueError:
            raise ValidationError(
                f"line {lineno}: value for {key!r} is not a number: {value!r}"
            ) from None
    return values


def read_config(path, known_keys=None) -> dict:
    """Read and parse a configuration file; see :func:`parse_config`."""
    return parse_config(Path(path).read_text(), known_keys=known_keys)


def params_from_config(config: dict) -> PistonParams:
    """Build :class:`PistonParams` from a parsed configuration mapping."""
    missing = [key for key in PARAM_KEYS if key not in config]
    if missing:
        raise ValidationError(f"missing required parameter(s): {', '.join(missing)}")
    return PistonParams(**{key: config[key] for key in PARAM_KEYS})
