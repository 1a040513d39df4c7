"""Pressure-level sensitivity of a nearly-closed fluid domain.

For an incompressible fluid enclosed except for a permeable patch with flow
resistance ``kappa``, changing the resistance away from a reference value
``kappa_ref`` shifts the admissible pressure level by

    shift = -(kappa - kappa_ref) * vdot / area,

where ``vdot`` is the volume-rate deviation (net inflow minus boundary
expansion rate) and ``area`` the measure of the permeable patch.  As the
resistance grows, a fixed volume-rate deviation produces unbounded pressure
shifts, which is the mechanism that destabilizes Dirichlet-Neumann coupling
for nearly-closed configurations and motivates the resistance sweeps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .parameters import ValidationError


@dataclass(frozen=True)
class RobinBoundarySpec:
    """Resistances, permeable-patch measure, and volume-rate deviation.

    ``kappa`` and ``kappa_ref`` are flow resistances [kg/(m^2 s)], ``area``
    the measure of the permeable boundary patch, ``vdot`` the volume-rate
    deviation.
    """

    kappa: float
    kappa_ref: float
    area: float
    vdot: float

    def __post_init__(self) -> None:
        for name in ("kappa", "kappa_ref", "area", "vdot"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value)):
                raise ValidationError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.kappa < 0:
            raise ValidationError(f"kappa must be >= 0, got {self.kappa}")
        if self.kappa_ref < 0:
            raise ValidationError(f"kappa_ref must be >= 0, got {self.kappa_ref}")
        if self.area <= 0:
            raise ValidationError(f"area must be > 0, got {self.area}")


def pressure_shift(spec: RobinBoundarySpec) -> float:
    """Pressure-level shift ``-(kappa - kappa_ref) * vdot / area``."""
    return -(spec.kappa - spec.kappa_ref) * spec.vdot / spec.area
