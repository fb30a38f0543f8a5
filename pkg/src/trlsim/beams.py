"""Closed-form rectangular-section beam formulas.

Inputs and outputs use mm, N, N*mm and degrees; moduli are in Pa.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidInputError

__all__ = [
    "RectSection",
    "cantilever_tip_deflection",
    "rect_torsion_angle",
    "sll_stiffness_ratio",
    "REFERENCE_FORCE",
    "REFERENCE_MOMENT",
]

REFERENCE_FORCE = 0.01  # N
REFERENCE_MOMENT = 0.5  # N*mm


@dataclass(frozen=True)
class RectSection:
    """Solid rectangle of width ``width`` and thickness ``thickness`` [mm]."""

    width: float
    thickness: float

    def __post_init__(self):
        if not (self.thickness > 0 and self.width >= self.thickness):
            raise InvalidInputError(
                f"need width >= thickness > 0, got w={self.width}, t={self.thickness}")

    @property
    def second_moment(self) -> float:
        """Weak-axis second moment of area [mm^4]."""
        return self.width * self.thickness**3 / 12.0

    @property
    def torsion_constant(self) -> float:
        """Saint-Venant torsion constant [mm^4]."""
        w, t = self.width, self.thickness
        return (w * t**3 / 3.0) * (1.0 - 0.63 * (t / w) * (1.0 - t**4 / (12.0 * w**4)))


def _positive(**kw):
    for k, v in kw.items():
        if not (v > 0 and math.isfinite(v)):
            raise InvalidInputError(f"{k} must be positive, got {v}")


def cantilever_tip_deflection(sec: RectSection, length, youngs_modulus, force) -> float:
    """Euler-Bernoulli tip deflection [mm] of an end-loaded cantilever."""
    _positive(length=length, youngs_modulus=youngs_modulus)
    if force < 0 or not math.isfinite(force):
        raise InvalidInputError(f"force must be >= 0, got {force}")
    e_mpa = youngs_modulus * 1e-6
    return force * length**3 / (3.0 * e_mpa * sec.second_moment)


def rect_torsion_angle(sec: RectSection, length, shear_modulus, moment) -> float:
    """Free-warping twist [deg] of a rectangular bar under end torque ``moment`` [N*mm]."""
    _positive(length=length, shear_modulus=shear_modulus)
    if moment < 0 or not math.isfinite(moment):
        raise InvalidInputError(f"moment must be >= 0, got {moment}")
    g_mpa = shear_modulus * 1e-6
    return math.degrees(moment * length / (g_mpa * sec.torsion_constant))


def sll_stiffness_ratio(sec: RectSection, length, youngs_modulus, poisson_ratio,
                        force=REFERENCE_FORCE, moment=REFERENCE_MOMENT) -> float:
    """Tip deflection [mm] over twist [deg] at the reference loads.

    Larger means more bending compliance per unit of unwanted twist.
    """
    g = youngs_modulus / (2.0 * (1.0 + poisson_ratio))
    delta = cantilever_tip_deflection(sec, length, youngs_modulus, force)
    theta = rect_torsion_angle(sec, length, g, moment)
    return delta / theta
