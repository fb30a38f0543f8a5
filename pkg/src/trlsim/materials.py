"""Material records and the elastic constants derived from them.

All values are SI (Pa, kg/m^3). ``calibrate_modulus`` takes the mm/N inputs
that appear in a cantilever test report and returns Pa.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

from .errors import InvalidInputError

__all__ = [
    "Material",
    "shear_modulus",
    "calibrate_modulus",
    "builtin_material",
    "material_from_dict",
    "BUILTIN_NAMES",
    "PA6",
    "PLA",
    "ECOFLEX_00_30",
]


@dataclass(frozen=True)
class Material:
    """Isotropic linear-elastic material.

    Parameters
    ----------
    name : str
    youngs_modulus : float
        Young's modulus [Pa].
    poisson_ratio : float
        Must satisfy 0 <= nu < 0.5.
    density : float, optional
        [kg/m^3], informational only.
    shear_fracture_stress : float, optional
        Shear stress at fracture [Pa].
    static_friction : float, optional
        Coefficient of static friction against a rigid object.
    """

    name: str
    youngs_modulus: float
    poisson_ratio: float
    density: float | None = None
    shear_fracture_stress: float | None = None
    static_friction: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.youngs_modulus) and self.youngs_modulus > 0):
            raise InvalidInputError(f"{self.name}: youngs_modulus must be > 0, got {self.youngs_modulus}")
        if not (0.0 <= self.poisson_ratio < 0.5):
            raise InvalidInputError(f"{self.name}: poisson_ratio must be in [0, 0.5), got {self.poisson_ratio}")
        if self.static_friction is not None and self.static_friction < 0:
            raise InvalidInputError(f"{self.name}: static_friction must be >= 0")
        if self.shear_fracture_stress is not None and self.shear_fracture_stress < 0:
            raise InvalidInputError(f"{self.name}: shear_fracture_stress must be >= 0")

    @property
    def shear_modulus(self) -> float:
        return shear_modulus(self)

    def replace(self, **changes) -> "Material":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "youngs_modulus_Pa": self.youngs_modulus,
            "poisson_ratio": self.poisson_ratio,
            "density_kg_m3": self.density,
            "shear_fracture_stress_Pa": self.shear_fracture_stress,
            "static_friction": self.static_friction,
        }


def shear_modulus(m: Material) -> float:
    """Isotropic shear modulus G = E / (2 (1 + nu)) in Pa."""
    return m.youngs_modulus / (2.0 * (1.0 + m.poisson_ratio))


def calibrate_modulus(thickness, displacement, load=0.01, length=100.0, width=20.0) -> float:
    """Back out Young's modulus from a cantilever tip-deflection measurement.

    Inverts ``delta = F L^3 / (3 E I)`` with ``I = w t^3 / 12``.

    Parameters
    ----------
    thickness, displacement, length, width : float
        [mm]
    load : float
        Tip force [N].

    Returns
    -------
    float
        Young's modulus [Pa].
    """
    for label, v in (("thickness", thickness), ("displacement", displacement),
                     ("load", load), ("length", length), ("width", width)):
        if not (v > 0 and math.isfinite(v)):
            raise InvalidInputError(f"{label} must be positive and finite, got {v}")
    second_moment = width * thickness**3 / 12.0  # mm^4
    e_mpa = load * length**3 / (3.0 * displacement * second_moment)  # N/mm^2
    return e_mpa * 1e6


# Calibrated on the t = 1.0 mm strip (1.75 mm tip deflection under 0.01 N).
PA6 = Material(
    name="PA6",
    youngs_modulus=calibrate_modulus(1.0, 1.75),
    poisson_ratio=0.39,
    density=1140.0,
    static_friction=None,
)

PLA = Material(name="PLA", youngs_modulus=3.5e9, poisson_ratio=0.36, density=1240.0)

# Grasp-model only; never meshed.
ECOFLEX_00_30 = Material(
    name="Ecoflex00-30",
    youngs_modulus=1.0e5,
    poisson_ratio=0.49,
    density=1070.0,
    static_friction=1.0,
)

_BUILTINS = {m.name.lower(): m for m in (PA6, PLA, ECOFLEX_00_30)}
BUILTIN_NAMES = tuple(m.name for m in (PA6, PLA, ECOFLEX_00_30))


def builtin_material(name: str) -> Material:
    key = name.lower().replace("-", "").replace("_", "")
    for k, m in _BUILTINS.items():
        if k.replace("-", "") == key:
            return m
    raise InvalidInputError(f"unknown material {name!r}; choose from {', '.join(BUILTIN_NAMES)}")


_DICT_KEYS = {
    "name": "name",
    "base": None,
    "youngs_modulus_Pa": "youngs_modulus",
    "youngs_modulus_MPa": "youngs_modulus",
    "poisson_ratio": "poisson_ratio",
    "density_kg_m3": "density",
    "shear_fracture_stress_Pa": "shear_fracture_stress",
    "shear_fracture_stress_kPa": "shear_fracture_stress",
    "static_friction": "static_friction",
}


def material_from_dict(d: dict) -> Material:
    """Build a material from a unit-suffixed mapping.

    ``base`` names a built-in record to start from; remaining keys override it.
    Unknown keys raise.
    """
    unknown = set(d) - set(_DICT_KEYS)
    if unknown:
        raise InvalidInputError(f"unknown material keys: {sorted(unknown)}")
    base = builtin_material(d["base"]) if "base" in d else None
    fields = dataclasses.asdict(base) if base else {}
    for key, value in d.items():
        target = _DICT_KEYS[key]
        if target is None or value is None:
            continue
        if key.endswith("_MPa"):
            value = float(value) * 1e6
        elif key.endswith("_kPa"):
            value = float(value) * 1e3
        fields[target] = value
    if "name" not in fields:
        fields["name"] = "custom"
    missing = {"youngs_modulus", "poisson_ratio"} - set(fields)
    if missing:
        raise InvalidInputError(f"material is missing {sorted(missing)}")
    return Material(**fields)
