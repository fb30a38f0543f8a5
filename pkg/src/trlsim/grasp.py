"""Antipodal-grasp payload model.

A grasped object can be lost three ways: it slips out of the fingers
(static friction), it twists the fingers until the allowed sag is used up
(torsional spring of the layer), or the layer breaks in shear. The payload
capacity is the smallest of these limits.

Interface units are N, mm, N*mm/rad and Pa; masses are in grams and are always
converted to weight with g0 = 9.81 m/s^2.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from enum import Enum

from .errors import InvalidInputError

__all__ = [
    "G0",
    "GraspScenario",
    "PayloadReport",
    "Mode",
    "Gripper",
    "FeasibilityReport",
    "slip_limit",
    "twist_limit",
    "twist_limit_si",
    "effective_stiffness",
    "fit_contact_radius",
    "shear_check",
    "payload_capacity",
    "feasibility",
    "mass_to_weight",
    "weight_to_mass",
    "PRESETS",
    "PRESET_ALIASES",
    "preset",
    "scenario_from_dict",
    "scenario_to_json",
    "report_to_json",
]

G0 = 9.81  # m/s^2
DEFAULT_FRICTION = 1.0  # silicone on rigid objects, assumed


class Mode(str, Enum):
    SLIP = "Slip"
    TWIST = "Twist"
    SHEAR = "Shear"


class Gripper(str, Enum):
    BENCHMARK = "Benchmark"
    TRL = "TRL"


# lifting limits quoted as masses [g]
DEFAULT_CAPACITY_G = {Gripper.BENCHMARK: 100.0, Gripper.TRL: 300.0}


def _check_nonneg(name, v):
    if v is None or not math.isfinite(v) or v < 0:
        raise InvalidInputError(f"{name} must be a finite number >= 0, got {v}")


def _check_pos(name, v):
    if v is None or not math.isfinite(v) or v <= 0:
        raise InvalidInputError(f"{name} must be a finite number > 0, got {v}")


@dataclass(frozen=True)
class GraspScenario:
    """One grasp.

    Parameters
    ----------
    normal_force : float
        Squeeze force of the fingers [N].
    friction : float
        Static friction coefficient.
    contact_radius : float
        Distance from the layer's neutral axis to the object [mm].
    kappa : float
        Torsional spring rate of the layer [N*mm/rad].
    allowed_sag : float
        Vertical sag tolerated before the grasp counts as lost [mm].
    shear_stress, shear_fracture : float, optional
        Working and fracture shear stress [Pa]; the shear check passes when
        either is missing.
    """

    normal_force: float
    contact_radius: float
    kappa: float
    allowed_sag: float
    friction: float = DEFAULT_FRICTION
    shear_stress: float | None = None
    shear_fracture: float | None = None

    def __post_init__(self):
        _check_nonneg("normal_force", self.normal_force)
        _check_nonneg("friction", self.friction)
        _check_pos("contact_radius", self.contact_radius)
        _check_pos("kappa", self.kappa)
        _check_nonneg("allowed_sag", self.allowed_sag)
        if self.shear_stress is not None:
            _check_nonneg("shear_stress", self.shear_stress)
        if self.shear_fracture is not None:
            _check_nonneg("shear_fracture", self.shear_fracture)

    def replace(self, **kw) -> "GraspScenario":
        d = asdict(self)
        d.update(kw)
        return GraspScenario(**d)


@dataclass(frozen=True)
class PayloadReport:
    slip_limit: float  # N
    twist_limit: float  # N
    effective_stiffness: float  # N/m
    shear_ok: bool
    capacity: float  # N
    governing_mode: Mode

    @property
    def capacity_g(self) -> float:
        return weight_to_mass(self.capacity)

    def to_dict(self) -> dict:
        return {
            "slip_limit_N": self.slip_limit,
            "twist_limit_N": self.twist_limit,
            "effective_stiffness_N_per_m": self.effective_stiffness,
            "shear_ok": self.shear_ok,
            "capacity_N": self.capacity,
            "capacity_g": self.capacity_g,
            "governing_mode": self.governing_mode.value,
            "g0_m_per_s2": G0,
        }

    def summary(self) -> str:
        return (f"capacity {self.capacity:.4g} N ({self.capacity_g:.4g} g at g0={G0}), "
                f"governed by {self.governing_mode.value}; slip {self.slip_limit:.4g} N, "
                f"twist {self.twist_limit:.4g} N, shear {'ok' if self.shear_ok else 'FAILS'}")


def mass_to_weight(mass_g: float) -> float:
    """Weight [N] of a mass in grams."""
    return mass_g * 1e-3 * G0


def weight_to_mass(weight_N: float) -> float:
    return weight_N / G0 * 1e3


def slip_limit(mu: float, normal_force: float) -> float:
    """Friction-limited load [N]."""
    _check_nonneg("friction", mu)
    _check_nonneg("normal_force", normal_force)
    return mu * normal_force


def twist_limit_si(kappa_Nm: float, r_m: float, x_m: float) -> float:
    """Twist-limited load [N] from SI inputs."""
    _check_pos("contact_radius", r_m)
    return kappa_Nm / r_m**2 * x_m


def twist_limit(kappa: float, r: float, x: float) -> float:
    """Load [N] that sags the object by ``x`` mm at radius ``r`` mm.

    With M = F r, M = kappa theta and x = r theta the spring seen at the object
    is kappa / r^2.
    """
    _check_pos("contact_radius", r)
    _check_nonneg("allowed_sag", x)
    return twist_limit_si(kappa * 1e-3, r * 1e-3, x * 1e-3)


def effective_stiffness(kappa: float, r: float) -> float:
    """kappa / r^2 in N/m for kappa in N*mm/rad and r in mm."""
    _check_pos("contact_radius", r)
    return (kappa * 1e-3) / (r * 1e-3) ** 2


def fit_contact_radius(kappa: float, measured_stiffness: float) -> float:
    """Radius [mm] that makes kappa / r^2 equal a measured stiffness [N/m]."""
    _check_pos("kappa", kappa)
    _check_pos("measured_stiffness", measured_stiffness)
    return math.sqrt(kappa * 1e-3 / measured_stiffness) * 1e3


def shear_check(tau: float | None, tau_f: float | None) -> bool:
    """True unless the shear stress strictly exceeds the fracture stress."""
    if tau is None or tau_f is None:
        return True
    _check_nonneg("shear_stress", tau)
    _check_nonneg("shear_fracture", tau_f)
    return tau <= tau_f


def payload_capacity(s: GraspScenario) -> PayloadReport:
    slip = slip_limit(s.friction, s.normal_force)
    twist = twist_limit(s.kappa, s.contact_radius, s.allowed_sag)
    k_eff = effective_stiffness(s.kappa, s.contact_radius)
    ok = shear_check(s.shear_stress, s.shear_fracture)
    if not ok:
        return PayloadReport(slip, twist, k_eff, False, 0.0, Mode.SHEAR)
    # ties go to Slip, then Twist
    if slip <= twist:
        return PayloadReport(slip, twist, k_eff, True, slip, Mode.SLIP)
    return PayloadReport(slip, twist, k_eff, True, twist, Mode.TWIST)


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    gripper: Gripper
    mass_g: float
    weight_N: float
    capacity_N: float
    margin_g: float
    source: str = "default"

    @property
    def verdict(self) -> str:
        return "Feasible" if self.feasible else "Infeasible"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "gripper": self.gripper.value,
            "mass_g": self.mass_g,
            "weight_N": self.weight_N,
            "capacity_N": self.capacity_N,
            "margin_g": self.margin_g,
            "capacity_source": self.source,
            "g0_m_per_s2": G0,
        }


def feasibility(object_mass: float, gripper, scenario: GraspScenario | None = None) -> FeasibilityReport:
    """Can ``gripper`` hold an object of ``object_mass`` grams?

    The default capacities are the quoted lifting limits (100 g benchmark,
    300 g triangulated layer). Passing a scenario replaces them with the
    model's payload capacity.
    """
    _check_nonneg("object_mass", object_mass)
    try:
        gripper = Gripper(gripper) if not isinstance(gripper, Gripper) else gripper
    except ValueError:
        names = {g.value.lower(): g for g in Gripper}
        if str(gripper).lower() not in names:
            raise InvalidInputError(f"unknown gripper {gripper!r}; expected Benchmark or TRL") from None
        gripper = names[str(gripper).lower()]
    if scenario is None:
        capacity = mass_to_weight(DEFAULT_CAPACITY_G[gripper])
        source = "default"
    else:
        capacity = payload_capacity(scenario).capacity
        source = "scenario"
    weight = mass_to_weight(object_mass)
    return FeasibilityReport(
        feasible=weight <= capacity,
        gripper=gripper,
        mass_g=float(object_mass),
        weight_N=weight,
        capacity_N=capacity,
        margin_g=weight_to_mass(capacity) - object_mass,
        source=source,
    )


# everything except the sag, which belongs to the task
PRESETS = {
    "trl-fit": dict(kappa=265.5, contact_radius=15.0, friction=1.0, normal_force=3.0),
    "benchmark-fit": dict(kappa=1.9, contact_radius=3.5, friction=1.0, normal_force=3.0),
}


# older spelling kept so existing scripts keep working
PRESET_ALIASES = {"paper-V.B-fit": "trl-fit"}


def preset(name: str, **overrides) -> GraspScenario:
    name = PRESET_ALIASES.get(name, name)
    if name not in PRESETS:
        raise InvalidInputError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    d = dict(PRESETS[name])
    d.update({k: v for k, v in overrides.items() if v is not None})
    missing = [k for k in ("allowed_sag",) if k not in d]
    if missing:
        raise InvalidInputError(f"scenario is missing {', '.join(missing)}")
    return GraspScenario(**d)


_JSON_KEYS = {
    "normal_force_N": "normal_force",
    "friction": "friction",
    "contact_radius_mm": "contact_radius",
    "kappa_Nmm_per_rad": "kappa",
    "allowed_sag_mm": "allowed_sag",
    "shear_stress_Pa": "shear_stress",
    "shear_fracture_Pa": "shear_fracture",
}
REQUIRED_FIELDS = ("normal_force_N", "contact_radius_mm", "kappa_Nmm_per_rad", "allowed_sag_mm")


def scenario_from_dict(d: dict) -> GraspScenario:
    """Strict parse of a unit-suffixed scenario mapping."""
    unknown = sorted(set(d) - set(_JSON_KEYS))
    if unknown:
        raise InvalidInputError(f"unknown scenario keys: {', '.join(unknown)}")
    missing = [k for k in REQUIRED_FIELDS if d.get(k) is None]
    if missing:
        raise InvalidInputError(f"scenario is missing {', '.join(missing)}")
    kw = {}
    for k, v in d.items():
        if v is None:
            continue
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise InvalidInputError(f"{k} must be a number, got {v!r}")
        kw[_JSON_KEYS[k]] = float(v)
    return GraspScenario(**kw)


def scenario_to_dict(s: GraspScenario) -> dict:
    inv = {v: k for k, v in _JSON_KEYS.items()}
    return {inv[k]: v for k, v in asdict(s).items() if v is not None}


def scenario_to_json(s: GraspScenario, indent=2) -> str:
    return json.dumps(scenario_to_dict(s), indent=indent, sort_keys=True)


def report_to_json(s: GraspScenario, r: PayloadReport, indent=2) -> str:
    return json.dumps({"scenario": scenario_to_dict(s), "report": r.to_dict()}, indent=indent, sort_keys=True)
