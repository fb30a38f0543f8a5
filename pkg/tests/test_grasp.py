import json

import pytest
from hypothesis import given, settings, strategies as st

from _reference import MEASURED_STIFFNESS
from trlsim.errors import InvalidInputError
from trlsim.grasp import (G0, PRESETS, GraspScenario, Gripper, Mode, effective_stiffness, feasibility,
                          fit_contact_radius, mass_to_weight, payload_capacity, preset, report_to_json,
                          scenario_from_dict, scenario_to_json, shear_check, slip_limit, twist_limit,
                          twist_limit_si, weight_to_mass)


def test_slip_limit_examples():
    assert slip_limit(0.5, 10) == 5
    assert slip_limit(0.0, 7) == 0
    assert slip_limit(1.0, 3.0) == 3.0
    with pytest.raises(InvalidInputError):
        slip_limit(-0.1, 3)


def test_twist_limit_examples():
    assert twist_limit(265.5, 15, 1) == pytest.approx(1.18, abs=0.005)
    assert twist_limit(265.5, 15, 0) == 0
    assert twist_limit(265.5, 30, 1) == pytest.approx(twist_limit(265.5, 15, 1) / 4, rel=1e-15)
    with pytest.raises(InvalidInputError):
        twist_limit(265.5, 0, 1)


def test_effective_stiffness_examples():
    assert effective_stiffness(265.5, 15.0) == pytest.approx(1180, abs=1)
    assert effective_stiffness(4 * 265.5, 30.0) == pytest.approx(effective_stiffness(265.5, 15.0), rel=1e-14)
    assert effective_stiffness(1000.0, 1000.0) == pytest.approx(1.0, rel=1e-14)


def test_fit_contact_radius_examples():
    assert fit_contact_radius(265.5, MEASURED_STIFFNESS["TRL"]) == pytest.approx(15.0, abs=0.1)
    assert fit_contact_radius(1.9, MEASURED_STIFFNESS["Benchmark"]) == pytest.approx(3.5, abs=0.1)
    assert fit_contact_radius(1000.0, 1.0) == pytest.approx(1000.0)


@given(kappa=st.floats(1e-3, 1e6), k=st.floats(1e-3, 1e6))
def test_fit_round_trip(kappa, k):
    assert effective_stiffness(kappa, fit_contact_radius(kappa, k)) == pytest.approx(k, rel=1e-9)


def test_shear_check_examples():
    assert shear_check(1e3, 1e5)
    assert shear_check(5e4, 5e4)
    assert not shear_check(5e4 + 1, 5e4)
    assert shear_check(None, 1e5)
    assert shear_check(1e3, None)


def test_payload_examples():
    base = GraspScenario(normal_force=3, friction=1, kappa=265.5, contact_radius=15, allowed_sag=1)
    r = payload_capacity(base)
    assert r.capacity == pytest.approx(1.18, abs=0.005) and r.governing_mode is Mode.TWIST
    r = payload_capacity(base.replace(friction=0.1))
    assert r.capacity == pytest.approx(0.3) and r.governing_mode is Mode.SLIP
    r = payload_capacity(base.replace(shear_stress=2e5, shear_fracture=1e5))
    assert r.capacity == 0 and r.governing_mode is Mode.SHEAR and not r.shear_ok


def test_tie_goes_to_slip():
    k = 265.5
    s = GraspScenario(normal_force=twist_limit(k, 15, 1), friction=1, kappa=k, contact_radius=15, allowed_sag=1)
    assert payload_capacity(s).governing_mode is Mode.SLIP


scenarios = st.builds(
    GraspScenario,
    normal_force=st.floats(0, 50),
    friction=st.floats(0, 2),
    contact_radius=st.floats(0.5, 100),
    kappa=st.floats(0.1, 1e4),
    allowed_sag=st.floats(0, 20),
)
FIELDS = {"kappa": 1, "friction": 1, "normal_force": 1, "allowed_sag": 1, "contact_radius": -1}


@settings(max_examples=500, deadline=None)
@given(s=scenarios, which=st.sampled_from(sorted(FIELDS)), factor=st.floats(1.0, 10.0))
def test_capacity_monotone(s, which, factor):
    bigger = s.replace(**{which: getattr(s, which) * factor})
    a, b = payload_capacity(s).capacity, payload_capacity(bigger).capacity
    if FIELDS[which] > 0:
        assert b >= a
    else:
        assert b <= a


@settings(max_examples=500, deadline=None)
@given(s=scenarios)
def test_governing_mode_is_argmin(s):
    r = payload_capacity(s)
    assert r.capacity == min(r.slip_limit, r.twist_limit)
    expected = Mode.SLIP if r.slip_limit <= r.twist_limit else Mode.TWIST
    assert r.governing_mode is expected


@settings(max_examples=200)
@given(s=scenarios)
def test_unit_audit(s):
    si = min(s.friction * s.normal_force,
             twist_limit_si(s.kappa * 1e-3, s.contact_radius * 1e-3, s.allowed_sag * 1e-3))
    assert payload_capacity(s).capacity == pytest.approx(si, rel=1e-9, abs=1e-300)
    # the same physics with every length in mm and N*mm directly
    mm = min(s.friction * s.normal_force, s.kappa / s.contact_radius**2 * s.allowed_sag)
    assert payload_capacity(s).capacity == pytest.approx(mm, rel=1e-9, abs=1e-300)


@pytest.mark.parametrize("kw", [dict(normal_force=-1), dict(friction=-0.1), dict(contact_radius=0),
                                dict(kappa=0), dict(allowed_sag=-1)])
def test_scenario_validation(kw):
    base = dict(normal_force=3, friction=1, kappa=265.5, contact_radius=15, allowed_sag=1)
    base.update(kw)
    with pytest.raises(InvalidInputError):
        GraspScenario(**base)


def test_mass_weight_conversion():
    assert G0 == 9.81
    assert mass_to_weight(100) == pytest.approx(0.981)
    assert weight_to_mass(mass_to_weight(123.4)) == pytest.approx(123.4)


def test_feasibility_examples():
    r = feasibility(250, Gripper.TRL)
    assert r.verdict == "Feasible" and r.margin_g == pytest.approx(50)
    assert feasibility(150, "Benchmark").verdict == "Infeasible"
    for g in Gripper:
        assert feasibility(0, g).feasible
    with pytest.raises(InvalidInputError):
        feasibility(100, "Robotiq")


@pytest.mark.parametrize("mass", [100.5, 150, 200, 250, 299, 300])
def test_feasibility_window(mass):
    assert feasibility(mass, "TRL").feasible
    assert not feasibility(mass, "benchmark").feasible


def test_feasibility_with_scenario():
    s = preset("trl-fit", allowed_sag=1.0)
    r = feasibility(100, "TRL", s)
    assert r.source == "scenario"
    assert r.capacity_N == pytest.approx(payload_capacity(s).capacity)


def test_presets():
    assert set(PRESETS) == {"trl-fit", "benchmark-fit"}
    assert preset("paper-V.B-fit", allowed_sag=1.8) == preset("trl-fit", allowed_sag=1.8)
    s = preset("trl-fit", allowed_sag=1.8)
    assert s.contact_radius == 15.0 and s.kappa == 265.5
    with pytest.raises(InvalidInputError, match="allowed_sag"):
        preset("trl-fit")
    with pytest.raises(InvalidInputError):
        preset("nope", allowed_sag=1)


def test_json_round_trip():
    s = GraspScenario(normal_force=3, friction=0.8, kappa=265.5, contact_radius=15, allowed_sag=1,
                      shear_stress=1e3, shear_fracture=1e5)
    again = scenario_from_dict(json.loads(scenario_to_json(s)))
    assert again == s
    payload = json.loads(report_to_json(s, payload_capacity(s)))
    assert payload["report"]["governing_mode"] == "Twist"
    assert payload["report"]["g0_m_per_s2"] == 9.81


def test_json_parse_is_strict():
    good = {"normal_force_N": 3, "contact_radius_mm": 15, "kappa_Nmm_per_rad": 265.5, "allowed_sag_mm": 1}
    assert scenario_from_dict(good).friction == 1.0
    with pytest.raises(InvalidInputError, match="unknown"):
        scenario_from_dict({**good, "radius": 3})
    with pytest.raises(InvalidInputError, match="missing"):
        scenario_from_dict({k: v for k, v in good.items() if k != "kappa_Nmm_per_rad"})
    with pytest.raises(InvalidInputError):
        scenario_from_dict({**good, "friction": "high"})
