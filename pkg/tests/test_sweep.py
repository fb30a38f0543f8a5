import csv
import io
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _reference import SLL_TABLE
from trlsim.errors import InvalidInputError
from trlsim.sweep import (CSV_COLUMNS, Objective, SweepPlan, SweepRow, SweepTable, compare_families,
                          run_sweep, select_design, svg_line_plot, sweep_plots, swoosh_check)


def _table(params, in_plane, angular, scf=None, family="TRL"):
    scf = scf if scf is not None else [1.0] * len(params)
    rows = [SweepRow(family, p, a, b, 5.0 / np.radians(b), s, 100, "ok")
            for p, a, b, s in zip(params, in_plane, angular, scf)]
    return SweepTable(family, rows[::-1])


def _landmark_curves():
    """Curves through the published landmarks, linear in between."""
    t = np.arange(2, 31)
    inplane = np.interp(t, [2, 7, 30], [20.7, 11.3, 15.6])
    angular = np.interp(t, [2, 5, 30], [0.8, 0.58, 1.6])
    scf = np.interp(t, [2, 30], [12.0, 4.0])
    return _table(list(t), inplane, angular, scf)


# -- plan validation ---------------------------------------------------------

def test_plan_defaults():
    s = SweepPlan("SLL")
    assert s.grid == (0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
    assert s.moment == 0.5 and s.force == 0.01
    t = SweepPlan("TRL")
    assert t.grid == tuple(range(2, 31)) and t.moment == 5.0


@pytest.mark.parametrize("grid", [(), (0.5, 0.4), (0.4, 0.4)])
def test_plan_rejects_bad_grid(grid):
    with pytest.raises(InvalidInputError):
        SweepPlan("SLL", grid=grid)


def test_plan_rejects_fractional_triangles():
    with pytest.raises(InvalidInputError):
        SweepPlan("TRL", grid=(2, 3.5))


# -- table I/O ---------------------------------------------------------------

def test_rows_sorted_and_csv_columns():
    tab = _table([5, 2, 9], [1, 2, 3], [0.5, 0.6, 0.7])
    assert tab.params == [2, 5, 9]
    lines = list(csv.reader(io.StringIO(tab.to_csv())))
    assert tuple(lines[0]) == CSV_COLUMNS
    assert CSV_COLUMNS == ("family", "param", "in_plane_mm", "angular_deg", "kappa_Nmm_per_rad",
                           "scf", "dof", "status")
    assert [r[1] for r in lines[1:]] == ["2", "5", "9"]


def test_json_round_trip():
    tab = _landmark_curves()
    tab.rows[3].status = "failed"
    tab.rows[3].in_plane_mm = float("nan")
    again = SweepTable.from_json(tab.to_json())
    assert again.to_json() == tab.to_json()
    assert json.loads(tab.to_json())["rows"][3]["in_plane_mm"] is None


# -- shape -------------------------------------------------------------------

def test_swoosh_on_reference_curves():
    rep = swoosh_check(_landmark_curves())
    assert rep.is_swoosh
    assert rep.in_plane.minimum_param == 7
    assert rep.angular.minimum_param == 5


def test_swoosh_monotone_has_no_minimum():
    rep = swoosh_check(_table([1, 2, 3, 4], [1, 2, 3, 4], [4, 3, 2, 1]))
    assert not rep.in_plane.interior_minimum and rep.in_plane.minimum_index is None
    assert "no interior minimum" in rep.in_plane.describe()
    assert not rep.is_swoosh


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_swoosh_v_shape_reports_index(k):
    x = np.arange(6)
    v = np.abs(x - k) + 1.0
    rep = swoosh_check(_table(list(x + 2), v, v))
    assert rep.in_plane.minimum_index == k


def test_swoosh_needs_three_points():
    with pytest.raises(InvalidInputError):
        swoosh_check(_table([7], [1.0], [1.0]))


# -- selection ---------------------------------------------------------------

def test_select_design_on_reference_curves():
    tab = _landmark_curves()
    assert select_design(tab, Objective.MAX_IN_PLANE).param == 2
    assert select_design(tab, "MaxTorsionResistance").param == 5
    # reference: untriangulated 0.4 mm strip, twist scaled to the same 5 N*mm
    choice = select_design(tab, Objective.CYCLIC_LIFE, reference_angular=15.36 * 10)
    assert choice.param == 30
    assert "stress concentration" in choice.rationale


def test_select_design_ties_prefer_more_triangles():
    tab = _table([2, 3, 4], [5, 5, 1], [1, 1, 2])
    assert select_design(tab, "MaxInPlane").param == 3
    assert select_design(tab, "MaxTorsionResistance").param == 3


@settings(max_examples=100, deadline=None)
@given(ang=st.lists(st.floats(0.1, 10), min_size=3, max_size=12),
       scf=st.lists(st.floats(1, 20), min_size=12, max_size=12),
       thr=st.floats(0, 0.5))
def test_cyclic_life_respects_threshold(ang, scf, thr):
    n = len(ang)
    tab = _table(list(range(2, 2 + n)), [1.0] * n, ang, scf[:n])
    choice = select_design(tab, "CyclicLife", threshold=thr)
    assert tab.row(choice.param).angular_deg <= min(ang) * (1 + thr) * (1 + 1e-12)


def test_select_design_skips_failed_rows():
    tab = _table([2, 3, 4], [9, 5, 1], [1, 2, 3])
    tab.rows[0].status = "failed"
    assert select_design(tab, "MaxInPlane").param == 3


# -- comparison and plots ----------------------------------------------------

def test_compare_families():
    c = compare_families(1.9, 265.5)
    assert c.kappa_ratio == pytest.approx(140, rel=0.01)
    assert compare_families(3.0, 3.0).angular_reduction_pct == 0.0
    assert compare_families(1.0, 1 / (1 - 0.947)).angular_reduction_pct == pytest.approx(94.7)
    with pytest.raises(InvalidInputError):
        compare_families(0.0, 1.0)


def test_svg_plots():
    plots = sweep_plots(_landmark_curves())
    assert set(plots) == {"in_plane", "angular"}
    for s in plots.values():
        assert s.startswith("<svg") and "<polyline" in s
    assert "&lt;" in svg_line_plot([0, 1], [0, 1], title="a<b")


# -- running -----------------------------------------------------------------

def test_sll_plan_defaults_run():
    tab = run_sweep(SweepPlan("SLL"))
    assert len(tab.rows) == 8 and all(r.ok for r in tab.rows)
    r = tab.row(0.5)
    assert r.in_plane_mm == pytest.approx(SLL_TABLE[0.5][0], rel=0.10)
    assert r.angular_deg == pytest.approx(SLL_TABLE[0.5][1], rel=0.10)
    assert r.level >= 1 and r.tolerance == 0.01


def test_sweep_output_independent_of_parallelism():
    a = run_sweep(SweepPlan("SLL", grid=(0.7, 1.0), tolerance=0.05, parallelism=1))
    b = run_sweep(SweepPlan("SLL", grid=(0.7, 1.0), tolerance=0.05, parallelism=2))
    assert a.to_csv() == b.to_csv()
    assert a.to_json() == b.to_json()


def test_failed_point_recorded_in_row():
    plan = SweepPlan("TRL", grid=(3,), tolerance=0.01, max_dof=500)
    row = run_sweep(plan).rows[0]
    assert row.status in ("not_converged", "failed")
    assert row.message


def test_trl_four_point_ordering():
    tab = run_sweep(SweepPlan("TRL", grid=(2, 5, 7, 30)))
    assert all(r.ok for r in tab.rows)
    assert tab.params[int(np.argmin(tab.column("angular_deg")))] == 5
    assert tab.params[int(np.argmin(tab.column("in_plane_mm")))] == 7
