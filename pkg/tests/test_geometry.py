import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trlsim.errors import InvalidInputError, MeshingError
from trlsim.geometry import (SllSpec, TriMesh, TrlSpec, build_mesh, build_sll_mesh, build_trl_mesh,
                             export_stl, mesh_to_json, read_stl, stl_enclosed_volume, stl_solid_faces,
                             trl_panel_area_closed_form, validate_mesh)


def _kinds(defects):
    return {d.kind for d in defects}


def test_sll_structured_grid():
    m = build_sll_mesh(SllSpec(), 5.0)
    assert (m.n_nodes, m.n_elements) == (105, 160)
    lo, hi = m.bounding_box()
    np.testing.assert_array_equal(lo, [0, -10, 0])
    np.testing.assert_array_equal(hi, [100, 10, 0])
    assert build_sll_mesh(SllSpec(), 2.5).n_elements == 4 * 160


def test_sll_node_sets():
    m = build_sll_mesh(SllSpec(), 2.0)
    assert np.all(m.nodes[m.node_sets["fixed_edge"], 0] == 0)
    assert np.all(m.nodes[m.node_sets["load_edge"], 0] == 100)
    np.testing.assert_array_equal(m.nodes[m.node("tip_center_A")], [100, 0, 0])
    np.testing.assert_array_equal(m.nodes[m.node("tip_edge_B")], [100, 10, 0])
    assert len(m.element_sets["load_adjacent"]) > 0


def test_trl_apex_positions():
    for n, expected in ((2, [25.0, 75.0]), (30, None)):
        s = TrlSpec(triangle_count=n)
        m = build_trl_mesh(s, 4.0)
        apexes = np.sort(m.nodes[np.isclose(m.nodes[:, 2], -12.0), 0])
        if expected:
            np.testing.assert_allclose(apexes, expected)
        else:
            assert apexes[0] == pytest.approx(100 / 60)
            np.testing.assert_allclose(np.diff(apexes), 100 / 30)


def test_trl_default_height_and_angle():
    s = TrlSpec()
    assert s.fin_height == 12.0
    assert s.alpha_deg == pytest.approx(math.degrees(math.atan(24 / (100 / 30))))


@pytest.mark.parametrize("n", range(2, 31))
def test_trl_meshes_are_clean(n):
    m = build_trl_mesh(TrlSpec(triangle_count=n), 2.0)
    assert validate_mesh(m) == []


@pytest.mark.parametrize("cap", [0.0, 2.0])
@pytest.mark.parametrize("n", [2, 5, 7, 13, 30])
def test_trl_area_matches_closed_form(n, cap):
    s = TrlSpec(triangle_count=n, tip_cap_height=cap)
    m = build_trl_mesh(s, 3.0)
    assert m.element_areas().sum() == pytest.approx(trl_panel_area_closed_form(s), rel=1e-6)


def test_uncapped_area_is_teeth_plus_flange():
    s = TrlSpec(triangle_count=4, tip_cap_height=0.0)
    slant = math.hypot(10, 12)
    assert trl_panel_area_closed_form(s) == pytest.approx(2 * 4 * 0.5 * 25 * slant + 2000)


@settings(max_examples=15, deadline=None)
@given(n=st.integers(2, 30), edge=st.sampled_from([2.0, 3.0, 5.0]))
def test_refinement_preserves_box_and_sets(n, edge):
    s = TrlSpec(triangle_count=n)
    a, b = build_trl_mesh(s, edge), build_trl_mesh(s, edge / 2)
    for lo, hi in zip(a.bounding_box(), b.bounding_box()):
        np.testing.assert_allclose(lo, hi)
    for m in (a, b):
        assert np.all(np.isclose(m.nodes[m.node_sets["fixed_edge"], 0], 0))
        assert np.all(np.isclose(m.nodes[m.node_sets["load_edge"], 0], 100))


def test_trl_rejects_bad_specs():
    with pytest.raises(InvalidInputError):
        TrlSpec(triangle_count=0)
    with pytest.raises(InvalidInputError):
        TrlSpec(tip_cap_height=12.0)
    with pytest.warns(UserWarning):
        TrlSpec(triangle_count=40)


def test_aspect_ratio_error_names_panel():
    with pytest.warns(UserWarning):
        s = TrlSpec(triangle_count=200, width=200, tip_cap_height=0.0)
    with pytest.raises(MeshingError, match="panel 0"):
        build_trl_mesh(s)


def test_build_mesh_dispatch():
    assert build_mesh(SllSpec(), 5.0).n_elements == 160
    with pytest.raises(InvalidInputError):
        build_mesh("not a spec")


# -- validator ---------------------------------------------------------------

def _square():
    nodes = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], dtype=float)
    elements = np.array([[0, 1, 2], [0, 2, 3]])
    sets = {"fixed_edge": np.array([0, 3]), "load_edge": np.array([1, 2])}
    return nodes, elements, sets


def test_validator_clean_square():
    n, e, s = _square()
    assert validate_mesh(TriMesh(n, e, 1.0, s)) == []


def test_validator_duplicated_element():
    n, e, s = _square()
    assert "non_manifold_edge" in _kinds(validate_mesh(TriMesh(n, np.vstack([e, e[:1]]), 1.0, s)))


def test_validator_collapsed_node_pair():
    n, e, s = _square()
    n[2] = n[1]
    assert "zero_area" in _kinds(validate_mesh(TriMesh(n, e, 1.0, s)))


def test_validator_other_defects():
    n, e, s = _square()
    flipped = e.copy()
    flipped[1] = flipped[1][::-1]
    assert "inconsistent_winding" in _kinds(validate_mesh(TriMesh(n, flipped, 1.0, s)))
    extra = np.vstack([n, [[5, 5, 0]]])
    assert "dangling_node" in _kinds(validate_mesh(TriMesh(extra, e, 1.0, s)))
    bad = e.copy()
    bad[0, 0] = 99
    assert "index_out_of_range" in _kinds(validate_mesh(TriMesh(n, bad, 1.0, s)))
    assert "node_set" in _kinds(validate_mesh(TriMesh(n, e, 1.0, {"fixed_edge": [0], "load_edge": [0]})))


# -- STL ---------------------------------------------------------------------

def test_unit_triangle_prism():
    n = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=float)
    m = TriMesh(n, [[0, 1, 2]], 1.0, {"fixed_edge": [0], "load_edge": [1]})
    faces = stl_solid_faces(m, 1.0)
    assert len(faces) == 8
    assert stl_enclosed_volume(faces) == pytest.approx(0.5, abs=1e-9)


def test_stl_format_and_volume():
    s = TrlSpec(triangle_count=30)
    m = build_trl_mesh(s, 2.0)
    data = export_stl(m, 1.0)
    normals, tris = read_stl(data)
    assert len(data) == 84 + 50 * len(tris)
    assert int.from_bytes(data[80:84], "little") == len(tris)
    vol = stl_enclosed_volume(tris)
    assert vol > 0
    assert vol == pytest.approx(m.element_areas().sum() * 1.0, rel=1e-3)
    # stored normals agree with the winding
    wn = np.cross(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0])
    assert np.all(np.einsum("ij,ij->i", wn, normals) > 0)


def test_stl_refuses_defective_mesh():
    n, e, s = _square()
    n[2] = n[1]
    with pytest.raises(InvalidInputError, match="zero_area"):
        export_stl(TriMesh(n, e, 1.0, s), 1.0)


def test_read_stl_rejects_truncated():
    with pytest.raises(InvalidInputError):
        read_stl(b"\0" * 40)
    m = build_sll_mesh(SllSpec(), 10.0)
    with pytest.raises(InvalidInputError):
        read_stl(export_stl(m, 1.0)[:-10])


def test_mesh_json_dump():
    m = build_trl_mesh(TrlSpec(triangle_count=3), 4.0)
    d = json.loads(mesh_to_json(m))
    assert d["units"] == "mm"
    assert len(d["nodes"]) == m.n_nodes
    assert set(d["node_sets"]) >= {"fixed_edge", "load_edge", "tip_center_A", "tip_edge_B"}
