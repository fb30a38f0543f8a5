"""Parametric strain-limiting-layer geometry and triangulated shell meshes.

Two layer families are supported:

* ``SllSpec`` -- a flat rectangular strip.
* ``TrlSpec`` -- a triangulated girder: a flat top flange spanning the full
  width with a pair of triangular fins ("teeth") under every bay. The teeth of
  bay ``i`` hang from the two flange edges between stations ``i*p`` and
  ``(i+1)*p`` (``p = L / T_n``) and meet at an apex on the bottom centerline at
  ``x = (i + 1/2) p, z = -h``.

  Two teeth touching at a single apex node would be joined only at a point;
  a shell model of that joint softens without bound under refinement. The
  bottom ``tip_cap_height`` of every spike (the bonding land) is therefore
  closed by a small gusset triangle at its front and back, so the teeth
  connect along edges.

Coordinates are in mm; x runs along the length from the clamped end, y across
the width, z is normal to the flange with the teeth on the negative side.
"""

from __future__ import annotations

import json
import math
import struct
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import InvalidInputError, MeshingError

__all__ = [
    "SllSpec",
    "TrlSpec",
    "TriMesh",
    "DefectReport",
    "build_sll_mesh",
    "build_trl_mesh",
    "build_mesh",
    "validate_mesh",
    "export_stl",
    "stl_solid_faces",
    "read_stl",
    "stl_enclosed_volume",
    "mesh_to_json",
    "trl_panel_area_closed_form",
]

DEFAULT_TARGET_EDGE = 2.0
MAX_PANEL_ASPECT = 50.0


@dataclass(frozen=True)
class SllSpec:
    """Flat strip: length, width and thickness in mm."""

    length: float = 100.0
    width: float = 20.0
    thickness: float = 1.0

    def __post_init__(self):
        for k in ("length", "width", "thickness"):
            v = getattr(self, k)
            if not (v > 0 and math.isfinite(v)):
                raise InvalidInputError(f"SllSpec.{k} must be > 0, got {v}")

    @property
    def family(self) -> str:
        return "SLL"

    @property
    def parameter(self) -> float:
        return self.thickness


@dataclass(frozen=True)
class TrlSpec:
    """Triangulated layer.

    ``fin_height`` defaults to 10 % of the length plus 2 mm of bonding margin.
    ``flange_thickness`` defaults to ``panel_thickness``. ``tip_cap_height``
    is rounded so that ``fin_height / tip_cap_height`` is an integer; 0 leaves
    the teeth joined only at their apex nodes.
    """

    length: float = 100.0
    width: float = 20.0
    triangle_count: int = 30
    fin_height: float | None = None
    panel_thickness: float = 1.0
    flange_thickness: float | None = None
    tip_cap_height: float = 2.0

    def __post_init__(self):
        if self.fin_height is None:
            object.__setattr__(self, "fin_height", 0.10 * self.length + 2.0)
        if self.flange_thickness is None:
            object.__setattr__(self, "flange_thickness", self.panel_thickness)
        if int(self.triangle_count) != self.triangle_count or self.triangle_count < 1:
            raise InvalidInputError(f"triangle_count must be an integer >= 1, got {self.triangle_count}")
        object.__setattr__(self, "triangle_count", int(self.triangle_count))
        for k in ("length", "width", "fin_height", "panel_thickness", "flange_thickness"):
            v = getattr(self, k)
            if not (v > 0 and math.isfinite(v)):
                raise InvalidInputError(f"TrlSpec.{k} must be > 0, got {v}")
        c = self.tip_cap_height
        if not (math.isfinite(c) and 0 <= c < self.fin_height):
            raise InvalidInputError(f"tip_cap_height must be in [0, fin_height), got {c}")
        if not 2 <= self.triangle_count <= 30:
            warnings.warn(
                f"triangle_count={self.triangle_count} is outside the studied range 2..30",
                stacklevel=3,
            )

    @property
    def family(self) -> str:
        return "TRL"

    @property
    def parameter(self) -> int:
        return self.triangle_count

    @property
    def pitch(self) -> float:
        return self.length / self.triangle_count

    @property
    def cap_divisions(self) -> int:
        """q such that the cap spans the last 1/q of each tooth edge (0 = no cap)."""
        if self.tip_cap_height == 0:
            return 0
        return max(2, round(self.fin_height / self.tip_cap_height))

    @property
    def apex_x(self) -> np.ndarray:
        return (np.arange(self.triangle_count) + 0.5) * self.pitch

    @property
    def alpha_deg(self) -> float:
        """Base angle of a tooth seen in side elevation."""
        return math.degrees(math.atan(2.0 * self.fin_height / self.pitch))

    @property
    def slant(self) -> float:
        """Distance from a flange edge to the apex line."""
        return math.hypot(0.5 * self.width, self.fin_height)


@dataclass
class TriMesh:
    """Triangulated shell.

    ``panel`` gives the flat panel each element was cut from; winding is only
    required to be consistent within a panel.
    """

    nodes: np.ndarray
    elements: np.ndarray
    thickness: np.ndarray
    node_sets: dict = field(default_factory=dict)
    element_sets: dict = field(default_factory=dict)
    panel: np.ndarray | None = None
    target_edge: float | None = None

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float).reshape(-1, 3)
        self.elements = np.asarray(self.elements, dtype=np.int64).reshape(-1, 3)
        self.thickness = np.broadcast_to(
            np.asarray(self.thickness, dtype=float), (len(self.elements),)).copy()
        if self.panel is None:
            self.panel = np.zeros(len(self.elements), dtype=np.int64)
        self.panel = np.asarray(self.panel, dtype=np.int64)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    def element_areas(self) -> np.ndarray:
        p = self.nodes[self.elements]
        return 0.5 * np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.nodes.min(axis=0), self.nodes.max(axis=0)

    def node(self, name: str) -> int:
        """Index of a single-node set."""
        ids = self.node_sets[name]
        if len(ids) != 1:
            raise InvalidInputError(f"node set {name!r} has {len(ids)} members")
        return int(ids[0])


def _nearest(nodes, point) -> np.ndarray:
    d = np.linalg.norm(nodes - np.asarray(point, dtype=float), axis=1)
    return np.array([int(np.argmin(d))], dtype=np.int64)


def _end_sets(nodes, elements, length, width, tol):
    fixed = np.flatnonzero(np.abs(nodes[:, 0]) <= tol)
    load = np.flatnonzero(np.abs(nodes[:, 0] - length) <= tol)
    if len(fixed) == 0 or len(load) == 0:
        raise MeshingError("could not locate the clamped or loaded edge")
    loaded = np.isin(elements, load).any(axis=1)
    node_sets = {
        "fixed_edge": fixed,
        "load_edge": load,
        "tip_center_A": _nearest(nodes, (length, 0.0, 0.0)),
        "tip_edge_B": _nearest(nodes, (length, 0.5 * width, 0.0)),
    }
    element_sets = {"load_adjacent": np.flatnonzero(loaded)}
    return node_sets, element_sets


def _even_divisions(extent, target):
    return max(2, 2 * math.ceil(extent / (2.0 * target) - 1e-9))


def _grid_triangles(nx, ny, node_id):
    """Split an nx-by-ny cell grid into triangles with alternating diagonals.

    ``node_id(i, j)`` maps grid indices to node numbers. Returned triangles are
    counter-clockwise in the (i, j) parameter plane.
    """
    tris = []
    for i in range(nx):
        for j in range(ny):
            a, b = node_id(i, j), node_id(i + 1, j)
            c, d = node_id(i + 1, j + 1), node_id(i, j + 1)
            if (i + j) % 2 == 0:
                tris.append((a, b, c))
                tris.append((a, c, d))
            else:
                tris.append((a, b, d))
                tris.append((b, c, d))
    return tris


def build_sll_mesh(spec: SllSpec, target_edge: float = DEFAULT_TARGET_EDGE) -> TriMesh:
    """Structured mesh of the flat strip in the z = 0 plane."""
    if not (target_edge > 0):
        raise InvalidInputError(f"target_edge must be > 0, got {target_edge}")
    if target_edge > min(spec.length, spec.width):
        raise InvalidInputError(
            f"target_edge {target_edge} exceeds the smallest strip dimension")
    nx = max(1, math.ceil(spec.length / target_edge - 1e-9))
    ny = _even_divisions(spec.width, target_edge)
    xs = np.linspace(0.0, spec.length, nx + 1)
    ys = np.linspace(-0.5 * spec.width, 0.5 * spec.width, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    nodes = np.column_stack([X.ravel(), Y.ravel(), np.zeros(X.size)])
    elements = np.array(_grid_triangles(nx, ny, lambda i, j: i * (ny + 1) + j), dtype=np.int64)
    tol = 1e-9 * spec.length
    node_sets, element_sets = _end_sets(nodes, elements, spec.length, spec.width, tol)
    return TriMesh(nodes, elements, spec.thickness, node_sets, element_sets,
                   panel=np.zeros(len(elements), dtype=np.int64), target_edge=target_edge)


def _subdivide_triangle(p0, p1, p2, m):
    """Uniform m-by-m subdivision; keeps the p0 -> p1 -> p2 winding."""
    pts = []
    index = {}
    for i in range(m + 1):
        for j in range(m + 1 - i):
            index[i, j] = len(pts)
            pts.append(p0 + (i / m) * (p1 - p0) + (j / m) * (p2 - p0))
    tris = []
    for i in range(m):
        for j in range(m - i):
            tris.append((index[i, j], index[i + 1, j], index[i, j + 1]))
            if j < m - i - 1:
                tris.append((index[i + 1, j], index[i + 1, j + 1], index[i, j + 1]))
    return np.array(pts), tris


def _trl_panels(spec: TrlSpec):
    """Corner points of every tooth, wound so normals point away from the girder."""
    half = 0.5 * spec.width
    p = spec.pitch
    panels = []
    for i in range(spec.triangle_count):
        x0, x1 = i * p, (i + 1) * p
        apex = np.array([(i + 0.5) * p, 0.0, -spec.fin_height])
        # +y side: outward normal has +y, -z components
        panels.append((np.array([x0, half, 0.0]), np.array([x1, half, 0.0]), apex))
        panels.append((np.array([x1, -half, 0.0]), np.array([x0, -half, 0.0]), apex))
    return panels


def trl_panel_area_closed_form(spec: TrlSpec) -> float:
    """Total tooth plus flange area [mm^2]."""
    n = spec.triangle_count
    area = 2 * n * (0.5 * spec.pitch * spec.slant) + spec.length * spec.width
    q = spec.cap_divisions
    if q:
        gusset = 0.5 * spec.width * math.hypot(spec.fin_height, 0.5 * spec.pitch) / q**2
        area += 2 * n * gusset
    return area


def _trl_gussets(spec: TrlSpec):
    """Front and back cap triangles of every spike, normals pointing along -x / +x."""
    q = spec.cap_divisions
    out = []
    if not q:
        return out
    half, p = 0.5 * spec.width, spec.pitch
    for i in range(spec.triangle_count):
        apex = np.array([(i + 0.5) * p, 0.0, -spec.fin_height])
        for x, sign in ((i * p, -1.0), ((i + 1) * p, 1.0)):
            a = apex + (np.array([x, half, 0.0]) - apex) / q
            b = apex + (np.array([x, -half, 0.0]) - apex) / q
            if np.cross(b - a, apex - a)[0] * sign < 0:
                a, b = b, a
            out.append((a, b, apex))
    return out


def build_trl_mesh(spec: TrlSpec, target_edge: float = DEFAULT_TARGET_EDGE) -> TriMesh:
    """Mesh the flange and every tooth, merging coincident nodes on shared edges."""
    if not (target_edge > 0):
        raise InvalidInputError(f"target_edge must be > 0, got {target_edge}")
    panels = _trl_panels(spec)
    for k, (a, b, c) in enumerate(panels):
        edges = [np.linalg.norm(b - a), np.linalg.norm(c - b), np.linalg.norm(a - c)]
        area = 0.5 * np.linalg.norm(np.cross(b - a, c - a))
        aspect = max(edges) ** 2 / (2.0 * area) if area > 0 else math.inf
        if aspect > MAX_PANEL_ASPECT:
            raise MeshingError(f"panel {k} (tooth {k // 2}) has aspect ratio {aspect:.1f} "
                               f"above the mesher limit {MAX_PANEL_ASPECT}")
    longest = max(max(np.linalg.norm(b - a), np.linalg.norm(c - b), np.linalg.norm(a - c))
                  for a, b, c in panels)
    m = max(1, math.ceil(longest / target_edge - 1e-9))
    q = spec.cap_divisions
    if q:
        # tooth edges need a node where the cap starts
        m = q * math.ceil(m / q)

    # flange: its x-stations must coincide with the tooth base subdivision
    nx = spec.triangle_count * m
    ny = _even_divisions(spec.width, target_edge)
    xs = np.linspace(0.0, spec.length, nx + 1)
    ys = np.linspace(-0.5 * spec.width, 0.5 * spec.width, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = [np.column_stack([X.ravel(), Y.ravel(), np.zeros(X.size)])]
    tris = [np.array(_grid_triangles(nx, ny, lambda i, j: i * (ny + 1) + j), dtype=np.int64)]
    panel_id = [np.zeros(len(tris[0]), dtype=np.int64)]
    thick = [np.full(len(tris[0]), spec.flange_thickness)]
    offset = len(pts[0])
    for k, (a, b, c) in enumerate(panels):
        p, t = _subdivide_triangle(a, b, c, m)
        pts.append(p)
        tris.append(np.asarray(t, dtype=np.int64) + offset)
        panel_id.append(np.full(len(t), k + 1, dtype=np.int64))
        thick.append(np.full(len(t), spec.panel_thickness))
        offset += len(p)
    for k, (a, b, c) in enumerate(_trl_gussets(spec)):
        p, t = _subdivide_triangle(a, b, c, m // q)
        pts.append(p)
        tris.append(np.asarray(t, dtype=np.int64) + offset)
        panel_id.append(np.full(len(t), len(panels) + k + 1, dtype=np.int64))
        thick.append(np.full(len(t), spec.panel_thickness))
        offset += len(p)
    raw = np.vstack(pts)
    elements = np.vstack(tris)

    # merge coincident points, numbering nodes by first appearance
    tol = 1e-7 * spec.length
    tree = cKDTree(raw)
    pairs = tree.query_pairs(tol, output_type="ndarray")
    parent = np.arange(len(raw))
    if len(pairs):
        pairs = np.sort(pairs, axis=1)
        pairs = pairs[np.lexsort((pairs[:, 0], pairs[:, 1]))]
        for a, b in pairs:
            ra = a
            while parent[ra] != ra:
                ra = parent[ra]
            rb = b
            while parent[rb] != rb:
                rb = parent[rb]
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
        for i in range(len(parent)):
            r = i
            while parent[r] != r:
                r = parent[r]
            parent[i] = r
    roots, new_index = np.unique(parent, return_inverse=True)
    nodes = raw[roots]
    elements = new_index[elements]

    node_sets, element_sets = _end_sets(nodes, elements, spec.length, spec.width, tol)
    return TriMesh(nodes, elements, np.concatenate(thick), node_sets, element_sets,
                   panel=np.concatenate(panel_id), target_edge=target_edge)


def build_mesh(spec, target_edge: float = DEFAULT_TARGET_EDGE) -> TriMesh:
    if isinstance(spec, SllSpec):
        return build_sll_mesh(spec, target_edge)
    if isinstance(spec, TrlSpec):
        return build_trl_mesh(spec, target_edge)
    raise InvalidInputError(f"cannot mesh {type(spec).__name__}")


@dataclass(frozen=True)
class DefectReport:
    kind: str
    detail: str
    elements: tuple = ()
    nodes: tuple = ()

    def __str__(self):
        return f"{self.kind}: {self.detail}"


def validate_mesh(m: TriMesh, area_tol: float = 1e-12) -> list[DefectReport]:
    """Lint a mesh. Returns an empty list when every invariant holds; never raises."""
    defects: list[DefectReport] = []
    try:
        nodes = np.asarray(m.nodes, dtype=float)
        elements = np.asarray(m.elements, dtype=np.int64)
    except Exception as exc:  # malformed arrays are themselves a defect
        return [DefectReport("malformed", str(exc))]
    n = len(nodes)
    if elements.ndim != 2 or (len(elements) and elements.shape[1] != 3):
        return [DefectReport("malformed", f"elements have shape {elements.shape}")]

    in_range = ((elements >= 0) & (elements < n)).all(axis=1)
    for e in np.flatnonzero(~in_range):
        defects.append(DefectReport("index_out_of_range", f"element {e} -> {elements[e].tolist()}", (int(e),)))
    distinct = ((elements[:, 0] != elements[:, 1]) & (elements[:, 1] != elements[:, 2])
                & (elements[:, 0] != elements[:, 2]))
    for e in np.flatnonzero(~distinct):
        defects.append(DefectReport("repeated_node", f"element {e} -> {elements[e].tolist()}", (int(e),)))
    ok = in_range & distinct
    good = elements[ok]
    good_ids = np.flatnonzero(ok)

    if len(good):
        p = nodes[good]
        area = 0.5 * np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)
        scale = max(float(np.ptp(nodes, axis=0).max()), 1e-300) if n else 1.0
        for e in good_ids[area <= area_tol * scale**2]:
            defects.append(DefectReport("zero_area", f"element {e} has zero area", (int(e),)))

    used = np.zeros(n, dtype=bool)
    used[good.ravel()] = True
    for v in np.flatnonzero(~used):
        defects.append(DefectReport("dangling_node", f"node {v} is not referenced", nodes=(int(v),)))

    # edge incidence and per-panel orientation
    panel = np.asarray(m.panel if m.panel is not None else np.zeros(len(elements)), dtype=np.int64)
    edge_uses: dict = {}
    for e, tri in zip(good_ids, good):
        for k in range(3):
            a, b = int(tri[k]), int(tri[(k + 1) % 3])
            edge_uses.setdefault((min(a, b), max(a, b)), []).append((int(e), a < b))
    for (a, b), uses in edge_uses.items():
        if len(uses) > 2:
            defects.append(DefectReport(
                "non_manifold_edge", f"edge ({a}, {b}) is shared by {len(uses)} elements",
                tuple(u[0] for u in uses), (a, b)))
        elif len(uses) == 2:
            (e1, d1), (e2, d2) = uses
            if panel[e1] == panel[e2] and d1 == d2:
                defects.append(DefectReport(
                    "inconsistent_winding",
                    f"elements {e1} and {e2} traverse edge ({a}, {b}) in the same direction",
                    (e1, e2), (a, b)))

    fixed = set(np.asarray(m.node_sets.get("fixed_edge", []), dtype=np.int64).tolist())
    load = set(np.asarray(m.node_sets.get("load_edge", []), dtype=np.int64).tolist())
    if not fixed:
        defects.append(DefectReport("node_set", "fixed_edge is empty"))
    if not load:
        defects.append(DefectReport("node_set", "load_edge is empty"))
    if fixed & load:
        defects.append(DefectReport("node_set", "fixed_edge and load_edge overlap",
                                    nodes=tuple(sorted(fixed & load))))
    return defects


# ---------------------------------------------------------------------------
# STL

def stl_solid_faces(m: TriMesh, extrude: float) -> np.ndarray:
    """Thicken every element into a closed triangular prism.

    Each element becomes two caps and three side quads (two triangles each),
    offset by ``extrude / 2`` either side of the midsurface. Faces are wound
    so the right-hand normal points out of the prism. Returns (n, 3, 3).
    """
    if not (extrude > 0):
        raise InvalidInputError(f"extrude must be > 0, got {extrude}")
    p = m.nodes[m.elements]
    n = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    n /= np.linalg.norm(n, axis=1)[:, None]
    top = p + 0.5 * extrude * n[:, None, :]
    bot = p - 0.5 * extrude * n[:, None, :]
    faces = [top, bot[:, ::-1]]
    for i in range(3):
        j = (i + 1) % 3
        faces.append(np.stack([bot[:, i], bot[:, j], top[:, j]], axis=1))
        faces.append(np.stack([bot[:, i], top[:, j], top[:, i]], axis=1))
    # interleave per element so each prism's faces are contiguous
    return np.stack(faces, axis=1).reshape(-1, 3, 3)


_STL_DTYPE = np.dtype([("normal", "<f4", 3), ("v", "<f4", (3, 3)), ("attr", "<u2")])


def export_stl(m: TriMesh, extrude: float, header: bytes = b"trlsim binary STL") -> bytes:
    """Binary little-endian STL of the thickened mesh.

    Refuses meshes that fail ``validate_mesh``.
    """
    defects = validate_mesh(m)
    if defects:
        raise InvalidInputError("mesh has defects: " + "; ".join(map(str, defects[:10])))
    faces = stl_solid_faces(m, extrude)
    normals = np.cross(faces[:, 1] - faces[:, 0], faces[:, 2] - faces[:, 0])
    normals /= np.linalg.norm(normals, axis=1)[:, None]
    rec = np.zeros(len(faces), dtype=_STL_DTYPE)
    rec["normal"] = normals
    rec["v"] = faces
    head = header[:80].ljust(80, b"\0")
    return head + struct.pack("<I", len(faces)) + rec.tobytes()


def read_stl(data: bytes) -> tuple[np.ndarray, np.ndarray]:
    """Parse binary STL bytes into (normals (n,3), triangles (n,3,3))."""
    if len(data) < 84:
        raise InvalidInputError("STL data shorter than the 84-byte preamble")
    (count,) = struct.unpack_from("<I", data, 80)
    if len(data) != 84 + 50 * count:
        raise InvalidInputError(f"STL size {len(data)} does not match {count} triangles")
    rec = np.frombuffer(data, dtype=_STL_DTYPE, count=count, offset=84)
    return rec["normal"].astype(float), rec["v"].astype(float)


def stl_enclosed_volume(triangles: np.ndarray) -> float:
    """Signed volume by the divergence theorem (positive for outward winding)."""
    t = np.asarray(triangles, dtype=float)
    return float(np.einsum("ij,ij->i", t[:, 0], np.cross(t[:, 1], t[:, 2])).sum() / 6.0)


def mesh_to_json(m: TriMesh) -> str:
    payload = {
        "units": "mm",
        "nodes": m.nodes.tolist(),
        "elements": m.elements.tolist(),
        "thickness_mm": m.thickness.tolist(),
        "panel": m.panel.tolist(),
        "node_sets": {k: np.asarray(v).tolist() for k, v in m.node_sets.items()},
        "element_sets": {k: np.asarray(v).tolist() for k, v in m.element_sets.items()},
    }
    return json.dumps(payload)
