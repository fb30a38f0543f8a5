"""Linear-elastic facet-shell analysis of a ``TriMesh``.

Meshes and reported quantities are in mm, N, N*mm and degrees. Assembly and
solution run in SI (m, N, Pa); conversion happens only at the edges of this
module.
"""

from __future__ import annotations

import enum
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import ConvergenceError, InvalidInputError, SolverError, StructuralMechanismError
from ..geometry import DEFAULT_TARGET_EDGE, TriMesh, build_mesh
from ..materials import Material
from . import kernels

__all__ = [
    "LoadKind",
    "LoadCase",
    "StiffnessSystem",
    "Factorization",
    "FeaResult",
    "assemble",
    "factorize",
    "load_vector",
    "solve",
    "solve_many",
    "extract_beta",
    "rotational_stiffness",
    "stress_concentration",
    "scf_from_field",
    "converge",
    "converge_many",
    "result_to_json",
    "result_to_vtk",
    "DEFAULT_DRILL_RATIO",
    "DEFAULT_CG_THRESHOLD",
]

MM = 1e-3
DOF_PER_NODE = 6
DEFAULT_DRILL_RATIO = 1e-3
DEFAULT_CG_THRESHOLD = 1_500_000
DEFAULT_MAX_DOF = 1_500_000


class LoadKind(str, enum.Enum):
    IN_PLANE_TIP_FORCE = "InPlaneTipForce"
    TIP_TORSION_MOMENT = "TipTorsionMoment"


@dataclass(frozen=True)
class LoadCase:
    """A tip force [N] or a tip torque about the length axis [N*mm]."""

    kind: LoadKind
    magnitude: float

    def __post_init__(self):
        object.__setattr__(self, "kind", LoadKind(self.kind))
        if not math.isfinite(self.magnitude):
            raise InvalidInputError(f"load magnitude must be finite, got {self.magnitude}")

    @classmethod
    def tip_force(cls, newtons: float = 0.01) -> "LoadCase":
        return cls(LoadKind.IN_PLANE_TIP_FORCE, newtons)

    @classmethod
    def torsion(cls, newton_mm: float = 5.0) -> "LoadCase":
        return cls(LoadKind.TIP_TORSION_MOMENT, newton_mm)

    def scaled(self, factor: float) -> "LoadCase":
        return LoadCase(self.kind, self.magnitude * factor)

    @property
    def units(self) -> str:
        return "N" if self.kind is LoadKind.IN_PLANE_TIP_FORCE else "N*mm"


@dataclass
class StiffnessSystem:
    mesh: TriMesh
    material: Material
    K: sp.csr_matrix  # SI
    drill_ratio: float
    membrane: str = "allman"

    @property
    def n_dof(self) -> int:
        return self.K.shape[0]


def _element_dofs(elements):
    base = DOF_PER_NODE * elements[:, :, None] + np.arange(DOF_PER_NODE)
    return base.reshape(len(elements), 3 * DOF_PER_NODE)


def assemble(mesh: TriMesh, mat: Material, drill_ratio: float = DEFAULT_DRILL_RATIO,
             membrane: str = "allman") -> StiffnessSystem:
    """Global sparse stiffness over 6 dof per node.

    ``membrane`` selects the in-plane formulation ("allman" or "cst"). Element matrices are symmetrized and summed in element order so the result
    is reproducible bit for bit.
    """
    areas = mesh.element_areas()
    scale = float(np.ptp(mesh.nodes, axis=0).max()) if mesh.n_nodes else 1.0
    bad = np.flatnonzero(~(areas > 1e-12 * scale**2))
    if len(bad):
        raise InvalidInputError(f"element {int(bad[0])} has degenerate geometry (area {areas[bad[0]]:.3g} mm^2)")
    if mesh.n_elements and (mesh.elements.max() >= mesh.n_nodes or mesh.elements.min() < 0):
        raise InvalidInputError("element references a missing node")
    coords = mesh.nodes[mesh.elements] * MM
    ke = kernels.element_stiffness(coords, mesh.thickness * MM, mat.youngs_modulus,
                                   mat.poisson_ratio, drill_ratio, membrane)
    ke = 0.5 * (ke + ke.transpose(0, 2, 1))
    dofs = _element_dofs(mesh.elements)
    rows = np.repeat(dofs, 18, axis=1).ravel()
    cols = np.tile(dofs, (1, 18)).ravel()
    n = DOF_PER_NODE * mesh.n_nodes
    K = sp.coo_matrix((ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    K.sum_duplicates()
    return StiffnessSystem(mesh, mat, K, drill_ratio, membrane)


def _edge_weights(mesh: TriMesh, ids):
    """Tributary length [mm] of each node along a straight transverse edge."""
    y = mesh.nodes[ids, 1]
    order = np.argsort(y, kind="stable")
    ys = y[order]
    w = np.zeros(len(ids))
    if len(ids) == 1:
        w[:] = 1.0
        return w
    seg = np.diff(ys)
    ws = np.zeros(len(ids))
    ws[:-1] += 0.5 * seg
    ws[1:] += 0.5 * seg
    if ws.sum() <= 0:
        ws[:] = 1.0
    w[order] = ws
    return w


def load_vector(system: StiffnessSystem, load: LoadCase, load_set: str = "load_edge") -> np.ndarray:
    """Nodal force vector in SI for a load case.

    The tip force acts along +z, shared over the loaded edge in proportion to
    tributary length. The torque is a linear distribution of z-forces across
    the edge with zero resultant and moment ``magnitude`` about the length axis.
    """
    mesh = system.mesh
    ids = np.asarray(mesh.node_sets[load_set], dtype=np.int64)
    if len(ids) == 0:
        raise InvalidInputError(f"node set {load_set!r} is empty")
    f = np.zeros(system.n_dof)
    w = _edge_weights(mesh, ids)
    if load.kind is LoadKind.IN_PLANE_TIP_FORCE:
        fz = load.magnitude * w / w.sum()
    else:
        y = mesh.nodes[ids, 1]
        yc = y - np.dot(w, y) / w.sum()
        denom = np.dot(w, yc * yc)
        if denom <= 0:
            raise InvalidInputError("loaded edge has no lever arm for a torque")
        fz = load.magnitude * w * yc / denom
    np.add.at(f, DOF_PER_NODE * ids + 2, fz)
    return f


def _fixed_dofs(mesh: TriMesh, fixed):
    if fixed is None:
        fixed = mesh.node_sets["fixed_edge"]
    if isinstance(fixed, str):
        fixed = mesh.node_sets[fixed]
    fixed = np.asarray(fixed, dtype=np.int64)
    if len(fixed) == 0:
        raise InvalidInputError("at least one node must be fixed")
    return (DOF_PER_NODE * fixed[:, None] + np.arange(DOF_PER_NODE)).ravel()


class Factorization:
    """Reduced (clamped) system ready for repeated right-hand sides.

    Small systems are diagonally equilibrated, factorized with SuperLU in
    symmetric mode and checked for positive pivots. Above ``cg_threshold`` free dofs, a Jacobi-preconditioned
    conjugate gradient solve is used instead.
    """

    def __init__(self, system: StiffnessSystem, fixed=None, cg_threshold=DEFAULT_CG_THRESHOLD,
                 cg_rtol=1e-11, cg_maxiter=None):
        self.system = system
        n = system.n_dof
        fixed_dofs = np.unique(_fixed_dofs(system.mesh, fixed))
        free = np.ones(n, dtype=bool)
        free[fixed_dofs] = False
        self.free = np.flatnonzero(free)
        self.Kff = system.K[self.free][:, self.free].tocsc()
        self.n_free = len(self.free)
        self.cg_rtol = cg_rtol
        self.cg_maxiter = cg_maxiter
        self.method = "cg" if self.n_free > cg_threshold else "direct"
        self._lu = None
        if self.method == "direct":
            self._factor()
        else:
            d = self.Kff.diagonal()
            if np.any(d <= 0):
                raise StructuralMechanismError("non-positive stiffness on the diagonal")
            self._inv_diag = 1.0 / d

    def _factor(self):
        d = self.Kff.diagonal()
        if np.any(d <= 0):
            raise StructuralMechanismError("non-positive stiffness on the diagonal")
        # translations and rotations carry different units; factor D K D with a
        # unit diagonal so round-off is shared evenly between them
        self._scale = 1.0 / np.sqrt(d)
        D = sp.diags(self._scale)
        try:
            lu = spla.splu((D @ self.Kff @ D).tocsc(), permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                           options={"SymmetricMode": True})
        except RuntimeError as exc:
            raise StructuralMechanismError(f"stiffness matrix is singular: {exc}") from exc
        pivots = lu.U.diagonal()
        if np.array_equal(lu.perm_r, lu.perm_c):
            # symmetric permutation -> U's diagonal is the LDL^T pivot sequence
            if np.any(pivots <= 1e-12):
                raise StructuralMechanismError(
                    f"reduced stiffness is not positive definite (relative pivot {pivots.min():.3g})")
        elif np.any(np.abs(pivots) <= 1e-12):
            raise StructuralMechanismError("reduced stiffness is numerically singular")
        self._lu = lu

    def solve(self, f: np.ndarray) -> tuple[np.ndarray, dict]:
        ff = f[self.free]
        diag = {"method": self.method, "n_free_dof": self.n_free}
        if not np.any(ff):
            u = np.zeros_like(f)
            diag["residual_norm"] = 0.0
            return u, diag
        if self.method == "direct":
            uf = self._scale * self._lu.solve(self._scale * ff)
        else:
            M = spla.LinearOperator(self.Kff.shape, matvec=lambda x: self._inv_diag * x)
            iters = []
            uf, info = spla.cg(self.Kff, ff, rtol=self.cg_rtol, maxiter=self.cg_maxiter, M=M,
                               callback=lambda xk: iters.append(1))
            diag["iterations"] = len(iters)
            if info != 0:
                raise ConvergenceError(f"conjugate gradient did not converge (info={info})", [diag])
        r = self.Kff @ uf - ff
        diag["residual_norm"] = float(np.linalg.norm(r) / np.linalg.norm(ff))
        energy = float(uf @ ff)
        if energy <= 0:
            raise StructuralMechanismError("load produced non-positive strain energy")
        u = np.zeros_like(f)
        u[self.free] = uf
        return u, diag


def factorize(system: StiffnessSystem, fixed=None, **kw) -> Factorization:
    return Factorization(system, fixed, **kw)


@dataclass
class FeaResult:
    """Fields and scalars from one load case.

    ``displacements`` is (n_nodes, 6): three translations [mm] then three
    rotations [rad]. Stresses are element von Mises values [Pa].
    """

    load: LoadCase
    displacements: np.ndarray
    von_mises: np.ndarray
    tip_inplane_displacement: float
    angular_displacement: float
    rotational_stiffness: float | None
    stress_concentration_factor: float | None
    strain_energy: float  # J
    n_dof: int
    residual_norm: float
    solver: str
    mesh: TriMesh = field(repr=False)
    history: list = field(default_factory=list)

    @property
    def beta(self) -> float:
        return self.angular_displacement

    @property
    def kappa(self) -> float | None:
        return self.rotational_stiffness

    def scalars(self) -> dict:
        return {
            "load_kind": self.load.kind.value,
            "load_magnitude": self.load.magnitude,
            "load_units": self.load.units,
            "tip_inplane_displacement_mm": self.tip_inplane_displacement,
            "angular_displacement_deg": self.angular_displacement,
            "rotational_stiffness_Nmm_per_rad": self.rotational_stiffness,
            "stress_concentration_factor": self.stress_concentration_factor,
            "max_von_mises_Pa": float(self.von_mises.max()) if len(self.von_mises) else 0.0,
            "strain_energy_J": self.strain_energy,
            "dof": self.n_dof,
            "residual_norm": self.residual_norm,
            "solver": self.solver,
            "target_edge_mm": self.mesh.target_edge,
        }


def extract_beta(result: FeaResult, A: int | None = None, B: int | None = None) -> float:
    """Tip rotation [deg] from the out-of-plane offset between two tip nodes.

    ``BC`` is the difference of the two nodes' z-displacements and ``AB`` their
    undeformed separation; returns asin(BC / sqrt(AB^2 + BC^2)).
    """
    mesh = result.mesh
    A = mesh.node("tip_center_A") if A is None else int(A)
    B = mesh.node("tip_edge_B") if B is None else int(B)
    ab = float(np.linalg.norm(mesh.nodes[B] - mesh.nodes[A]))
    if ab <= 0:
        raise InvalidInputError("tip nodes A and B coincide")
    bc = abs(float(result.displacements[B, 2] - result.displacements[A, 2]))
    return _beta_from_offsets(ab, bc)


def _beta_from_offsets(ab, bc):
    return math.degrees(math.asin(bc / math.hypot(ab, bc)))


def rotational_stiffness(moment: float, beta: float) -> float:
    """Moment [N*mm] over rotation given in degrees, as N*mm/rad."""
    if not (beta > 0):
        raise InvalidInputError(f"rotation must be positive, got {beta}")
    return moment / math.radians(beta)


def scf_from_field(stress, exclude=None) -> float:
    """max / median of a stress field, optionally skipping masked entries."""
    s = np.asarray(stress, dtype=float)
    if exclude is not None and len(exclude):
        keep = np.ones(len(s), dtype=bool)
        keep[np.asarray(exclude, dtype=np.int64)] = False
        s = s[keep]
    if s.size == 0:
        raise InvalidInputError("empty stress field")
    med = float(np.median(s))
    if med <= 0:
        raise InvalidInputError("median stress is zero; concentration factor undefined")
    return float(s.max()) / med


def stress_concentration(result: FeaResult) -> float:
    """Peak over median von Mises stress, skipping elements that touch the loaded edge."""
    return scf_from_field(result.von_mises, result.mesh.element_sets.get("load_adjacent"))


def _postprocess(system, load, u, diag, f) -> FeaResult:
    mesh = system.mesh
    disp = u.reshape(-1, DOF_PER_NODE).copy()
    disp[:, :3] /= MM
    coords = mesh.nodes[mesh.elements] * MM
    ue = u[_element_dofs(mesh.elements)]
    vm, _, _ = kernels.element_stress(coords, mesh.thickness * MM, system.material.youngs_modulus,
                                      system.material.poisson_ratio, ue, system.membrane)
    a, b = mesh.node("tip_center_A"), mesh.node("tip_edge_B")
    tip = abs(float(disp[a, 2]))
    ab = float(np.linalg.norm(mesh.nodes[b] - mesh.nodes[a]))
    if ab <= 0:
        raise InvalidInputError("tip nodes A and B coincide")
    beta = _beta_from_offsets(ab, abs(float(disp[b, 2] - disp[a, 2])))
    kappa = None
    if load.kind is LoadKind.TIP_TORSION_MOMENT and beta > 0:
        kappa = rotational_stiffness(abs(load.magnitude), beta)
    try:
        scf = scf_from_field(vm, mesh.element_sets.get("load_adjacent"))
    except InvalidInputError:
        scf = None
    return FeaResult(
        load=load,
        displacements=disp,
        von_mises=vm,
        tip_inplane_displacement=tip,
        angular_displacement=beta,
        rotational_stiffness=kappa,
        stress_concentration_factor=scf,
        strain_energy=0.5 * float(u @ f),
        n_dof=diag["n_free_dof"],
        residual_norm=diag["residual_norm"],
        solver=diag["method"],
        mesh=mesh,
    )


def solve_many(system: StiffnessSystem, loads, fixed=None, factorization: Factorization | None = None,
               **kw) -> list[FeaResult]:
    """Solve several load cases against one factorization."""
    fac = factorization or Factorization(system, fixed, **kw)
    out = []
    for load in loads:
        f = load_vector(system, load)
        u, diag = fac.solve(f)
        out.append(_postprocess(system, load, u, diag, f))
    return out


def solve(system: StiffnessSystem, load: LoadCase, fixed=None, **kw) -> FeaResult:
    """Clamp ``fixed`` (default: the mesh's fixed edge), apply ``load`` and solve."""
    return solve_many(system, [load], fixed, **kw)[0]


def _monitored(result: FeaResult) -> float:
    if result.load.kind is LoadKind.IN_PLANE_TIP_FORCE:
        return result.tip_inplane_displacement
    return result.angular_displacement


def _rel_change(new, old):
    if new == old:
        return 0.0
    return abs(new - old) / max(abs(new), abs(old))


def converge_many(spec, loads, tolerance: float = 0.01, material: Material | None = None,
                  target_edge: float = DEFAULT_TARGET_EDGE, max_dof: int = DEFAULT_MAX_DOF,
                  max_levels: int = 8, drill_ratio: float = DEFAULT_DRILL_RATIO,
                  cg_threshold: int = DEFAULT_CG_THRESHOLD, membrane: str = "allman") -> list[FeaResult]:
    """Halve the mesh size until every load's monitored scalar settles.

    The monitored scalar is the tip deflection for a tip force and the tip
    rotation for a torque. At least two levels are always solved. Results for
    the finest level are returned, each carrying the full history.
    """
    if not (0 < tolerance <= 0.1):
        raise InvalidInputError(f"tolerance must be in (0, 0.1], got {tolerance}")
    if material is None:
        from ..materials import PA6 as material
    loads = list(loads)
    history = []
    previous = None
    edge = float(target_edge)
    for level in range(max_levels):
        mesh = build_mesh(spec, edge)
        n_dof = DOF_PER_NODE * mesh.n_nodes
        if n_dof > max_dof:
            raise ConvergenceError(
                f"refinement level {level} needs {n_dof} dof, above the budget of {max_dof}", history)
        t0 = time.perf_counter()
        system = assemble(mesh, material, drill_ratio, membrane)
        results = solve_many(system, loads, cg_threshold=cg_threshold)
        values = [_monitored(r) for r in results]
        entry = {
            "level": level,
            "target_edge_mm": edge,
            "n_nodes": mesh.n_nodes,
            "n_elements": mesh.n_elements,
            "dof": results[0].n_dof if results else n_dof,
            "values": values,
            "seconds": time.perf_counter() - t0,
        }
        if previous is not None:
            entry["rel_change"] = [_rel_change(v, p) for v, p in zip(values, previous)]
        history.append(entry)
        if previous is not None and all(c < tolerance for c in entry["rel_change"]):
            for r in results:
                r.history = [dict(h) for h in history]
            return results
        previous = values
        edge *= 0.5
    raise ConvergenceError(f"no convergence to {tolerance} within {max_levels} levels", history)


def converge(spec, load: LoadCase, tolerance: float = 0.01, **kw) -> FeaResult:
    """Single-load form of ``converge_many``."""
    return converge_many(spec, [load], tolerance, **kw)[0]


def result_to_json(result: FeaResult, indent=None) -> str:
    payload = {
        "scalars": result.scalars(),
        "units": {"translation": "mm", "rotation": "rad", "stress": "Pa"},
        "displacements": result.displacements.tolist(),
        "von_mises_Pa": result.von_mises.tolist(),
        "history": result.history,
    }
    return json.dumps(payload, indent=indent)


def result_to_vtk(result: FeaResult, title: str = "trlsim result") -> str:
    """Legacy ASCII VTK unstructured grid with displacement and stress fields."""
    mesh = result.mesh
    lines = ["# vtk DataFile Version 3.0", title[:255], "ASCII", "DATASET UNSTRUCTURED_GRID",
             f"POINTS {mesh.n_nodes} double"]
    lines += [f"{x:.9g} {y:.9g} {z:.9g}" for x, y, z in mesh.nodes]
    lines.append(f"CELLS {mesh.n_elements} {4 * mesh.n_elements}")
    lines += [f"3 {a} {b} {c}" for a, b, c in mesh.elements]
    lines.append(f"CELL_TYPES {mesh.n_elements}")
    lines += ["5"] * mesh.n_elements
    lines.append(f"POINT_DATA {mesh.n_nodes}")
    lines.append("VECTORS displacement_mm double")
    lines += [f"{x:.9g} {y:.9g} {z:.9g}" for x, y, z in result.displacements[:, :3]]
    lines.append(f"CELL_DATA {mesh.n_elements}")
    lines.append("SCALARS von_mises_Pa double 1")
    lines.append("LOOKUP_TABLE default")
    lines += [f"{s:.9g}" for s in result.von_mises]
    return "\n".join(lines) + "\n"
