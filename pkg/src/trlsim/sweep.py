"""Parameter sweeps over strip thickness and triangle count.

Every design point is meshed, refined until converged under both reference
loads, and reduced to one table row. Failed points keep their row with a
status instead of aborting the sweep.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from .errors import ConvergenceError, InvalidInputError, TrlsimError
from .fea.core import (DEFAULT_MAX_DOF, LoadCase, converge_many,
                       rotational_stiffness)
from .geometry import DEFAULT_TARGET_EDGE, SllSpec, TrlSpec
from .materials import PA6, Material

__all__ = [
    "Family",
    "SweepPlan",
    "SweepRow",
    "SweepTable",
    "run_sweep",
    "swoosh_check",
    "SwooshReport",
    "Objective",
    "DesignChoice",
    "select_design",
    "compare_families",
    "FamilyComparison",
    "svg_line_plot",
    "CSV_COLUMNS",
]

CSV_COLUMNS = ("family", "param", "in_plane_mm", "angular_deg", "kappa_Nmm_per_rad", "scf", "dof", "status")

SLL_DEFAULT_GRID = tuple(round(0.3 + 0.1 * i, 10) for i in range(8))
TRL_DEFAULT_GRID = tuple(range(2, 31))

# reference loads: 0.01 N tip force for both; 0.5 N*mm twist on bare strips and
# 5 N*mm on triangulated layers
DEFAULT_FORCE = 0.01
DEFAULT_MOMENT = {"SLL": 0.5, "TRL": 5.0}
# triangulated layers converge slowly at fold corners; 5 % keeps a full sweep
# within a quarter hour on one core
DEFAULT_TOLERANCE = {"SLL": 0.01, "TRL": 0.05}


class Family(str, Enum):
    SLL = "SLL"
    TRL = "TRL"


@dataclass(frozen=True)
class SweepPlan:
    """What to sweep and how.

    ``grid`` holds thicknesses [mm] for SLL plans and triangle counts for TRL
    plans. ``spec_kw`` are extra fixed spec fields (length, width, ...).
    """

    family: Family
    grid: tuple | None = None
    force: float = DEFAULT_FORCE  # N
    moment: float | None = None  # N*mm
    material: Material = PA6
    tolerance: float | None = None
    parallelism: int = 1
    target_edge: float = DEFAULT_TARGET_EDGE  # mm, starting level
    max_dof: int = DEFAULT_MAX_DOF
    spec_kw: dict = field(default_factory=dict)

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        grid = self.grid
        if grid is None:
            grid = SLL_DEFAULT_GRID if fam is Family.SLL else TRL_DEFAULT_GRID
        grid = tuple(grid)
        if len(grid) == 0:
            raise InvalidInputError("sweep grid is empty")
        if fam is Family.TRL:
            if any(float(g) != int(g) for g in grid):
                raise InvalidInputError("triangle counts must be integers")
            grid = tuple(int(g) for g in grid)
        else:
            grid = tuple(float(g) for g in grid)
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise InvalidInputError(f"sweep grid must be strictly increasing, got {grid}")
        object.__setattr__(self, "grid", grid)
        if self.moment is None:
            object.__setattr__(self, "moment", DEFAULT_MOMENT[fam.value])
        if self.tolerance is None:
            object.__setattr__(self, "tolerance", DEFAULT_TOLERANCE[fam.value])
        if not (0 < self.tolerance <= 0.1):
            raise InvalidInputError(f"tolerance must be in (0, 0.1], got {self.tolerance}")
        if int(self.parallelism) < 1:
            raise InvalidInputError("parallelism must be >= 1")
        if not (self.target_edge > 0):
            raise InvalidInputError("target_edge must be > 0")

    def spec_for(self, param):
        if self.family is Family.SLL:
            return SllSpec(thickness=param, **self.spec_kw)
        return TrlSpec(triangle_count=param, **self.spec_kw)

    def provenance(self) -> dict:
        return {
            "family": self.family.value,
            "force_N": self.force,
            "moment_Nmm": self.moment,
            "tolerance": self.tolerance,
            "start_target_edge_mm": self.target_edge,
            "max_dof": self.max_dof,
            "material": self.material.to_dict(),
            "spec": dict(self.spec_kw),
        }


@dataclass
class SweepRow:
    family: str
    param: float
    in_plane_mm: float = math.nan
    angular_deg: float = math.nan
    kappa_Nmm_per_rad: float = math.nan
    scf: float = math.nan
    dof: int = 0
    status: str = "ok"
    level: int = -1
    target_edge_mm: float = math.nan
    tolerance: float = math.nan
    message: str = ""
    history: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def csv_values(self):
        return [self.family, _fmt(self.param), _fmt(self.in_plane_mm), _fmt(self.angular_deg),
                _fmt(self.kappa_Nmm_per_rad), _fmt(self.scf), str(self.dof), self.status]

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("seconds")
        d["history"] = [{k: v for k, v in h.items() if k != "seconds"} for h in self.history]
        return _clean(d)


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return repr(float(v))


def _clean(obj):
    """JSON-safe copy: NaN -> None, numpy scalars -> python."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


@dataclass
class SweepTable:
    family: str
    rows: list
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rows = sorted(self.rows, key=lambda r: r.param)

    @property
    def params(self):
        return [r.param for r in self.rows]

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def row(self, param) -> SweepRow:
        for r in self.rows:
            if r.param == param:
                return r
        raise KeyError(param)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow(r.csv_values())
        return buf.getvalue()

    def to_json(self, indent=2) -> str:
        payload = {"family": self.family, "provenance": _clean(self.provenance),
                   "columns": list(CSV_COLUMNS), "rows": [r.to_dict() for r in self.rows]}
        return json.dumps(payload, indent=indent, sort_keys=True)

    def timings(self) -> dict:
        return {_fmt(r.param): r.seconds for r in self.rows}

    @classmethod
    def from_json(cls, text: str) -> "SweepTable":
        d = json.loads(text)
        rows = []
        for r in d["rows"]:
            r = {k: (math.nan if v is None and k in _FLOAT_FIELDS else v) for k, v in r.items()}
            rows.append(SweepRow(**r))
        return cls(d["family"], rows, d.get("provenance", {}))


_FLOAT_FIELDS = {"in_plane_mm", "angular_deg", "kappa_Nmm_per_rad", "scf", "target_edge_mm", "tolerance"}


def _evaluate(plan: SweepPlan, param) -> SweepRow:
    """One design point; never raises for modelling failures."""
    row = SweepRow(plan.family.value, param, tolerance=plan.tolerance)
    t0 = time.perf_counter()
    loads = [LoadCase.tip_force(plan.force), LoadCase.torsion(plan.moment)]
    try:
        spec = plan.spec_for(param)
        rf, rt = converge_many(spec, loads, plan.tolerance, material=plan.material,
                               target_edge=plan.target_edge, max_dof=plan.max_dof)
        row.in_plane_mm = rf.tip_inplane_displacement
        row.angular_deg = rt.angular_displacement
        row.kappa_Nmm_per_rad = rt.rotational_stiffness if rt.rotational_stiffness is not None else math.nan
        scf = rt.stress_concentration_factor
        row.scf = scf if scf is not None else math.nan
        row.dof = rt.n_dof
        row.history = rt.history
        row.level = rt.history[-1]["level"]
        row.target_edge_mm = rt.history[-1]["target_edge_mm"]
    except ConvergenceError as exc:
        # keep the finest level reached so the trend is still visible
        row.status = "not_converged"
        row.message = str(exc)
        row.history = list(exc.history)
        if exc.history:
            last = exc.history[-1]
            row.in_plane_mm, row.angular_deg = last["values"]
            row.dof = last["dof"]
            row.level = last["level"]
            row.target_edge_mm = last["target_edge_mm"]
            if row.angular_deg > 0:
                row.kappa_Nmm_per_rad = rotational_stiffness(plan.moment, row.angular_deg)
    except TrlsimError as exc:
        row.status = "failed"
        row.message = f"{type(exc).__name__}: {exc}"
    row.seconds = time.perf_counter() - t0
    return row


def _evaluate_star(args):
    import warnings
    warnings.simplefilter("ignore")
    return _evaluate(*args)


def run_sweep(plan: SweepPlan, progress=None) -> SweepTable:
    """Evaluate every grid point; output order never depends on scheduling."""
    n = int(plan.parallelism)
    work = [(plan, p) for p in plan.grid]
    rows = []
    if n == 1:
        for item in work:
            rows.append(_evaluate(*item))
            if progress:
                progress(rows[-1])
    else:
        with ProcessPoolExecutor(max_workers=n) as ex:
            for row in ex.map(_evaluate_star, work):
                rows.append(row)
                if progress:
                    progress(row)
    return SweepTable(plan.family.value, rows, plan.provenance())


# -- shape analysis ---------------------------------------------------------

@dataclass(frozen=True)
class MetricShape:
    metric: str
    endpoints_are_maxima: bool
    left_endpoint_local_max: bool
    right_endpoint_local_max: bool
    interior_minimum: bool
    minimum_index: int | None
    minimum_param: float | None
    minimum_value: float | None

    def describe(self) -> str:
        where = (f"interior minimum {self.minimum_value:.4g} at {self.minimum_param}"
                 if self.interior_minimum else "no interior minimum")
        ends = "endpoints are maxima" if self.endpoints_are_maxima else "endpoints are not both maxima"
        return f"{self.metric}: {ends}; {where}"


@dataclass(frozen=True)
class SwooshReport:
    in_plane: MetricShape
    angular: MetricShape

    @property
    def is_swoosh(self) -> bool:
        return all(m.endpoints_are_maxima and m.interior_minimum for m in (self.in_plane, self.angular))

    def to_dict(self) -> dict:
        return _clean({"in_plane": asdict(self.in_plane), "angular": asdict(self.angular),
                       "is_swoosh": self.is_swoosh})

    def describe(self) -> str:
        return self.in_plane.describe() + "\n" + self.angular.describe()


def _shape(metric, params, values) -> MetricShape:
    v = np.asarray(values, dtype=float)
    k = int(np.nanargmin(v))
    interior = 0 < k < len(v) - 1
    # each end only has to beat its neighbour: local maxima, as in a swoosh
    left, right = bool(v[0] > v[1]), bool(v[-1] > v[-2])
    return MetricShape(
        metric=metric,
        endpoints_are_maxima=left and right,
        left_endpoint_local_max=left,
        right_endpoint_local_max=right,
        interior_minimum=interior,
        minimum_index=k if interior else None,
        minimum_param=params[k] if interior else None,
        minimum_value=float(v[k]) if interior else None,
    )


def swoosh_check(table: SweepTable) -> SwooshReport:
    """Do both curves have maxima at the ends and a minimum inside?"""
    if len(table.rows) < 3:
        raise InvalidInputError(f"shape check needs at least 3 grid points, got {len(table.rows)}")
    params = table.params
    return SwooshReport(_shape("in_plane_mm", params, table.column("in_plane_mm")),
                        _shape("angular_deg", params, table.column("angular_deg")))


# -- design selection -------------------------------------------------------

class Objective(str, Enum):
    MAX_IN_PLANE = "MaxInPlane"
    MAX_TORSION_RESISTANCE = "MaxTorsionResistance"
    CYCLIC_LIFE = "CyclicLife"


@dataclass(frozen=True)
class DesignChoice:
    objective: Objective
    param: float
    rationale: str

    def to_dict(self):
        return {"objective": self.objective.value, "param": self.param, "rationale": self.rationale}


def _pick(rows, key, largest):
    """Best row by ``key``; ties go to the larger parameter."""
    vals = [key(r) for r in rows]
    best = max(vals) if largest else min(vals)
    return max((r for r, v in zip(rows, vals) if v == best), key=lambda r: r.param)


def select_design(table: SweepTable, objective, threshold: float = 0.15,
                  reference_angular: float | None = None) -> DesignChoice:
    """Pick a design for one objective.

    CyclicLife takes the lowest stress concentration among designs whose
    angular displacement is close to the best one. Without a reference, close
    means within ``threshold`` of the best value; with ``reference_angular``
    (the untriangulated strip under the same moment) it means within
    ``threshold`` of the improvement the triangles bring.
    """
    objective = Objective(objective)
    if not (threshold >= 0):
        raise InvalidInputError("threshold must be >= 0")
    rows = [r for r in table.rows if r.ok and np.isfinite(r.in_plane_mm) and np.isfinite(r.angular_deg)]
    if not rows:
        raise InvalidInputError("no successful rows to select from")
    if objective is Objective.MAX_IN_PLANE:
        r = _pick(rows, lambda r: r.in_plane_mm, largest=True)
        why = f"largest in-plane displacement {r.in_plane_mm:.4g} mm"
        return DesignChoice(objective, r.param, why)
    best = _pick(rows, lambda r: r.angular_deg, largest=False)
    if objective is Objective.MAX_TORSION_RESISTANCE:
        why = f"smallest angular displacement {best.angular_deg:.4g} deg"
        return DesignChoice(objective, best.param, why)
    if reference_angular is None:
        allowance = threshold * best.angular_deg
        basis = f"{threshold:.0%} of the best"
    else:
        gain = reference_angular - best.angular_deg
        if gain <= 0:
            raise InvalidInputError("reference angular displacement must exceed the best design's")
        allowance = threshold * gain
        basis = f"{threshold:.0%} of the {gain:.4g} deg gained over the reference"
    pool = [r for r in rows if r.angular_deg <= best.angular_deg + allowance and np.isfinite(r.scf)]
    r = _pick(pool, lambda r: r.scf, largest=False)
    why = (f"lowest stress concentration {r.scf:.4g} among {len(pool)} designs within {basis} "
           f"(angular {r.angular_deg:.4g} deg vs best {best.angular_deg:.4g} deg)")
    return DesignChoice(objective, r.param, why)


# -- family comparison ------------------------------------------------------

@dataclass(frozen=True)
class FamilyComparison:
    kappa_ratio: float
    angular_reduction_pct: float

    def to_dict(self):
        return asdict(self)


def compare_families(sll_kappa: float, trl_kappa: float) -> FamilyComparison:
    """Stiffness ratio and the drop in twist per unit moment, TRL over SLL.

    Both stiffnesses are per radian, so rows computed at different reference
    moments compare directly.
    """
    if not (sll_kappa > 0 and trl_kappa > 0):
        raise InvalidInputError("stiffnesses must be > 0")
    ratio = trl_kappa / sll_kappa
    return FamilyComparison(ratio, 100.0 * (1.0 - sll_kappa / trl_kappa))


# -- plots ------------------------------------------------------------------

def _ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.floor(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-9 * step:
        out.append(round(v, 12))
        v += step
    return out


def svg_line_plot(x, y, title="", xlabel="", ylabel="", width=480, height=320) -> str:
    """Minimal SVG polyline plot with axes, ticks and labels."""
    x = [float(v) for v in x]
    y = [float(v) for v in y]
    pts = [(a, b) for a, b in zip(x, y) if math.isfinite(b)]
    ml, mr, mt, mb = 60, 20, 30, 45
    pw, ph = width - ml - mr, height - mt - mb
    xt = _ticks(min(x), max(x))
    yv = [b for _, b in pts] or [0.0, 1.0]
    yt = _ticks(min(0.0, min(yv)), max(yv))
    x0, x1 = xt[0], xt[-1]
    y0, y1 = yt[0], yt[-1]

    def sx(v):
        return ml + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return mt + ph - (v - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" font-size="13">{_esc(title)}</text>',
           f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>',
           f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="black"/>']
    for v in xt:
        out.append(f'<line x1="{sx(v):.2f}" y1="{mt + ph}" x2="{sx(v):.2f}" y2="{mt + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{sx(v):.2f}" y="{mt + ph + 16}" text-anchor="middle">{v:g}</text>')
    for v in yt:
        out.append(f'<line x1="{ml - 4}" y1="{sy(v):.2f}" x2="{ml}" y2="{sy(v):.2f}" stroke="black"/>')
        out.append(f'<text x="{ml - 6}" y="{sy(v) + 4:.2f}" text-anchor="end">{v:g}</text>')
    out.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 8}" text-anchor="middle">{_esc(xlabel)}</text>')
    out.append(f'<text x="14" y="{mt + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 14 {mt + ph / 2:.1f})">{_esc(ylabel)}</text>')
    if pts:
        poly = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in pts)
        out.append(f'<polyline points="{poly}" fill="none" stroke="#1f4e9c" stroke-width="1.5"/>')
        for a, b in pts:
            out.append(f'<circle cx="{sx(a):.2f}" cy="{sy(b):.2f}" r="2.5" fill="#1f4e9c"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(s):
    return str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def sweep_plots(table: SweepTable) -> dict:
    """The two study curves as SVG strings keyed by file stem."""
    xl = "number of triangles" if table.family == "TRL" else "thickness [mm]"
    p = table.params
    return {
        "in_plane": svg_line_plot(p, table.column("in_plane_mm"), "In-plane displacement", xl, "displacement [mm]"),
        "angular": svg_line_plot(p, table.column("angular_deg"), "Angular displacement", xl, "angle [deg]"),
    }
