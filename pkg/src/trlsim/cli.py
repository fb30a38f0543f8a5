"""Command-line entry point: ``trlsim <command> [options]``.

Exit codes: 0 ok, 2 configuration or input error, 3 solver error, 4 I/O error.
Errors are also written to stderr as one line of JSON.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import os
import platform
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .beams import RectSection, cantilever_tip_deflection, rect_torsion_angle
from .errors import InvalidInputError, MeshingError, SolverError, TrlsimError
from .geometry import (SllSpec, TrlSpec, TriMesh, build_mesh, export_stl, read_stl,
                       stl_enclosed_volume, validate_mesh)
from .materials import PA6, builtin_material, material_from_dict

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4
OUTPUT_DIR_ENV = "TRLSIM_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "trlsim-out"


class ConfigError(Exception):
    pass


class OutputError(Exception):
    pass


# -- parsing helpers ---------------------------------------------------------

def parse_range(text, integer=False) -> list:
    """``start:stop[:step]`` (stop inclusive) and comma lists, e.g. ``2,5,7:9``."""
    if isinstance(text, (int, float)):
        return [int(text) if integer else float(text)]
    if isinstance(text, (list, tuple)):
        out = []
        for item in text:
            out.extend(parse_range(item, integer))
        return out
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            raise ConfigError(f"empty item in range {text!r}")
        try:
            if ":" in part:
                bits = [float(b) for b in part.split(":")]
                if len(bits) not in (2, 3):
                    raise ValueError
                start, stop = bits[0], bits[1]
                step = bits[2] if len(bits) == 3 else 1.0
                if step <= 0 or stop < start:
                    raise ConfigError(f"range {part!r} must have start <= stop and step > 0")
                n = int(math.floor((stop - start) / step + 1e-9)) + 1
                out.extend(round(start + i * step, 10) for i in range(n))
            else:
                out.append(float(part))
        except ValueError:
            raise ConfigError(f"cannot parse range {part!r}; use start:stop:step or a comma list") from None
    if integer:
        if any(v != int(v) for v in out):
            raise ConfigError(f"{text!r} must contain integers")
        return [int(v) for v in out]
    return out


# config key -> (argparse dest, converter); all values carry units in the key
_COMMON_KEYS = {
    "output_dir": ("output_dir", str),
    "formats": ("formats", str),
    "material": ("material", None),
    "tolerance": ("tolerance", float),
    "target_edge_mm": ("target_edge", float),
    "length_mm": ("length", float),
    "width_mm": ("width", float),
}
_CONFIG_KEYS = {
    "sll-analyze": {**_COMMON_KEYS, "thickness_mm": ("thickness", None), "force_N": ("force", float),
                    "moment_Nmm": ("moment", float)},
    "trl-sweep": {**_COMMON_KEYS, "triangles": ("triangles", None), "force_N": ("force", float),
                  "moment_Nmm": ("moment", float), "panel_thickness_mm": ("panel_thickness", float),
                  "flange_thickness_mm": ("flange_thickness", float), "fin_height_mm": ("fin_height", float),
                  "tip_cap_height_mm": ("tip_cap_height", float), "parallelism": ("parallel", int),
                  "selection_threshold": ("threshold", float)},
    "grasp-predict": {"output_dir": ("output_dir", str), "preset": ("preset", str),
                      "normal_force_N": ("fn", float), "friction": ("mu", float),
                      "contact_radius_mm": ("r", float), "kappa_Nmm_per_rad": ("kappa", float),
                      "allowed_sag_mm": ("x", float), "shear_stress_Pa": ("tau", float),
                      "shear_fracture_Pa": ("tau_f", float), "mass_g": ("mass", float),
                      "gripper": ("gripper", str)},
    "mesh-export": {"triangles": ("triangles", int), "length_mm": ("length", float), "width_mm": ("width", float),
                    "panel_thickness_mm": ("panel_thickness", float),
                    "flange_thickness_mm": ("flange_thickness", float), "fin_height_mm": ("fin_height", float),
                    "tip_cap_height_mm": ("tip_cap_height", float), "target_edge_mm": ("target_edge", float),
                    "extrude_mm": ("extrude", float), "out": ("out", str)},
    "validate": {"triangles": ("triangles", int), "thickness_mm": ("thickness", float),
                 "target_edge_mm": ("target_edge", float), "length_mm": ("length", float),
                 "width_mm": ("width", float)},
}


def load_config(path, command) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    allowed = _CONFIG_KEYS[command]
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown config keys for {command}: {', '.join(unknown)}")
    out = {}
    for key, value in data.items():
        dest, conv = allowed[key]
        if conv is not None and value is not None:
            if isinstance(value, bool) or (conv is not str and isinstance(value, str)):
                raise ConfigError(f"{key} must be a number, got {value!r}")
            try:
                value = conv(value)
            except (TypeError, ValueError):
                raise ConfigError(f"{key} has invalid value {value!r}") from None
        out[dest] = value
    return out


def merged(args, config, name, default=None):
    """Flag beats config beats default."""
    v = getattr(args, name, None)
    if v is not None:
        return v
    v = config.get(name)
    return default if v is None else v


def resolve_material(args, config):
    base = merged(args, config, "material", "PA6")
    try:
        mat = material_from_dict(base) if isinstance(base, dict) else builtin_material(base)
    except InvalidInputError as exc:
        raise ConfigError(str(exc)) from None
    changes = {}
    if getattr(args, "youngs_modulus", None) is not None:
        changes["youngs_modulus"] = args.youngs_modulus * 1e6
    if getattr(args, "poisson", None) is not None:
        changes["poisson_ratio"] = args.poisson
    return mat.replace(**changes) if changes else mat


def output_dir(args, config) -> Path:
    d = getattr(args, "output_dir", None) or config.get("output_dir") or os.environ.get(OUTPUT_DIR_ENV) \
        or DEFAULT_OUTPUT_DIR
    p = Path(d)
    try:
        p.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create output directory {p}: {exc}") from None
    return p


def write_text(path: Path, text: str):
    try:
        path.write_text(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from None


def write_metadata(outdir: Path, command: str, argv, extra=None):
    """Sidecar with everything that varies between runs (time, host)."""
    meta = {
        "command": command,
        "argv": list(argv),
        "created_utc": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
    }
    from .fea.kernels import get_backend
    meta["kernel_backend"] = get_backend()
    if extra:
        meta.update(extra)
    write_text(outdir / f"{command}.meta.json", json.dumps(meta, indent=2, sort_keys=True) + "\n")


def formats_of(args, config):
    f = merged(args, config, "formats", "csv,json")
    items = [s.strip().lower() for s in f.split(",") if s.strip()]
    bad = sorted(set(items) - {"csv", "json"})
    if bad or not items:
        raise ConfigError(f"unknown output format(s) {bad}; use csv and/or json")
    return items


# -- commands ----------------------------------------------------------------

def cmd_sll_analyze(args, config, argv):
    from .sweep import Family, SweepPlan, run_sweep

    grid = parse_range(merged(args, config, "thickness", "0.3:1.0:0.1"))
    force = float(merged(args, config, "force", 0.01))
    moment = float(merged(args, config, "moment", 0.5))
    length = float(merged(args, config, "length", 100.0))
    width = float(merged(args, config, "width", 20.0))
    mat = resolve_material(args, config)
    try:
        plan = SweepPlan(Family.SLL, grid, force=force, moment=moment, material=mat,
                         tolerance=merged(args, config, "tolerance", 0.01),
                         target_edge=float(merged(args, config, "target_edge", 2.0)),
                         spec_kw={"length": length, "width": width})
        for t in plan.grid:
            SllSpec(length, width, t)
    except InvalidInputError as exc:
        raise ConfigError(str(exc)) from None
    outdir = output_dir(args, config)
    table = run_sweep(plan)
    g = mat.shear_modulus
    rows = []
    for r in table.rows:
        sec = RectSection(width, r.param)
        a_bend = cantilever_tip_deflection(sec, length, mat.youngs_modulus, force)
        a_twist = rect_torsion_angle(sec, length, g, moment)
        rows.append({
            "thickness_mm": r.param,
            "analytic_in_plane_mm": a_bend,
            "fea_in_plane_mm": r.in_plane_mm,
            "in_plane_dev_pct": _pct(r.in_plane_mm, a_bend),
            "analytic_angular_deg": a_twist,
            "fea_angular_deg": r.angular_deg,
            "angular_dev_pct": _pct(r.angular_deg, a_twist),
            "kappa_Nmm_per_rad": r.kappa_Nmm_per_rad,
            "dof": r.dof,
            "status": r.status,
        })
    cols = list(rows[0])
    fmts = formats_of(args, config)
    if "csv" in fmts:
        lines = [",".join(cols)] + [",".join(_cell(row[c]) for c in cols) for row in rows]
        write_text(outdir / "sll_analysis.csv", "\n".join(lines) + "\n")
    if "json" in fmts:
        payload = {"material": mat.to_dict(), "force_N": force, "moment_Nmm": moment,
                   "length_mm": length, "width_mm": width, "rows": _jsonable(rows),
                   "sweep": json.loads(table.to_json())}
        write_text(outdir / "sll_analysis.json", json.dumps(payload, indent=2, sort_keys=True) + "\n")
    write_metadata(outdir, "sll-analyze", argv, {"timings_s": table.timings()})
    for row in rows:
        print(f"t={row['thickness_mm']:g} mm  bend FEA {_num(row['fea_in_plane_mm'])} mm "
              f"(analytic {row['analytic_in_plane_mm']:.4g})  twist FEA {_num(row['fea_angular_deg'])} deg "
              f"(analytic {row['analytic_angular_deg']:.4g})  [{row['status']}]")
    failed = [r for r in rows if r["status"] != "ok"]
    return EXIT_SOLVER if failed and len(failed) == len(rows) else EXIT_OK


def _pct(value, ref):
    if not (math.isfinite(value) and ref):
        return math.nan
    return 100.0 * (value - ref) / ref


def _cell(v):
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


def _num(v):
    return "n/a" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{v:.4g}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _trl_spec_kw(args, config):
    kw = {}
    for dest, field_name in (("length", "length"), ("width", "width"), ("panel_thickness", "panel_thickness"),
                             ("flange_thickness", "flange_thickness"), ("fin_height", "fin_height"),
                             ("tip_cap_height", "tip_cap_height")):
        v = merged(args, config, dest)
        if v is not None:
            kw[field_name] = float(v)
    return kw


def cmd_trl_sweep(args, config, argv):
    from .sweep import (Family, Objective, SweepPlan, run_sweep, select_design, sweep_plots,
                        swoosh_check)

    grid = parse_range(merged(args, config, "triangles", "2:30"), integer=True)
    kw = _trl_spec_kw(args, config)
    mat = resolve_material(args, config)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for n in grid:
                TrlSpec(triangle_count=n, **kw)
        plan = SweepPlan(Family.TRL, grid, force=float(merged(args, config, "force", 0.01)),
                         moment=float(merged(args, config, "moment", 5.0)), material=mat,
                         tolerance=merged(args, config, "tolerance"),
                         parallelism=int(merged(args, config, "parallel", 1)),
                         target_edge=float(merged(args, config, "target_edge", 2.0)), spec_kw=kw)
    except InvalidInputError as exc:
        raise ConfigError(str(exc)) from None
    outdir = output_dir(args, config)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        table = run_sweep(plan, progress=lambda r: print(
            f"T_n={r.param:>2}  bend {_num(r.in_plane_mm)} mm  twist {_num(r.angular_deg)} deg  "
            f"kappa {_num(r.kappa_Nmm_per_rad)} N*mm/rad  SCF {_num(r.scf)}  [{r.status}]", flush=True))
    fmts = formats_of(args, config)
    if "csv" in fmts:
        write_text(outdir / "trl_sweep.csv", table.to_csv())
    if "json" in fmts:
        write_text(outdir / "trl_sweep.json", table.to_json() + "\n")
    for stem, svg in sweep_plots(table).items():
        write_text(outdir / f"trl_{stem}.svg", svg)
    report = {}
    try:
        shape = swoosh_check(table)
        report["shape"] = shape.to_dict()
        print(shape.describe())
    except InvalidInputError as exc:
        report["shape"] = {"declined": str(exc)}
        print(f"shape check declined: {exc}")
    threshold = float(merged(args, config, "threshold", 0.15))
    report["selection"] = {}
    for obj in Objective:
        try:
            choice = select_design(table, obj, threshold)
            report["selection"][obj.value] = choice.to_dict()
            print(f"{obj.value}: T_n={choice.param} ({choice.rationale})")
        except InvalidInputError as exc:
            report["selection"][obj.value] = {"declined": str(exc)}
    write_text(outdir / "trl_report.json", json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n")
    write_metadata(outdir, "trl-sweep", argv, {"timings_s": table.timings()})
    if all(r.status == "failed" for r in table.rows):
        return EXIT_SOLVER
    return EXIT_OK


_GRASP_FIELDS = (("fn", "normal_force", "--fn"), ("r", "contact_radius", "--r"), ("kappa", "kappa", "--kappa"),
                 ("x", "allowed_sag", "--x"))


def cmd_grasp_predict(args, config, argv):
    from . import grasp

    name = merged(args, config, "preset")
    name = grasp.PRESET_ALIASES.get(name, name)
    fields = dict(grasp.PRESETS[name]) if name in grasp.PRESETS else {}
    if name is not None and name not in grasp.PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(grasp.PRESETS)}")
    for dest, field_name in (("fn", "normal_force"), ("mu", "friction"), ("r", "contact_radius"),
                             ("kappa", "kappa"), ("x", "allowed_sag"), ("tau", "shear_stress"),
                             ("tau_f", "shear_fracture")):
        v = merged(args, config, dest)
        if v is not None:
            fields[field_name] = float(v)
    mass = merged(args, config, "mass")
    missing = [flag for dest, field_name, flag in _GRASP_FIELDS if field_name not in fields]
    out = {}
    scenario = None
    if not missing:
        try:
            scenario = grasp.GraspScenario(**fields)
        except InvalidInputError as exc:
            raise ConfigError(str(exc)) from None
        report = grasp.payload_capacity(scenario)
        out["scenario"] = grasp.scenario_to_dict(scenario)
        out["report"] = report.to_dict()
        print(report.summary(), file=sys.stderr)
    elif mass is None or fields:
        raise ConfigError(f"scenario is missing {', '.join(missing)}")
    if mass is not None:
        gripper = merged(args, config, "gripper", "TRL")
        try:
            feas = grasp.feasibility(float(mass), gripper, scenario)
        except InvalidInputError as exc:
            raise ConfigError(str(exc)) from None
        out["feasibility"] = feas.to_dict()
        print(f"{feas.verdict}: {feas.mass_g:g} g on {feas.gripper.value} gripper, margin "
              f"{feas.margin_g:.4g} g (weights use g0 = {grasp.G0} m/s^2)", file=sys.stderr)
    text = json.dumps(out, indent=2, sort_keys=True) + "\n"
    sys.stdout.write(text)
    if getattr(args, "output_dir", None) or config.get("output_dir"):
        write_text(output_dir(args, config) / "grasp_report.json", text)
    return EXIT_OK


def _trl_from_args(args, config):
    kw = _trl_spec_kw(args, config)
    n = merged(args, config, "triangles", 30)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return TrlSpec(triangle_count=int(n), **kw)
    except (InvalidInputError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def cmd_mesh_export(args, config, argv):
    spec = _trl_from_args(args, config)
    out = merged(args, config, "out")
    if not out:
        raise ConfigError("--out is required")
    try:
        mesh = build_mesh(spec, float(merged(args, config, "target_edge", 2.0)))
    except InvalidInputError as exc:
        raise ConfigError(str(exc)) from None
    extrude = float(merged(args, config, "extrude", spec.panel_thickness))
    data = export_stl(mesh, extrude)
    path = Path(out)
    try:
        path.write_bytes(data)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from None
    _, tris = read_stl(data)
    vol = stl_enclosed_volume(tris)
    print(f"wrote {path}: {len(tris)} triangles, enclosed volume {vol:.6g} mm^3, {len(data)} bytes")
    return EXIT_OK


def _mesh_from_json(path) -> TriMesh:
    try:
        d = json.loads(Path(path).read_text())
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None
    try:
        nodes = np.asarray(d["nodes"], dtype=float)
        elements = np.asarray(d["elements"], dtype=np.int64)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path} needs numeric 'nodes' and 'elements' arrays ({exc})") from None
    thickness = np.asarray(d.get("thickness", 1.0), dtype=float)
    sets = {k: np.asarray(v, dtype=np.int64) for k, v in d.get("node_sets", {}).items()}
    esets = {k: np.asarray(v, dtype=np.int64) for k, v in d.get("element_sets", {}).items()}
    panel = d.get("panel")
    return TriMesh(nodes, elements, thickness, sets, esets,
                   panel=None if panel is None else np.asarray(panel, dtype=np.int64))


def cmd_validate(args, config, argv):
    if args.mesh_json:
        mesh = _mesh_from_json(args.mesh_json)
        label = args.mesh_json
    else:
        te = float(merged(args, config, "target_edge", 2.0))
        t = merged(args, config, "thickness")
        try:
            if t is not None:
                spec = SllSpec(float(merged(args, config, "length", 100.0)),
                               float(merged(args, config, "width", 20.0)), float(t))
            else:
                spec = _trl_from_args(args, config)
            mesh = build_mesh(spec, te)
        except (InvalidInputError, MeshingError) as exc:
            raise ConfigError(str(exc)) from None
        label = repr(spec)
    defects = validate_mesh(mesh)
    report = {"mesh": label, "n_nodes": int(len(mesh.nodes)), "n_elements": int(len(mesh.elements)),
              "defects": [{"kind": d.kind, "detail": d.detail} for d in defects]}
    print(json.dumps(report, indent=2))
    return EXIT_OK if not defects else EXIT_CONFIG


# -- argparse ----------------------------------------------------------------

def _common(p, geometry=True):
    p.add_argument("--config", metavar="FILE", help="JSON config with unit-suffixed keys; flags override it")
    p.add_argument("--output-dir", dest="output_dir", metavar="DIR",
                   help=f"output directory (env {OUTPUT_DIR_ENV}, default ./{DEFAULT_OUTPUT_DIR})")
    if geometry:
        p.add_argument("--length", type=float, metavar="MM", help="layer length [mm] (default 100)")
        p.add_argument("--width", type=float, metavar="MM", help="layer width [mm] (default 20)")


def _solver_flags(p):
    p.add_argument("--material", help="built-in material: PA6, PLA, Ecoflex00-30 (default PA6)")
    p.add_argument("--youngs-modulus", dest="youngs_modulus", type=float, metavar="MPA",
                   help="override Young's modulus [MPa]")
    p.add_argument("--poisson", type=float, metavar="NU", help="override Poisson ratio [-]")
    p.add_argument("--tolerance", type=float, metavar="REL",
                   help="relative convergence tolerance between mesh levels [-], in (0, 0.1]")
    p.add_argument("--target-edge", dest="target_edge", type=float, metavar="MM",
                   help="starting element edge length [mm] (default 2)")
    p.add_argument("--formats", help="comma list of report formats: csv, json (default both)")


def _trl_geometry_flags(p):
    p.add_argument("--panel-thickness", dest="panel_thickness", type=float, metavar="MM",
                   help="tooth wall thickness [mm] (default 1)")
    p.add_argument("--flange-thickness", dest="flange_thickness", type=float, metavar="MM",
                   help="top flange thickness [mm] (default = panel thickness)")
    p.add_argument("--fin-height", dest="fin_height", type=float, metavar="MM",
                   help="tooth depth [mm] (default 10%% of length + 2)")
    p.add_argument("--tip-cap-height", dest="tip_cap_height", type=float, metavar="MM",
                   help="closed bonding land at each spike tip [mm] (default 2; 0 = none)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="trlsim", description="Strain-limiting layer analysis: "
                                 "shell FEA, sweeps, grasp payload model and STL export.")
    ap.add_argument("--version", action="version", version=f"trlsim {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sll-analyze", help="flat strip: analytic vs FEA bending and twist")
    _common(p)
    _solver_flags(p)
    p.add_argument("--thickness", metavar="MM", help="strip thickness(es) [mm]: start:stop:step or comma list "
                   "(default 0.3:1.0:0.1)")
    p.add_argument("--force", type=float, metavar="N", help="tip force [N] (default 0.01)")
    p.add_argument("--moment", type=float, metavar="NMM", help="tip torque [N*mm] (default 0.5)")
    p.set_defaults(func=cmd_sll_analyze)

    p = sub.add_parser("trl-sweep", help="triangulated layer sweep over triangle count")
    _common(p)
    _solver_flags(p)
    _trl_geometry_flags(p)
    p.add_argument("--triangles", metavar="N", help="triangle counts [-]: start:stop[:step] or comma list "
                   "(default 2:30)")
    p.add_argument("--force", type=float, metavar="N", help="tip force [N] (default 0.01)")
    p.add_argument("--moment", type=float, metavar="NMM", help="tip torque [N*mm] (default 5)")
    p.add_argument("--parallel", type=int, metavar="K", help="worker processes [-] (default 1)")
    p.add_argument("--threshold", type=float, metavar="REL",
                   help="cyclic-life selection window relative to the best twist [-] (default 0.15)")
    p.set_defaults(func=cmd_trl_sweep)

    p = sub.add_parser("grasp-predict", help="payload capacity and feasibility")
    _common(p, geometry=False)
    p.add_argument("--preset", help="named scenario, e.g. trl-fit (kappa 265.5 N*mm/rad, r 15 mm, "
                   "mu 1, F_n 3 N)")
    p.add_argument("--fn", type=float, metavar="N", help="normal (squeeze) force [N]")
    p.add_argument("--mu", type=float, metavar="MU", help="static friction coefficient [-] (default 1)")
    p.add_argument("--r", type=float, metavar="MM", help="neutral axis to object distance [mm]")
    p.add_argument("--kappa", type=float, metavar="NMM_PER_RAD", help="torsional stiffness [N*mm/rad]")
    p.add_argument("--x", type=float, metavar="MM", help="allowed vertical sag [mm]")
    p.add_argument("--tau", type=float, metavar="PA", help="working shear stress [Pa] (optional)")
    p.add_argument("--tau-f", dest="tau_f", type=float, metavar="PA", help="shear fracture stress [Pa] (optional)")
    p.add_argument("--mass", type=float, metavar="G", help="object mass [g] for a feasibility verdict")
    p.add_argument("--gripper", help="Benchmark or TRL (default TRL)")
    p.set_defaults(func=cmd_grasp_predict)

    p = sub.add_parser("mesh-export", help="binary STL of a triangulated layer")
    _common(p)
    _trl_geometry_flags(p)
    p.add_argument("--triangles", type=int, metavar="N", help="triangle count [-] (default 30)")
    p.add_argument("--target-edge", dest="target_edge", type=float, metavar="MM",
                   help="element edge length [mm] (default 2)")
    p.add_argument("--extrude", type=float, metavar="MM", help="solid thickness per facet [mm] "
                   "(default panel thickness)")
    p.add_argument("--out", metavar="PATH", help="STL file to write")
    p.set_defaults(func=cmd_mesh_export)

    p = sub.add_parser("validate", help="lint a generated or supplied mesh")
    _common(p)
    _trl_geometry_flags(p)
    p.add_argument("--triangles", type=int, metavar="N", help="triangle count [-] (default 30)")
    p.add_argument("--thickness", type=float, metavar="MM", help="lint a flat strip of this thickness [mm]")
    p.add_argument("--target-edge", dest="target_edge", type=float, metavar="MM",
                   help="element edge length [mm] (default 2)")
    p.add_argument("--mesh-json", dest="mesh_json", metavar="FILE",
                   help="mesh JSON with nodes [mm] and elements to lint instead")
    p.set_defaults(func=cmd_validate)
    return ap


def _fail(code, kind, message):
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit_code": code}) + "\n")
    return code


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage, 0 on --help
        return int(exc.code or 0)
    try:
        config = load_config(args.config, args.command) if getattr(args, "config", None) else {}
        return args.func(args, config, argv)
    except (ConfigError, InvalidInputError) as exc:
        return _fail(EXIT_CONFIG, "config", str(exc))
    except (OutputError, OSError) as exc:
        return _fail(EXIT_IO, "io", str(exc))
    except (SolverError, MeshingError, TrlsimError) as exc:
        return _fail(EXIT_SOLVER, "solver", f"{type(exc).__name__}: {exc}")


if __name__ == "__main__":
    sys.exit(main())
