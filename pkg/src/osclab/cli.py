"""Scenario runner: batch verification with CSV tables and SVG plots.

Scenario files are a plain-text key/value tree::

    schema_version = 1
    name = hirzebruch-slope

    [model]            # optional defaults for numeric tasks
    a = 2
    ns = 160

    [task slope]
    kind = slope_limit
    spec = euler-oo
    tolerance = 0.05
    acceptance = true  # failures drive the process exit status

Sections are ``[model]`` or ``[task NAME]``; values are parsed as int,
float, bool or string.  Exit codes: 0 success, 1 acceptance-task failure,
2 parse error, 3 validation error.

Run ``python -m osclab.cli --list`` for the shipped scenarios.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

from .errors import ScenarioError
from .report import write_csv, polyline_svg, render_cell

SCHEMA_VERSION = 1
_SCENARIO_DIR = os.path.join(os.path.dirname(__file__), "scenarios")


# -- configuration ----------------------------------------------------------------

def _parse_value(raw: str):
    text = raw.strip()
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    for caster in (int, float):
        try:
            return caster(text)
        except ValueError:
            pass
    return text


def parse_scenario(text: str) -> dict:
    """Parse the key/value tree; raises ScenarioError with line/column."""
    tree = {"": {}}
    section = ""
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        stripped = line.strip()
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ScenarioError(f"line {ln}: unterminated section header",
                                    line=ln, column=len(line))
            section = stripped[1:-1].strip()
            if section in tree:
                raise ScenarioError(f"line {ln}: duplicate section "
                                    f"[{section}]", line=ln, column=1)
            tree[section] = {}
            continue
        if "=" not in stripped:
            raise ScenarioError(
                f"line {ln}: expected 'key = value'", line=ln,
                column=raw.index(stripped[0]) + 1)
        key, _, val = stripped.partition("=")
        key = key.strip()
        if not key:
            raise ScenarioError(f"line {ln}: empty key", line=ln, column=1)
        tree[section][key] = _parse_value(val)
    return tree


def validate_scenario(tree: dict) -> dict:
    top = tree.get("", {})
    if top.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(
            f"scenario must declare schema_version = {SCHEMA_VERSION}")
    tasks = []
    for section, body in tree.items():
        if section.startswith("task"):
            name = section[4:].strip() or f"task{len(tasks)}"
            kind = body.get("kind")
            if kind not in TASKS:
                raise ValueError(
                    f"task {name!r}: unknown kind {kind!r}; "
                    f"available: {sorted(TASKS)}")
            tol = body.get("tolerance")
            if tol is not None and not (isinstance(tol, (int, float))
                                        and tol > 0):
                raise ValueError(f"task {name!r}: tolerance must be positive")
            tasks.append((name, body))
        elif section not in ("", "model"):
            raise ValueError(f"unknown section [{section}]")
    if not all(isinstance(v, (int, float, str, bool))
               for v in tree.get("model", {}).values()):
        raise ValueError("model section must hold scalar values")
    return {"name": top.get("name", "scenario"), "model": tree.get("model", {}),
            "tasks": tasks}


# -- task results ------------------------------------------------------------------

@dataclass
class TaskResult:
    name: str
    kind: str
    status: str                  # "pass" | "fail" | "value"
    acceptance: bool
    seconds: float
    summary: str
    header: list = dc_field(default_factory=list)
    rows: list = dc_field(default_factory=list)
    series: tuple | None = None  # (xs, ys, ylabel, fit_slope)


@dataclass
class RunReport:
    scenario: str
    grid_note: str
    results: list

    @property
    def failed(self) -> bool:
        return any(r.status == "fail" and r.acceptance for r in self.results)


# -- tasks --------------------------------------------------------------------------

def _grid_params(cfg, model_cfg):
    def pick(key, default):
        return cfg.get(key, model_cfg.get(key, default))
    return (int(pick("ns", 160)), float(pick("s_range", 14.0)),
            int(pick("a", 0)))


def task_csck_recovery(cfg, model_cfg):
    from .grids import LogGrid
    from .model import ProjectiveLine
    from . import operators as ops
    tol = float(cfg.get("tolerance", 1e-6))
    schedule = [int(x) for x in str(cfg.get("schedule", "64 128 256")).split()]
    rng = float(cfg.get("s_range", 12.0))
    rows, errs = [], []
    for n in schedule:
        S = ops.scalar_curvature(ProjectiveLine().omega(
            LogGrid(rng, n, stencil_order=6)))
        err = float(np.max(np.abs(S.core - 2.0)))
        errs.append(err)
        rows.append((n, err))
    order = float(np.polyfit(np.log(schedule), np.log(errs), 1)[0] * -1)
    ok = errs[-1] <= tol and order >= 3.5
    return {
        "status": "pass" if ok else "fail",
        "summary": f"max|S-2|={errs[-1]:.3e} at {schedule[-1]} nodes "
                   f"(tol {tol:g}), observed order {order:.2f}",
        "header": ["nodes", "max_error"],
        "rows": rows,
        "series": (schedule, errs, "max |S-2|", None),
    }


def task_geodesic_residual(cfg, model_cfg):
    from .lab import Lab
    from .geodesics import HolomorphySection, flow_geodesic, \
        geodesic_residual, straight_line_path
    ns, s_range, a = _grid_params(cfg, model_cfg)
    tol = float(cfg.get("tolerance", 1e-5))
    lab = Lab.make(a=a, ns=ns, s_range=s_range)
    rng = np.random.default_rng(int(cfg.get("seed", 0)))
    u = HolomorphySection(lab.model, lab.grid, lab.random_profile(rng, 0.8))
    geo = flow_geodesic(u, T=1.0, steps=int(cfg.get("steps", 32)))
    res = geodesic_residual(geo.path, lab.omega_X)
    ctrl = straight_line_path(geo.path.potentials[0],
                              geo.path.potentials[-1], steps=16)
    res_c = geodesic_residual(ctrl, lab.omega_X)
    ratio = res_c["max"] / max(res["max"], 1e-300)
    ok = res["max"] <= tol and ratio >= 100.0
    return {
        "status": "pass" if ok else "fail",
        "summary": f"geodesic residual {res['max']:.3e} (tol {tol:g}), "
                   f"control/geodesic ratio {ratio:.1f}",
        "header": ["time", "geodesic_sup"],
        "rows": list(zip(res["times"], res["sup"])),
        "series": (res["times"], res["sup"], "residual sup", None),
    }


def task_duality(cfg, model_cfg):
    from .lab import Lab
    from .functionals import (PotentialPath, mabuchi_chen_tian,
                              mabuchi_derivative, log_norm_N,
                              log_norm_derivative)
    ns, s_range, a = _grid_params(cfg, model_cfg)
    tol = float(cfg.get("tolerance", 1e-6))
    count = int(cfg.get("count", 3))
    k = int(cfg.get("k", 4))
    lab = Lab.make(a=a, ns=ns, s_range=s_range)
    rng = np.random.default_rng(int(cfg.get("seed", 0)))
    rows = []
    worst = 0.0
    wk = lab.omega_k(k)
    sh = lab.model.s_hat(Fraction(k))
    for i in range(count):
        phi = lab.random_potential(rng, wk, amp=0.05)
        ct = mabuchi_chen_tian(phi, wk, sh)["M"]
        times = np.linspace(0, 1, 33)
        from .grids import ScalarField
        line = PotentialPath(times, [
            ScalarField(lab.grid, t * phi.values, phi.pad_ok) for t in times])
        md = mabuchi_derivative(line, wk, sh)["M"]
        dev = abs(ct - md) / (1.0 + abs(ct))
        worst = max(worst, dev)
        rows.append((f"mabuchi-{i}", ct, md, dev))
    for i in range(count):
        tau0 = lab.random_profile(rng, 0.5)
        tau1 = lab.random_profile(rng, 0.5)
        g1 = lab.random_profile(rng, 0.3)
        path = lab.ke_path(tau0, tau1, None, g1,
                           times=np.linspace(0, 1, 33))
        nd = log_norm_derivative(path, lab.omega_X, lab.omega_B)["N"]
        n1 = log_norm_N(path.potentials[-1], lab.omega_X, lab.omega_B,
                        lab.model, check=False, w_phi=path.forms[-1])
        n0 = log_norm_N(path.potentials[0], lab.omega_X, lab.omega_B,
                        lab.model, check=False, w_phi=path.forms[0])
        dev = abs(nd - (n1 - n0)) / (1.0 + abs(n1 - n0))
        worst = max(worst, dev)
        rows.append((f"log-norm-{i}", n1 - n0, nd, dev))
    ok = worst <= tol
    return {
        "status": "pass" if ok else "fail",
        "summary": f"worst dual-evaluation deviation {worst:.3e} (tol {tol:g})",
        "header": ["case", "closed_form", "path_integral", "relative_dev"],
        "rows": rows,
    }


def task_expansion(cfg, model_cfg):
    from .lab import Lab
    from .functionals import mabuchi_expansion_check
    ns, s_range, a = _grid_params(cfg, model_cfg)
    tol = float(cfg.get("tolerance", 0.02))
    lab = Lab.make(a=a, ns=ns, s_range=s_range)
    rng = np.random.default_rng(int(cfg.get("seed", 0)))
    (phi, w), _ = lab.random_state(rng, amp=0.6)
    ks = tuple(int(x) for x in str(cfg.get("ks", "8 16 32 64")).split())
    rep = mabuchi_expansion_check(phi, lab.omega_X, lab.omega_B, lab.model,
                                  ks=ks, w_phi_x=w)
    rel = rep["deviation"] / max(1e-12, abs(rep["closed_N"]))
    ok = rel <= tol and abs(rep["residual_order"] + 1.0) <= 0.3
    rows = [(k, mk) for k, mk in zip(rep["ks"], rep["M_k"])]
    return {
        "status": "pass" if ok else "fail",
        "summary": f"fitted N dev {rel:.2%} (tol {tol:.0%}), residual order "
                   f"{rep['residual_order']:.2f}",
        "header": ["k", "M_k"],
        "rows": rows,
        "series": (list(rep["ks"]), rep["M_k"], "M_k", rep["fitted_F"]),
    }


def task_convexity(cfg, model_cfg):
    from .lab import Lab
    from .geodesics import HolomorphySection, flow_geodesic, convexity_check
    ns, s_range, a = _grid_params(cfg, model_cfg)
    tol = float(cfg.get("tolerance", 1e-7))
    count = int(cfg.get("count", 4))
    lab = Lab.make(a=a, ns=ns, s_range=s_range)
    rng = np.random.default_rng(int(cfg.get("seed", 0)))
    rows = []
    ok = True
    for i in range(count):
        tau0 = lab.random_profile(rng, 0.4)
        c = lab.random_profile(rng, 0.6)
        u = HolomorphySection(lab.model, lab.grid, c)
        geo = flow_geodesic(u, T=1.0, steps=16, tau0=tau0,
                            f=lab.random_profile(rng, 0.3))
        cv = convexity_check(geo, lab.omega_X, lab.omega_B, lab.model,
                             tol=tol)
        ok = ok and cv["convex"]
        rows.append((f"geodesic-{i}", cv["min_second_difference"],
                     cv["affine"], cv["velocity_defect"]))
    # automorphism flow: constant coefficient
    u = HolomorphySection(lab.model, lab.grid,
                          np.full_like(lab.grid.s_padded, 0.7))
    geo = flow_geodesic(u, T=1.0, steps=16)
    cv = convexity_check(geo, lab.omega_X, lab.omega_B, lab.model, tol=tol)
    ok = ok and cv["affine"] and cv["velocity_defect"] <= tol
    rows.append(("automorphism-flow", cv["min_second_difference"],
                 cv["affine"], cv["velocity_defect"]))
    return {
        "status": "pass" if ok else "fail",
        "summary": f"{count} geodesics convex; automorphism flow affine "
                   f"(defect {cv['velocity_defect']:.2e})",
        "header": ["geodesic", "min_second_difference", "affine",
                   "velocity_defect"],
        "rows": rows,
    }


def task_stability_exact(cfg, model_cfg):
    from .stability import (SHIPPED_SPECS, w0_w1, df_j_expansion,
                            w0_from_fiber_df, minimum_norm)
    rows = []
    ok = True
    for name, sp in sorted(SHIPPED_SPECS.items()):
        ww = w0_w1(sp)
        fit = df_j_expansion(sp, [3, 5, 8, 13])
        fib = w0_from_fiber_df(sp)
        agree = (ww["W0"] == fit["W0"] and ww["W1"] == fit["W1"]
                 and ww["W0"] == fib)
        ok = ok and agree
        rows.append((name, ww["W0"], ww["W1"], minimum_norm(sp), agree))
    return {
        "status": "pass" if ok else "fail",
        "summary": f"dual-path exactness on {len(rows)} specs: "
                   f"{'all agree' if ok else 'MISMATCH'}",
        "header": ["spec", "W0", "W1", "minimum_norm", "dual_paths_agree"],
        "rows": rows,
    }


def task_polystability_signs(cfg, model_cfg):
    from .stability import SHIPPED_SPECS, w0_w1, minimum_norm, shipped_spec
    euler = shipped_spec("euler-oo")
    ww = w0_w1(euler)
    mn = minimum_norm(euler)
    ok = (ww["W0"] == 0 and ww["W1"] > 0 and mn > 0)
    rows = [("euler-oo", ww["W0"], ww["W1"], mn)]
    for name, sp in sorted(SHIPPED_SPECS.items()):
        if sp.v_degrees == (0, 0) and sp.is_product:
            w = w0_w1(sp)
            ok = ok and w["W1"] == 0
            rows.append((name, w["W0"], w["W1"], minimum_norm(sp)))
    return {
        "status": "pass" if ok else "fail",
        "summary": "euler spec W0=0, W1>0, min norm>0; products W1=0"
                   if ok else "sign pattern violated",
        "header": ["spec", "W0", "W1", "minimum_norm"],
        "rows": rows,
    }


def task_slope_limit(cfg, model_cfg):
    from .stability import shipped_spec
    from .rays import slope_limit_check
    tol = float(cfg.get("tolerance", 0.05))
    spec = shipped_spec(str(cfg.get("spec", "euler-oo")))
    ns = int(cfg.get("ns", model_cfg.get("ns", 160)))
    rep = slope_limit_check(spec, ns=ns,
                            s_range=float(cfg.get("s_range", 14.0)))
    ok = (rep["relative_deviation"] <= tol) if not rep["affine_case"] \
        else rep["deviation"] <= tol
    rows = list(zip(rep["times"], rep["N"]))
    return {
        "status": "pass" if ok else "fail",
        "summary": f"slope {rep['slope']:.6f} vs 8*W1/r = "
                   f"{rep['predicted_slope']:.6f} "
                   f"(rel dev {rep['relative_deviation']:.2e}, tol {tol:g})",
        "header": ["time", "N"],
        "rows": rows,
        "series": ([float(t) for t in rep["times"]],
                   [float(v) for v in rep["N"]], "N(phi_t)",
                   rep["predicted_slope"]),
    }


def task_deligne_slopes(cfg, model_cfg):
    from .stability import shipped_spec
    from .rays import deligne_slope_check
    tol = float(cfg.get("tolerance", 0.05))
    spec = shipped_spec(str(cfg.get("spec", "euler-oo")))
    rep = deligne_slope_check(spec, ns=int(cfg.get("ns", 128)),
                              s_range=float(cfg.get("s_range", 14.0)))
    rows, ok = [], True
    for key, comp in rep["components"].items():
        scale = max(1.0, abs(comp["predicted"]))
        good = comp["deviation"] / scale <= tol
        ok = ok and good
        rows.append((key, comp["slope"], comp["predicted"],
                     comp["deviation"], good))
    ok = ok and rep["additivity_deviation"] <= tol * max(
        1.0, abs(rep["slope_limit_total"]))
    return {
        "status": "pass" if ok else "fail",
        "summary": f"pairing slopes match (additivity dev "
                   f"{rep['additivity_deviation']:.2e})",
        "header": ["component", "slope", "predicted", "deviation", "ok"],
        "rows": rows,
    }


def task_sectional_curvature(cfg, model_cfg):
    from .lab import Lab
    from .harmonics import rotation_harmonic, sectional_curvature, FiberField
    from . import operators as ops
    ns, s_range, a = _grid_params(cfg, model_cfg)
    tol = float(cfg.get("tolerance", 1e-10))
    count = int(cfg.get("count", 100))
    lab = Lab.make(a=a, ns=ns, s_range=s_range)
    rng = np.random.default_rng(int(cfg.get("seed", 0)))
    h = ops.momentum_harmonic(lab.omega_X)
    rot = rotation_harmonic(lab.model, lab.grid)
    worst = -np.inf
    for _ in range(count):
        c1, c2 = rng.standard_normal(2)
        c3, c4 = rng.standard_normal(2)
        psi = FiberField(lab.grid, {0: c1 * h.values.astype(complex),
                                    1: c2 * rot.mode(1)})
        eta = FiberField(lab.grid, {0: c3 * h.values.astype(complex),
                                    1: c4 * rot.mode(1)})
        K = sectional_curvature(psi, eta, lab.omega_X, lab.omega_B)["K"]
        worst = max(worst, K)
    ok = worst <= tol
    return {
        "status": "pass" if ok else "fail",
        "summary": f"max sectional curvature over {count} samples: "
                   f"{worst:.3e} (tol {tol:g})",
        "header": ["samples", "max_K"],
        "rows": [(count, worst)],
    }


TASKS = {
    "csck_recovery": task_csck_recovery,
    "geodesic_residual": task_geodesic_residual,
    "duality": task_duality,
    "expansion": task_expansion,
    "convexity": task_convexity,
    "stability_exact": task_stability_exact,
    "polystability_signs": task_polystability_signs,
    "slope_limit": task_slope_limit,
    "deligne_slopes": task_deligne_slopes,
    "sectional_curvature": task_sectional_curvature,
}


# -- runner ----------------------------------------------------------------------

def list_scenarios(extra_dir: str | None = None) -> list:
    names = []
    for d in filter(None, [_SCENARIO_DIR, extra_dir]):
        if os.path.isdir(d):
            names.extend(os.path.splitext(f)[0] for f in sorted(os.listdir(d))
                         if f.endswith(".scn"))
    return sorted(set(names))


def resolve_scenario(name_or_path: str, extra_dir: str | None = None) -> str:
    if os.path.exists(name_or_path):
        return name_or_path
    for d in filter(None, [extra_dir, _SCENARIO_DIR]):
        cand = os.path.join(d, name_or_path + ".scn")
        if os.path.exists(cand):
            return cand
    raise FileNotFoundError(f"no scenario {name_or_path!r}")


def run(path: str, out_dir: str = "osclab-out", overrides: dict | None = None,
        plot: bool = False) -> RunReport:
    with open(path) as fh:
        tree = parse_scenario(fh.read())
    cfg = validate_scenario(tree)
    if overrides:
        cfg["model"].update(overrides)
    os.makedirs(out_dir, exist_ok=True)
    results = []
    for name, body in cfg["tasks"]:
        body = dict(body)
        kind = body.pop("kind")
        acceptance = bool(body.pop("acceptance", False))
        t0 = time.time()
        out = TASKS[kind](body, cfg["model"])
        dt = time.time() - t0
        res = TaskResult(name=name, kind=kind, status=out["status"],
                         acceptance=acceptance, seconds=dt,
                         summary=out["summary"],
                         header=out.get("header", []),
                         rows=out.get("rows", []),
                         series=out.get("series"))
        results.append(res)
        print(f"[{res.status:4s}] {cfg['name']}/{name} ({kind}): "
              f"{res.summary}  [{dt:.1f}s]")
    report = RunReport(scenario=cfg["name"],
                       grid_note=str(cfg["model"]), results=results)
    emit_csv(report, out_dir)
    if plot:
        emit_plot(report, out_dir)
    return report


def emit_csv(report: RunReport, out_dir: str) -> list:
    """One CSV per task plus a summary table."""
    paths = []
    os.makedirs(out_dir, exist_ok=True)
    summary_rows = [(r.name, r.kind, r.status, r.acceptance, r.seconds,
                     r.summary) for r in report.results]
    paths.append(write_csv(os.path.join(out_dir, "summary.csv"),
                           ["task", "kind", "status", "acceptance",
                            "seconds", "summary"], summary_rows))
    for r in report.results:
        if r.rows:
            paths.append(write_csv(
                os.path.join(out_dir, f"{r.name}.csv"), r.header, r.rows))
    return paths


def emit_plot(report: RunReport, out_dir: str) -> list:
    paths = []
    for r in report.results:
        if r.series is None:
            continue
        xs, ys, ylabel, slope = r.series
        paths.append(polyline_svg(
            os.path.join(out_dir, f"{r.name}.svg"), xs, ys,
            title=f"{report.scenario}: {r.name}", ylabel=ylabel,
            fit_slope=slope))
    return paths


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="osclab", description="run verification scenarios")
    ap.add_argument("scenario", nargs="?", help="scenario name or path")
    ap.add_argument("--out", default="osclab-out", help="output directory")
    ap.add_argument("--list", action="store_true", dest="list_",
                    help="list shipped scenarios")
    ap.add_argument("--plot", action="store_true", help="emit SVG plots")
    ap.add_argument("--scenario-dir", default=None,
                    help="extra directory of scenario files")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VAL",
                    help="override a model parameter (ns, s_range, a, ...)")
    args = ap.parse_args(argv)
    if args.list_:
        for name in list_scenarios(args.scenario_dir):
            print(name)
        return 0
    if not args.scenario:
        ap.print_usage()
        return 3
    overrides = {}
    for item in args.set:
        if "=" not in item:
            print(f"bad override {item!r}", file=sys.stderr)
            return 3
        k, _, v = item.partition("=")
        overrides[k.strip()] = _parse_value(v)
    try:
        path = resolve_scenario(args.scenario, args.scenario_dir)
    except FileNotFoundError as exc:
        print(exc, file=sys.stderr)
        return 3
    try:
        with open(path) as fh:
            tree = parse_scenario(fh.read())
    except ScenarioError as exc:
        print(f"parse error: {exc} (line {exc.line}, column {exc.column})",
              file=sys.stderr)
        return 2
    try:
        validate_scenario(tree)
    except ValueError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 3
    report = run(path, out_dir=args.out, overrides=overrides, plot=args.plot)
    return 1 if report.failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
