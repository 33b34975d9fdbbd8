"""Command-line interface: optimize, simulate, sweep and reproduce-tables.

Exit codes: 0 success, 1 invalid input or scenario, 2 a reproduced value is
outside its tolerance.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

from . import reference_values as ref
from .costs import etpu
from .errors import ScreenEOQError
from .model import (DEFAULT_QUADRATURE_NODES, Policy, Scenario, UniformOnZeroBeta,
                    compute_moments, uniform_defects)
from .optimize import approx_policy_n1, optimal_policy
from .scenario_file import bundled_table1_path, parse_scenario
from .simulate import SimConfig, estimate_etpu, write_trace_csv

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_TOLERANCE = 2

SWEEP_STAGE_PARAMS = ("beta", "rate", "unit_cost")
SWEEP_ECON_PARAMS = {"backorder_cost": "backorder_cost", "hold_good": "hold_good",
                     "hold_defective": "hold_defective", "salvage": "salvage"}


@dataclass
class Report:
    """A titled table. ``columns`` pairs a name with its Markdown number format."""

    title: str
    columns: list
    rows: list
    notes: list = field(default_factory=list)
    failed: bool = False
    extra: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


def _md_cell(value, fmt):
    if isinstance(value, float):
        if math.isnan(value):
            return "n/a"
        return format(value, fmt or ".2f")
    if isinstance(value, bool):
        return "yes" if value else "no"
    return str(value)


def render_markdown(reports) -> str:
    out = []
    for rep in reports:
        out.append(f"### {rep.title}\n")
        names = [c for c, _ in rep.columns]
        out.append("| " + " | ".join(names) + " |")
        out.append("|" + "|".join("---" for _ in names) + "|")
        for row in rep.rows:
            out.append("| " + " | ".join(_md_cell(row.get(c, ""), f) for c, f in rep.columns) + " |")
        for note in rep.notes:
            out.append(f"\n{note}")
        out.append("")
    return "\n".join(out)


def render_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    multi = len(reports) > 1
    for rep in reports:
        names = [c for c, _ in rep.columns]
        w.writerow((["report"] if multi else []) + names)
        for row in rep.rows:
            cells = [repr(v) if isinstance(v, float) else v for v in (row.get(c, "") for c in names)]
            w.writerow(([rep.title] if multi else []) + cells)
    return buf.getvalue()


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def render_json(reports) -> str:
    doc = [{"title": r.title,
            "rows": [{c: _json_safe(row.get(c)) for c, _ in r.columns} for row in r.rows],
            "notes": r.notes, **r.extra} for r in reports]
    return json.dumps(doc if len(doc) > 1 else doc[0], indent=2) + "\n"


RENDERERS = {"md": render_markdown, "csv": render_csv, "json": render_json}


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _split_labels(text):
    labels = [s.strip() for s in text.replace("+", ",").split(",") if s.strip()]
    if not labels:
        raise ValueError("stage selection is empty")
    return labels


def select_stages(catalog: Scenario, labels, notes=None) -> Scenario:
    """Pick stages by label and order them fastest first, noting any reordering."""
    chosen = catalog.select(labels).sorted_by_rate()
    if notes is not None and chosen.labels != list(labels):
        notes.append(f"note: stages reordered by screening rate: {'+'.join(chosen.labels)}")
    return chosen


def _moments(scenario, args):
    return compute_moments(scenario, nodes=args.quadrature_nodes,
                           r_convention=args.r_convention)


def _single_uniform_hd0(scenario):
    return (scenario.n == 1 and isinstance(scenario.stages[0].defect_dist, UniformOnZeroBeta)
            and scenario.hold_defective == 0)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_optimize(catalog: Scenario, selections, args) -> list:
    """One row per stage selection with y*, B*, ETPU* (and the approximation for n=1)."""
    notes = []
    rows = []
    approx = False
    for labels in selections:
        sc = select_stages(catalog, labels, notes)
        m = _moments(sc, args)
        sol = optimal_policy(m, sc)
        row = {"stages": "+".join(sc.labels), "y_star": sol.y_star, "B_star": sol.b_star,
               "etpu_star": sol.etpu_star}
        if _single_uniform_hd0(sc):
            ap = approx_policy_n1(sc)
            row.update(y1=ap.y_star, B1=ap.b_star, etpu1=ap.etpu_star)
            approx = True
        notes.extend(f"{row['stages']}: {d}" for d in sol.diagnostics)
        rows.append(row)
    cols = [("stages", None), ("y_star", ".2f"), ("B_star", ".2f"), ("etpu_star", ".2f")]
    if approx:
        cols += [("y1", ".2f"), ("B1", ".2f"), ("etpu1", ".2f")]
    return [Report("Optimal policy", cols, rows, notes)]


def cmd_simulate(catalog: Scenario, labels, args) -> list:
    notes = []
    sc = select_stages(catalog, labels, notes)
    m = _moments(sc, args)
    sol = optimal_policy(m, sc)
    y = sol.y_star if args.y is None else args.y
    B = (sol.b_star if args.y is None else 0.0) if args.B is None else args.B
    policy = Policy(y, B)
    analytic = float(etpu(policy, m, sc))
    cfg = SimConfig(cycles=args.cycles, seed=args.seed, antithetic=args.antithetic,
                    keep_trace=bool(args.trace))
    res = estimate_etpu(policy, sc, cfg)
    if args.trace:
        write_trace_csv(res, args.trace)
        notes.append(f"per-cycle trace written to {args.trace}")
    if not res.std_error_available:
        notes.append("standard error unavailable: at least two cycles are needed")
    row = {"stages": "+".join(sc.labels), "y": y, "B": B, "cycles": res.cycles,
           "etpu_estimate": res.etpu_estimate, "std_error": res.std_error,
           "etpu_analytic": analytic, "z_score": res.z_score(analytic),
           "mean_cycle_length": res.mean_cycle_length,
           "infeasible_cycles": res.infeasible_cycles,
           "std_error_available": res.std_error_available}
    cols = [("stages", None), ("y", ".2f"), ("B", ".2f"), ("cycles", None),
            ("etpu_estimate", ".2f"), ("std_error", ".4f"), ("etpu_analytic", ".2f"),
            ("z_score", ".3f"), ("mean_cycle_length", ".6f"), ("infeasible_cycles", None),
            ("std_error_available", None)]
    return [Report("Monte Carlo profit rate", cols, [row], notes)]


def _trend(values):
    if len(values) < 2:
        return "n/a"
    diffs = [b - a for a, b in zip(values, values[1:])]
    if all(d > 0 for d in diffs):
        return "increasing"
    if all(d < 0 for d in diffs):
        return "decreasing"
    if all(d == 0 for d in diffs):
        return "constant"
    return "non-monotone"


def _apply_sweep(sc: Scenario, param, value, targets):
    if param in SWEEP_ECON_PARAMS:
        return sc.replace(**{SWEEP_ECON_PARAMS[param]: value})
    stages = []
    for st in sc.stages:
        if st.label in targets:
            if param == "beta":
                st = type(st)(st.rate_raw, st.unit_cost, uniform_defects(value), st.label)
            elif param == "rate":
                st = type(st)(value, st.unit_cost, st.defect_dist, st.label)
            else:
                st = type(st)(st.rate_raw, value, st.defect_dist, st.label)
        stages.append(st)
    return sc.replace(stages=tuple(stages)).sorted_by_rate()


def cmd_sweep(catalog: Scenario, labels, param, grid, args, targets=None) -> list:
    """Re-optimise over a grid of one parameter; infeasible points are marked, not fatal."""
    if param not in SWEEP_STAGE_PARAMS and param not in SWEEP_ECON_PARAMS:
        raise ValueError(f"unknown sweep parameter {param!r}; choose from "
                         f"{list(SWEEP_STAGE_PARAMS) + list(SWEEP_ECON_PARAMS)}")
    if not grid:
        raise ValueError("sweep grid is empty")
    notes = []
    base = select_stages(catalog, labels, notes)
    targets = set(targets or base.labels)
    unknown = targets - set(base.labels)
    if unknown:
        raise KeyError(f"sweep target(s) {sorted(unknown)} not among selected stages {base.labels}")
    rows = []
    for value in grid:
        row = {"value": float(value)}
        try:
            sc = _apply_sweep(base, param, float(value), targets)
            sol = optimal_policy(_moments(sc, args), sc)
        except (ScreenEOQError, ValueError) as exc:
            row.update(y_star=math.nan, B_star=math.nan, etpu_star=math.nan,
                       status=f"infeasible: {exc}")
        else:
            row.update(y_star=sol.y_star, B_star=sol.b_star, etpu_star=sol.etpu_star,
                       status="ok" if not sol.diagnostics else "; ".join(sol.diagnostics))
        rows.append(row)
    ok = [r for r in rows if not math.isnan(r["y_star"])]
    trends = {k: _trend([r[k] for r in ok]) for k in ("y_star", "B_star", "etpu_star")}
    notes.append("trends over feasible points: "
                 + ", ".join(f"{k} {v}" for k, v in trends.items()))
    cols = [("value", ".4g"), ("y_star", ".2f"), ("B_star", ".2f"), ("etpu_star", ".2f"),
            ("status", None)]
    return [Report(f"Sweep of {param} over {'+'.join(base.labels)}", cols, rows, notes,
                   extra={"trends": trends})]


def _deviation(computed, published, tol):
    kind, limit = tol
    dev = abs(computed - published) if kind == "abs" else abs(computed / published - 1.0)
    return dev, dev <= limit


def reproduce_tables(catalog: Scenario, *, nodes=DEFAULT_QUADRATURE_NODES,
                     r_convention="additive") -> list:
    """Recompute the published single-, two- and three-stage tables cell by cell."""
    class _A:  # argparse-like holder for _moments
        quadrature_nodes = nodes
    _A.r_convention = r_convention

    reports = []
    single = {(k,): v for k, v in ref.SINGLE_STAGE.items()}
    tables = [("single", "Single screening processes", single),
              ("two", "Two screening processes", ref.TWO_STAGE),
              ("three", "Three screening processes", ref.THREE_STAGE)]
    for key, title, table in tables:
        tols = ref.TOLERANCES[key]
        rows = []
        for combo, published in table.items():
            sc = select_stages(catalog, list(combo))
            sol = optimal_policy(_moments(sc, _A), sc)
            got = {"y": sol.y_star, "B": sol.b_star, "etpu": sol.etpu_star}
            if "y1" in published:
                ap = approx_policy_n1(sc)
                got.update(y1=ap.y_star, B1=ap.b_star, etpu1=ap.etpu_star)
            for q, pub in published.items():
                dev, ok = _deviation(got[q], pub, tols[q])
                kind, limit = tols[q]
                rows.append({"stages": "+".join(combo), "quantity": q, "computed": got[q],
                             "published": pub, "deviation": dev,
                             "tolerance": f"{kind} {limit:g}", "status": "ok" if ok else "FAIL"})
        rep = Report(title, [("stages", None), ("quantity", None), ("computed", ".2f"),
                             ("published", ".2f"), ("deviation", ".2e"), ("tolerance", None),
                             ("status", None)], rows)
        rep.failed = any(r["status"] != "ok" for r in rows)
        if key == "single":
            gaps = [abs(1.0 - r_apx / r_ex) for r_ex, r_apx in _approx_gaps(rows)]
            rep.notes.append(f"largest relative ETPU gap of the approximation: {max(gaps):.3e}")
        reports.append(rep)
    return reports


def _approx_gaps(rows):
    by = {}
    for r in rows:
        by.setdefault(r["stages"], {})[r["quantity"]] = r["computed"]
    return [(v["etpu"], v["etpu1"]) for v in by.values()]


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _add_common(p):
    p.add_argument("--scenario", default=None,
                   help="scenario file (default: bundled seven-screen example)")
    p.add_argument("--format", choices=sorted(RENDERERS), default="md")
    p.add_argument("--minutes-per-year", type=float, default=None,
                   help="override the rate conversion factor of the scenario file")
    p.add_argument("--quadrature-nodes", type=int, default=DEFAULT_QUADRATURE_NODES)
    p.add_argument("--r-convention", choices=["exact", "additive"], default="exact",
                   help="defect share used inside R's expectation for n >= 2")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="screeneoq",
        description="Order size and backorder level for lots inspected by several screens")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize", help="closed-form optimal policy")
    _add_common(p)
    p.add_argument("--stages", action="append", required=True,
                   help="comma-separated stage labels; repeat for several rows")

    p = sub.add_parser("simulate", help="Monte Carlo estimate of the profit rate")
    _add_common(p)
    p.add_argument("--stages", required=True)
    p.add_argument("--y", type=float, default=None, help="order size (default: optimum)")
    p.add_argument("--B", type=float, default=None, help="maximum backorder (default: optimum)")
    p.add_argument("--cycles", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--antithetic", action="store_true")
    p.add_argument("--trace", default=None, help="write per-cycle CSV trace here")

    p = sub.add_parser("sweep", help="re-optimise over a parameter grid")
    _add_common(p)
    p.add_argument("--stages", required=True)
    p.add_argument("--param", required=True,
                   choices=list(SWEEP_STAGE_PARAMS) + list(SWEEP_ECON_PARAMS))
    p.add_argument("--grid", required=True, help="comma-separated values")
    p.add_argument("--target", default=None,
                   help="stage labels a stage parameter applies to (default: all selected)")

    p = sub.add_parser("reproduce-tables", help="recompute the published example tables")
    _add_common(p)
    p.set_defaults(r_convention="additive")
    return parser


def _load(args) -> Scenario:
    sc = parse_scenario(args.scenario or bundled_table1_path())
    if args.minutes_per_year is not None:
        sc = sc.replace(minutes_per_year=args.minutes_per_year)
    return sc


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        catalog = _load(args)
        if args.command == "optimize":
            reports = cmd_optimize(catalog, [_split_labels(s) for s in args.stages], args)
        elif args.command == "simulate":
            reports = cmd_simulate(catalog, _split_labels(args.stages), args)
        elif args.command == "sweep":
            grid = [float(v) for v in args.grid.split(",") if v.strip()]
            targets = _split_labels(args.target) if args.target else None
            reports = cmd_sweep(catalog, _split_labels(args.stages), args.param, grid, args,
                                targets)
        else:
            reports = reproduce_tables(catalog, nodes=args.quadrature_nodes,
                                       r_convention=args.r_convention)
    except (ScreenEOQError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_INVALID

    sys.stdout.write(RENDERERS[args.format](reports))
    if args.format != "md":
        for rep in reports:
            for note in rep.notes:
                print(note, file=sys.stderr)
    if any(rep.failed for rep in reports):
        return EXIT_TOLERANCE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
