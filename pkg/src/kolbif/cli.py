"""Command-line front end: ``kolbif analyze|curves|diagram|portrait|verify``.

Exit codes: 0 success, 1 verification or table failure, 2 p12*p22 >= 0,
3 degenerate coefficients, 4 a = 0 with d = 0, 64 usage or config error,
70 any other analysis error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .classify import classify_all
from .config import ConfigError, RunConfig, build_config, load_config, parse_formats, parse_mu
from .curves import (
    CaseId,
    DiagramCase,
    curve_H,
    curves_csv,
    dispatch_case,
    hopf_point,
    node_focus_admissibility,
    quad_coeffs,
    slope_ordering,
)
from .diagram import build_report, render_curves, render_diagram, verify_tables
from .equilibria import all_equilibria
from .errors import KolbifError, NoCycleFound, OutOfScopeError
from .model import ParamPoint
from .portrait import detect_cycle, lyapunov_l1, phase_portrait, render_portrait
from .presets import PRESETS
from .verify import run_all

EXIT_FAIL = 1
EXIT_USAGE = 64
EXIT_SOFTWARE = 70


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage, which is reserved for the sign case."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def jsonable(obj):
    """Replace non-finite floats by None so the output is strict JSON."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    return obj


def dump_json(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _write(cfg: RunConfig, name: str, text: str) -> Path:
    cfg.out.mkdir(parents=True, exist_ok=True)
    path = cfg.out / name
    path.write_text(text, encoding="utf-8")
    return path


def _svg_path(cfg: RunConfig, name: str) -> Path:
    cfg.out.mkdir(parents=True, exist_ok=True)
    return cfg.out / name


def _case(cfg: RunConfig) -> tuple[DiagramCase, dict]:
    c, orientation = cfg.coefficients()
    case = dispatch_case(c, cfg.tolerances.tol_a)
    frame = {"orientation": orientation.name.lower(), "time_factor": orientation.time_factor}
    return case, frame


def _curve_rows(case: DiagramCase) -> list[dict]:
    rows = []
    for cv in case.curves:
        rows.append(
            {
                "kind": cv.kind.value,
                "family": cv.kind.family,
                "slope": cv.slope,
                "curvature": cv.curvature,
                "angle_deg": math.degrees(cv.angle),
                "halfplane": cv.halfplane,
                "omega": cv.omega,
            }
        )
    return rows


def _equilibria_at(cfg: RunConfig, case: DiagramCase, mu: ParamPoint) -> dict:
    tol = cfg.tolerances
    c = case.coefficients
    eqs = all_equilibria(c, mu, tol.tol_eq, tol.tol_geom)
    out = {}
    for tag, cl in classify_all(c, mu, eqs, tol.tol_class).items():
        e = cl.equilibrium
        out[tag.value] = {
            "exists": e.exists,
            "state": [e.state.xi1, e.state.xi2] if e.exists else None,
            "in_q1": e.in_q1,
            "type": cl.cls.kind.value if cl.cls else None,
            "code": cl.status,
            "eigenvalues": [[z.real, z.imag] for z in cl.eigen.sorted()] if cl.eigen else None,
            "diagnostic": e.diagnostic,
        }
    out["collisions"] = [[a.value, b.value] for a, b in eqs.collisions]
    return out


# ---------------------------------------------------------------- commands


def cmd_analyze(cfg: RunConfig) -> int:
    case, frame = _case(cfg)
    c = case.coefficients
    qc = quad_coeffs(c)
    report = {
        "frame": frame,
        "coefficients": c.as_dict(),
        "case": case.id.value,
        "conditions": case.case_conditions,
        "quadratic_form": {"a": qc.a, "b": qc.b, "c": qc.c, "Delta": qc.Delta, "e1": qc.e1, "e2": qc.e2},
        "curves": _curve_rows(case),
        "node_focus_admissible": node_focus_admissibility(c, qc),
        "hopf_admissible": curve_H(c) is not None,
        "radius": cfg.radius,
    }
    if "d" in case.case_conditions:
        report["cubic_d"] = case.case_conditions["d"]
    if case.id is CaseId.VII:
        so = slope_ordering(c, qc)
        report["slope_chain"] = [[k, m] for k, m in so.order]
    mu = cfg.param_point()
    if mu is not None:
        report["mu"] = list(mu)
        report["equilibria"] = _equilibria_at(cfg, case, mu)
    text = dump_json(report)
    sys.stdout.write(text)
    if "json" in cfg.formats:
        _write(cfg, "analysis.json", text)
    return 0


def cmd_curves(cfg: RunConfig) -> int:
    case, frame = _case(cfg)
    if "json" in cfg.formats:
        _write(cfg, "curves.json", dump_json({"case": case.id.value, "frame": frame, "curves": _curve_rows(case)}))
    if "csv" in cfg.formats:
        _write(cfg, "curves.csv", curves_csv(case.curves, cfg.radius))
    if "svg" in cfg.formats:
        render_curves(case, cfg.radius, _svg_path(cfg, "curves.svg"))
    print(f"case {case.id.value}: " + ", ".join(cv.kind.value for cv in case.curves))
    return 0


def cmd_diagram(cfg: RunConfig) -> int:
    case, frame = _case(cfg)
    report = build_report(case, cfg.radius, eps_param=cfg.radius)
    check = verify_tables(report)
    body = report.as_dict()
    body["frame"] = frame
    body["table_check"] = {"passed": check.passed, "matched": sorted(check.matched), "problems": check.problems}
    if "json" in cfg.formats:
        _write(cfg, "diagram.json", dump_json(body))
    if "csv" in cfg.formats:
        _write(cfg, "regions.csv", report.regions_csv())
    if "svg" in cfg.formats:
        render_diagram(report, _svg_path(cfg, "diagram.svg"))
    print(f"case {case.id.value}: regions {[r.index for r in report.regions]}")
    for msg in check.problems:
        print(f"problem: {msg}", file=sys.stderr)
    return 0 if check.passed else EXIT_FAIL


def cmd_portrait(cfg: RunConfig, seeds: int, hopf: bool) -> int:
    case, frame = _case(cfg)
    c = case.coefficients
    mu = cfg.param_point()
    if mu is None:
        raise ConfigError("portrait needs a parameter point: --mu MU1,MU2 or [analysis] mu")
    mu.check_radius(cfg.radius)
    portrait = phase_portrait(c, mu, n_seeds=seeds, rtol=cfg.tolerances.rtol, atol=cfg.tolerances.atol)
    summary = portrait.summary()
    summary["case"] = case.id.value
    summary["frame"] = frame
    if hopf:
        summary["hopf"] = _hopf_summary(case, mu, portrait)
    if "json" in cfg.formats:
        _write(cfg, "portrait.json", dump_json(summary))
    if "csv" in cfg.formats:
        _write(cfg, "orbits.csv", portrait.orbits_csv())
    if "svg" in cfg.formats:
        render_portrait(portrait, _svg_path(cfg, "portrait.svg"))
    print(f"case {case.id.value}, mu = ({mu.mu1:g}, {mu.mu2:g}): {len(portrait.orbits)} orbits")
    return 0


def _hopf_summary(case: DiagramCase, mu: ParamPoint, portrait) -> dict:
    c = case.coefficients
    if curve_H(c) is None or mu.mu1 <= 0:
        return {"available": False, "reason": "no Hopf curve at this mu1"}
    data = lyapunov_l1(c, hopf_point(c, mu.mu1))
    out = {"available": True, **data.as_dict()}
    try:
        cycle = detect_cycle(c, mu)
    except (NoCycleFound, KolbifError) as err:
        out["cycle"] = {"found": False, "reason": str(err)}
    else:
        portrait.orbits.append(cycle)
        out["cycle"] = {"found": True, "radius": cycle.radius, "period": cycle.period}
    return out


def cmd_verify(cfg: RunConfig) -> int:
    def progress(res):
        print(res.line(), flush=True)

    results = run_all(seed=cfg.seed, radius=cfg.radius, progress=progress)
    passed = all(r.passed for r in results)
    summary = {"passed": passed, "seed": cfg.seed, "checks": [r.as_dict() for r in results]}
    if "json" in cfg.formats:
        _write(cfg, "verify.json", dump_json(summary))
    if not passed:
        first = next(r for r in results if not r.passed)
        print(f"first failure: {first.name}", file=sys.stderr)
        print(dump_json(first.detail), file=sys.stderr)
        return EXIT_FAIL
    return 0


# ---------------------------------------------------------------- parser


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="INI file with [coefficients] or [raw] and optional sections")
    p.add_argument("--out", metavar="DIR", help="output directory (default kolbif-out)")
    p.add_argument("--radius", type=float, metavar="R", help="analysis radius in the parameter plane")
    p.add_argument("--seed", type=int, metavar="N", help="seed for randomized sweeps")
    p.add_argument("--format", metavar="LIST", help="comma list of svg,csv,json")
    p.add_argument("--case-params", metavar="NAME", choices=list(PRESETS), help="built-in coefficient set")
    p.add_argument("--mu", metavar="MU1,MU2", help="parameter point (use --mu=-a,b when mu1 is negative)")
    p.add_argument(
        "--set", action="append", default=[], metavar="SECTION.KEY=VALUE", help="override one config key"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kolbif", description="Local bifurcation analysis of a planar Kolmogorov system.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, text in (
        ("analyze", "case dispatch, curve slopes and form coefficients"),
        ("curves", "bifurcation curves as CSV, JSON and SVG"),
        ("diagram", "region signatures checked against the table columns"),
        ("portrait", "phase portrait at one parameter point"),
        ("verify", "run the full property suite"),
    ):
        p = sub.add_parser(name, help=text, description=text)
        _common(p)
        if name == "portrait":
            p.add_argument("--seeds", type=int, default=6, help="seed grid is SEEDS x SEEDS")
            p.add_argument("--hopf", action="store_true", help="add l1 and a cycle search near the Hopf curve")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cp = load_config(args.config, args.set, args.case_params)
    return build_config(
        cp,
        out=Path(args.out) if args.out else None,
        radius=args.radius,
        seed=args.seed,
        formats=parse_formats(args.format) if args.format else None,
        mu=parse_mu(args.mu) if args.mu else None,
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        if args.command == "analyze":
            return cmd_analyze(cfg)
        if args.command == "curves":
            return cmd_curves(cfg)
        if args.command == "diagram":
            return cmd_diagram(cfg)
        if args.command == "portrait":
            return cmd_portrait(cfg, args.seeds, args.hopf)
        return cmd_verify(cfg)
    except OutOfScopeError as err:
        print(f"out of scope: {err}", file=sys.stderr)
        return err.exit_code
    except (ConfigError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except KolbifError as err:
        print(f"analysis error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_SOFTWARE


if __name__ == "__main__":
    sys.exit(main())
