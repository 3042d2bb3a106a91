"""Command line front-end: simulate, distance, sweep, check and replay.

Exit status: 0 when every verdict is true/⊤, 1 when some verdict is false/⊥,
2 when some verdict is unknown and none is ⊥, 3 on usage or parse errors.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .checker import CheckConfig, Checker, nominal, required_horizon
from .diagnostics import DiagnosticError, EvaluationError
from .dsl import MODELS_DIR, load_models, parse_query
from .dsl.printer import expr_text, formula_text, pert_text
from .expressions import DistanceExpr, HorizonError, hdepth
from .logic import Formula, ThreeValued
from .perturbation import Perturbation
from .rng import entropy_seed
from .sim import simulate, trajectories_csv

EXIT_OK, EXIT_FALSE, EXIT_UNKNOWN, EXIT_USAGE = 0, 1, 2, 3

# bundled model names and the files they load
BUNDLED = {
    "engine": ("engine.robtl", "engine-attacks.robtl"),
    "engine.robtl": ("engine.robtl", "engine-attacks.robtl"),
    "engine-attacks.robtl": ("engine.robtl", "engine-attacks.robtl"),
}


class UsageError(Exception):
    pass


def parse_range(text: str) -> tuple[int, int]:
    """``a..b`` (inclusive) or a single integer."""
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
        else:
            lo = hi = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or a range a..b, got {text!r}") from None
    if lo < 0 or hi < lo:
        raise argparse.ArgumentTypeError(f"empty or negative range {text!r}")
    return lo, hi


def parse_assignment(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep or not name.strip():
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    try:
        return name.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number in {text!r}") from None


def model_paths(models: Sequence[str]) -> list[Path]:
    out: list[Path] = []
    for m in models:
        p = Path(m)
        if p.exists():
            out.append(p)
        elif m in BUNDLED:
            out.extend(MODELS_DIR / f for f in BUNDLED[m])
        elif (MODELS_DIR / m).exists():
            out.append(MODELS_DIR / m)
        else:
            raise UsageError(f"model file not found: {m}")
    seen: list[Path] = []
    for p in out:
        if p.resolve() not in [q.resolve() for q in seen]:
            seen.append(p)
    return seen


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("models", nargs="+", help="model files sharing one namespace (or a bundled name: engine)")
    common.add_argument("--N", type=int, default=100, help="samples per time step (default 100)")
    common.add_argument("--seed", type=int, default=None, help="master seed; omitted means a fresh seed, printed")
    common.add_argument("--jobs", type=int, default=None, help="worker threads (default $ROBTL_JOBS or 1)")
    common.add_argument("--set", dest="overrides", action="append", type=parse_assignment, default=[],
                        metavar="NAME=VALUE", help="override a model constant (repeatable)")
    common.add_argument("--out", default=None, help="CSV output file (default stdout)")
    common.add_argument("--json", default=None, help="also write a JSON report here")
    common.add_argument("--timings", action="store_true", help="record wall-clock timings in the JSON report")

    stat = argparse.ArgumentParser(add_help=False)
    stat.add_argument("--l", dest="ell", type=int, default=10, help="amplification factor (default 10)")
    stat.add_argument("--m", type=int, default=50, help="bootstrap replicates (default 50)")
    stat.add_argument("--level", type=float, default=0.95, help="confidence level (default 0.95)")
    stat.add_argument("--h", type=int, default=None, help="horizon cap for shifted windows")

    ap = argparse.ArgumentParser(prog="robtl", description="Statistical model checking of RobTL formulae.")
    ap.add_argument("--version", action="version", version=f"robtl {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", parents=[common], help="sample the nominal evolution sequence")
    sp.add_argument("--k", type=int, required=True, help="number of steps")

    sp = sub.add_parser("distance", parents=[common, stat], help="per-time values of a distance expression")
    sp.add_argument("--expr", required=True)
    sp.add_argument("--perturb", required=True)
    sp.add_argument("--at", type=int, default=0, help="application time of the perturbation")
    sp.add_argument("--window", type=parse_range, required=True, metavar="A..B")
    sp.add_argument("--ci", action="store_true", help="add bootstrap confidence bounds")

    sp = sub.add_parser("sweep", parents=[common, stat], help="re-apply a perturbation at each time of a range")
    sp.add_argument("--expr", required=True)
    sp.add_argument("--perturb", required=True)
    sp.add_argument("--at", type=parse_range, required=True, metavar="A..B")
    sp.add_argument("--ci", action="store_true")

    sp = sub.add_parser("check", parents=[common, stat], help="verdicts of formulae")
    sp.add_argument("--formula", action="append", required=True, help="formula name or text (repeatable)")
    sp.add_argument("--at", type=parse_range, default=(0, 0), metavar="A..B", help="evaluation times")
    sp.add_argument("--three-valued", action="store_true", help="add the verdict with confidence intervals")

    sp = sub.add_parser("replay", help="re-run a JSON report and compare")
    sp.add_argument("report")
    sp.add_argument("--jobs", type=int, default=None)
    sp.add_argument("--out", default=None, help="write the reproduced report here")
    return ap


# -- execution

def _config(args, seed: int) -> CheckConfig:
    return CheckConfig(N=args.N, ell=getattr(args, "ell", 10), m=getattr(args, "m", 50),
                       level=getattr(args, "level", 0.95), seed=seed, h=getattr(args, "h", None), jobs=args.jobs)


def _fmt(x: Optional[float]) -> str:
    return "" if x is None else repr(float(x))


def _csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _query(text: str, doc, kind: str):
    obj = parse_query(text, doc, None if text.strip().isidentifier() else kind)
    expected = {"expression": DistanceExpr, "perturbation": Perturbation, "formula": Formula}[kind]
    if not isinstance(obj, expected):
        raise UsageError(f"{text!r} is not a {kind}")
    return obj


def _value_rows(series, ci: bool):
    rows, js = [], []
    for t, v, c in series:
        lo, hi = (c.lo, c.hi) if ci else (None, None)
        rows.append([t, _fmt(v), _fmt(lo), _fmt(hi)])
        js.append({"time": t, "value": v, "ci_lo": lo, "ci_hi": hi})
    return rows, js


def execute(params: dict, jobs: Optional[int] = None) -> tuple[dict, str, int]:
    """Run one command described by ``params``; returns (report, csv text, exit status)."""
    cmd = params["command"]
    paths = [Path(p) for p in params["models"]]
    overrides = dict(params["overrides"])
    doc = load_models(paths, overrides)
    args = argparse.Namespace(**params["config"], jobs=jobs)
    cfg = _config(args, params["config"]["seed"])
    report = {
        "robtl": __version__,
        "command": cmd,
        "models": [str(p) for p in paths],
        "model_sha256": hashlib.sha256("".join(p.read_text(encoding="utf-8") for p in paths).encode()).hexdigest(),
        "overrides": overrides,
        "config": params["config"],
        "query": params["query"],
    }
    timings: dict[str, float] = {}
    clock = time.perf_counter()
    status = EXIT_OK
    q = params["query"]

    if cmd == "simulate":
        E = simulate(doc.kernel, doc.init, cfg.N, q["k"], cfg.seed, jobs=jobs)
        timings["simulate"] = time.perf_counter() - clock
        text = trajectories_csv(E)
        report["columns"] = ["time", "trajectory", *E.space.names]
        report["rows"] = len(E.sets) * cfg.N

    elif cmd in ("distance", "sweep"):
        expr = _query(q["expr"], doc, "expression")
        pert = _query(q["perturb"], doc, "perturbation")
        report["resolved"] = {"expr": expr_text(expr), "perturb": pert_text(pert)}
        if cmd == "distance":
            a, b = q["window"]
            end = max(b, q["at"])
        else:
            a, b = q["at"]
            end = b
        k = end + hdepth(expr) if cfg.h is None else min(end + hdepth(expr), cfg.h)
        E = nominal(doc.kernel, doc.init, k, cfg)
        timings["simulate"] = time.perf_counter() - clock
        chk = Checker(E, cfg)
        if cmd == "distance":
            series = chk.series(expr, pert, q["at"], range(a, b + 1), with_ci=q["ci"])
        else:
            series = []
            for t in range(a, b + 1):
                if q["ci"]:
                    v, c = chk.distance_ci(expr, pert, t)
                else:
                    v, c = chk.distance(expr, pert, t), None
                series.append((t, v, c))
        timings["evaluate"] = time.perf_counter() - clock - timings["simulate"]
        rows, js = _value_rows(series, q["ci"])
        text = _csv(["time", "value", "ci_lo", "ci_hi"], rows)
        report["rows"] = js

    elif cmd == "check":
        formulas = [(name, _query(name, doc, "formula")) for name in q["formula"]]
        a, b = q["at"]
        k = max(required_horizon(f, cfg, b) for _, f in formulas)
        E = nominal(doc.kernel, doc.init, k, cfg)
        timings["simulate"] = time.perf_counter() - clock
        chk = Checker(E, cfg)
        three = q["three_valued"]
        header = ["formula", "time", "verdict"] + (["omega", "omega_code"] if three else [])
        rows, js = [], []
        worst = ThreeValued.TRUE
        for name, f in formulas:
            for t in range(a, b + 1):
                verdict = chk.eval_bool(f, t)
                row = [name, t, "true" if verdict else "false"]
                entry = {"formula": name, "text": formula_text(f), "time": t, "verdict": verdict}
                if three:
                    w = chk.omega(f, t)
                    row += [w.symbol, int(w)]
                    entry["omega"] = w.word
                    entry["omega_code"] = int(w)
                    worst = min(worst, w)
                else:
                    worst = min(worst, ThreeValued.lift(verdict))
                rows.append(row)
                js.append(entry)
        timings["evaluate"] = time.perf_counter() - clock - timings["simulate"]
        text = _csv(header, rows)
        report["rows"] = js
        status = {ThreeValued.TRUE: EXIT_OK, ThreeValued.UNKNOWN: EXIT_UNKNOWN, ThreeValued.FALSE: EXIT_FALSE}[worst]
    else:
        raise UsageError(f"unknown command {cmd}")

    report["exit_status"] = status
    if params.get("timings"):
        timings["total"] = time.perf_counter() - clock
        report["timings"] = timings
    return report, text, status


def params_from_args(args) -> dict:
    seed = args.seed
    if seed is None:
        seed = entropy_seed()
        print(f"robtl: using seed {seed}", file=sys.stderr)
    config = {"N": args.N, "seed": seed}
    if args.command != "simulate":
        config.update(ell=args.ell, m=args.m, level=args.level, h=args.h)
    if args.command == "simulate":
        query = {"k": args.k}
    elif args.command == "distance":
        query = {"expr": args.expr, "perturb": args.perturb, "at": args.at, "window": list(args.window),
                 "ci": args.ci}
    elif args.command == "sweep":
        query = {"expr": args.expr, "perturb": args.perturb, "at": list(args.at), "ci": args.ci}
    else:
        query = {"formula": args.formula, "at": list(args.at), "three_valued": args.three_valued}
    return {"command": args.command, "models": [str(p) for p in model_paths(args.models)],
            "overrides": dict(args.overrides), "config": config, "query": query, "timings": args.timings}


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _write(path: Optional[str], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _replay(args) -> int:
    old = json.loads(Path(args.report).read_text(encoding="utf-8"))
    params = {k: old[k] for k in ("command", "models", "overrides", "config", "query")}
    params["timings"] = False
    new, _, status = execute(params, args.jobs)
    if args.out:
        _write(args.out, report_json(new))
    old.pop("timings", None)
    if old != new:
        changed = sorted(k for k in set(old) | set(new) if old.get(k) != new.get(k))
        print(f"robtl: replay differs in: {', '.join(changed)}", file=sys.stderr)
        return EXIT_FALSE
    print("robtl: replay reproduced the report", file=sys.stderr)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    try:
        if args.command == "replay":
            return _replay(args)
        params = params_from_args(args)
        CheckConfig(N=args.N, ell=getattr(args, "ell", 10), m=getattr(args, "m", 50),
                    level=getattr(args, "level", 0.95), seed=params["config"]["seed"], h=getattr(args, "h", None))
        report, text, status = execute(params, args.jobs)
    except DiagnosticError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, HorizonError, ValueError, OSError) as e:
        print(f"robtl: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except EvaluationError as e:
        print(f"robtl: evaluation error: {e}", file=sys.stderr)
        return EXIT_USAGE
    _write(args.out, text)
    if args.json:
        _write(args.json, report_json(report))
    return status


if __name__ == "__main__":
    raise SystemExit(main())
