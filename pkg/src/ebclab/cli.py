"""``ebclab`` command line.

Exit codes: 0 success, 1 usage or configuration error, 2 infeasible regime,
3 selftest failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import tempfile
import time
import warnings
from pathlib import Path
from typing import Sequence

from . import __version__, config
from .dtn import DtnKind, dtn_mode_multiplier
from .effective import effective_mesh, solve_effective
from .harness import InfeasibleRegime, emit_report, forcing, initial_data, run_experiment
from .radial import ball_l2_norm, build_mesh, n_steps_for, solve_full, write_snapshot_csv
from .regimes import check_sigma_delta_cubed, classify, classify_limits
from .selftest import run_selftest
from .spectral import SphereGeometry, lb_eigenvalue

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_SELFTEST = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit 2, which is reserved
        raise UsageError(message)


def write_atomic(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def cmd_classify(args) -> int:
    doc = config.load(args.config, "classify")
    if "law" in doc:
        law = config.law_from(doc)
        cell = classify(law)
        out = cell.to_dict()
        out["sigma_delta_cubed_ok"] = check_sigma_delta_cubed(law)
    else:
        cell = classify_limits(*config.limits_from(doc))
        out = cell.to_dict()
    sys.stdout.write(_dump(out))
    return EXIT_OK if cell.feasible else EXIT_INFEASIBLE


def cmd_dtn(args) -> int:
    if args.lmax < 0:
        raise UsageError("--lmax must be >= 0")
    try:
        H = config.parse_height(args.H)
        geom = SphereGeometry(args.R1, 2.0 * args.R1)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    rows = []
    for l in range(args.lmax + 1):
        lam = lb_eigenvalue(l, geom)
        rows.append((l, lam, *(dtn_mode_multiplier(k, lam, H)
                               for k in (DtnKind.COMBINED, DtnKind.FIRST, DtnKind.SECOND))))
    if args.json:
        keys = ("l", "lambda", "j_combined", "j1", "j2")
        sys.stdout.write(_dump([dict(zip(keys, r)) for r in rows]))
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(["l", "lambda", "j_combined", "j1", "j2"])
        for l, *vals in rows:
            w.writerow([l, *(repr(float(v)) for v in vals)])
    return EXIT_OK


def _run_solver(args, kind: str) -> int:
    doc = config.load(args.config, kind)
    geom = config.geometry_from(doc)
    T, dt, theta, stride = config.time_from(doc)
    try:
        n_steps = n_steps_for(T, dt)
        u0 = initial_data(doc["initial"]["preset"], doc["lmax"], geom, doc["initial"].get("params"))
        fdoc = doc.get("forcing", {"preset": "zero"})
        f = forcing(fdoc["preset"], geom, fdoc.get("params"))
    except ValueError as exc:
        raise config.ConfigError(str(exc)) from exc
    mesh_doc = doc.get("mesh", {})
    extra: dict = {}
    t0 = time.perf_counter()
    try:
        if kind == "solve_full":
            layer = config.layer_from(doc)
            mesh = build_mesh(layer, **mesh_doc)
            sols = solve_full(layer, u0, f, T, dt, theta, mesh=mesh, stride=stride, workers=args.threads)
        else:
            if "law" in doc:
                cell = classify(config.law_from(doc))
                if not cell.feasible:
                    raise InfeasibleRegime(cell.reason)
                family = cell.family
            else:
                family = config.family_from(doc)
            extra["family"] = family.to_dict()
            mesh = effective_mesh(geom, **mesh_doc)
            sols = solve_effective(family, geom, doc["k1"], doc["k2"], u0, f, T, dt, theta, mesh=mesh,
                                   stride=stride, workers=args.threads)
    except (ValueError, KeyError) as exc:
        if isinstance(exc, InfeasibleRegime):
            raise
        raise config.ConfigError(str(exc)) from exc
    wall = time.perf_counter() - t0

    out = Path(args.out)
    write_atomic(out / "snapshots.csv", write_snapshot_csv(sols).encode())
    summary = {
        "command": kind.replace("_", "-"),
        "final_time": n_steps * dt,
        "final_l2_norm": ball_l2_norm(sols, n_steps * dt) if sols else 0.0,
        "steps": n_steps,
        "modes": len(sols),
        "cells": mesh.n_cells,
        "wall_time_s": None if args.no_timing else wall,
        "version": __version__,
        **extra,
    }
    write_atomic(out / "summary.json", _dump(summary).encode())
    return EXIT_OK


def cmd_solve_full(args) -> int:
    return _run_solver(args, "solve_full")


def cmd_solve_ebc(args) -> int:
    return _run_solver(args, "solve_ebc")


def cmd_converge(args) -> int:
    doc = config.load(args.config, "converge")
    exp = config.experiment_from(doc, workers=args.threads)
    cell = classify(exp.law)
    if not cell.feasible:
        raise InfeasibleRegime(cell.reason)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            report = run_experiment(exp)
        except ValueError as exc:
            if isinstance(exc, InfeasibleRegime):
                raise
            raise config.ConfigError(str(exc)) from exc
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    out = Path(args.out)
    fmts = [f for f, on in (("csv", args.csv), ("json", args.json)) if on] or ["csv"]
    for fmt in fmts:
        write_atomic(out / f"report.{fmt}", emit_report(report, fmt))
    write_atomic(out / "report.gp", emit_report(report, "gnuplot", data_file="report.csv"))
    if "csv" in fmts:
        sys.stdout.write(emit_report(report, "csv").decode())
    return EXIT_OK


def cmd_selftest(args) -> int:
    results = run_selftest(args.seed)
    for r in results:
        print(f"{'PASS' if r.ok else 'FAIL'}  {r.name}: {r.detail}")
    failed = [r.name for r in results if not r.ok]
    if failed:
        print(f"selftest failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_SELFTEST
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ebclab", description="Thin-layer effective boundary condition laboratory.")
    p.add_argument("--version", action="version", version=f"ebclab {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def with_config(name: str, help_: str):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=True, metavar="PATH")
        return sp

    sp = with_config("classify", "classify a scaling law or limit triple")
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("dtn", help="tabulate DtN mode multipliers")
    sp.add_argument("--lmax", type=int, required=True)
    sp.add_argument("--H", required=True, help="strip height, a positive number or 'inf'")
    sp.add_argument("--R1", type=float, default=1.0)
    sp.add_argument("--json", action="store_true", help="JSON instead of CSV")
    sp.set_defaults(func=cmd_dtn)

    for name, func, help_ in (("solve-full", cmd_solve_full, "solve the layered problem"),
                              ("solve-ebc", cmd_solve_ebc, "solve an effective problem")):
        sp = with_config(name, help_)
        sp.add_argument("--out", default=".", metavar="DIR")
        sp.add_argument("--threads", type=int, default=1, metavar="N")
        sp.add_argument("--no-timing", action="store_true", help="omit wall time so outputs are byte-reproducible")
        sp.set_defaults(func=func)

    sp = with_config("converge", "run a delta -> 0 convergence experiment")
    sp.add_argument("--out", default=".", metavar="DIR")
    sp.add_argument("--threads", type=int, default=1, metavar="N")
    sp.add_argument("--json", action="store_true", help="write report.json")
    sp.add_argument("--csv", action="store_true", help="write report.csv (default when neither is given)")
    sp.set_defaults(func=cmd_converge)

    sp = sub.add_parser("selftest", help="fast invariant checks")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_selftest)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "threads", 1) < 1:
            raise UsageError("--threads must be >= 1")
        return args.func(args)
    except UsageError as exc:
        print(f"ebclab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except config.ConfigError as exc:
        print(f"ebclab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleRegime as exc:
        print(f"ebclab: infeasible regime: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
