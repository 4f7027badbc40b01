"""Command-line front end.

Exit codes: 0 when every check passes, 1 when at least one verification
fails (the report is still written), 2 for invalid input or usage.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .connection import ConnectionError_, build_connection, levi_civita_compare
from .curvature import (
    FlatInconsistency,
    curvature_tensor,
    ricci_contractions,
    verify_bianchi,
    verify_curvature_symmetries,
    verify_ricci_identities,
    verify_vertical_curvature,
)
from .exact import Q
from .forms import fundamental_four_form, verify_four_form, verify_structure_equations
from .models import (
    GaugeError,
    ModelFileError,
    builtin_heisenberg,
    builtin_l0,
    dumps_model,
    gauge_transform,
    load_model,
    random_gauge,
)
from .report import Ledger, jsonable
from .sasakian import EinsteinInconsistency, classify, formal_dga_verify
from .structure import NoReebSolution, PqcStructure, solve_reeb, validate_pqc

__all__ = ["main", "run_command", "REPORT_SCHEMA"]

REPORT_SCHEMA = 1
SUITES = ("all", "ricci", "bianchi", "structure", "forms")
THREADS_ENV = "PQC_THREADS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _rational(text: str):
    try:
        return Q(text)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default=argparse.SUPPRESS, help="report format (default json)")

    p = _Parser(prog="pqc", description="Exact verification of paraquaternionic contact structures on Lie algebra models.")
    p.add_argument("--version", action="version", version=f"pqc {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("builtin", help="write a built-in model", parents=[common])
    bsub = b.add_subparsers(dest="family", required=True, parser_class=_Parser)
    bh = bsub.add_parser("heisenberg", parents=[common])
    bh.add_argument("--n", type=int, required=True)
    bh.add_argument("--out")
    bl = bsub.add_parser("l0", parents=[common])
    bl.add_argument("--c", type=_rational, required=True)
    bl.add_argument("--out")

    for name, helptext in (("validate", "check the model data"), ("reeb", "solve for the Reeb fields"), ("classify", "classify the model")):
        s = sub.add_parser(name, help=helptext, parents=[common])
        s.add_argument("file")

    v = sub.add_parser("verify", help="run verification suites", parents=[common])
    v.add_argument("files", nargs="+", metavar="FILE")
    v.add_argument("--suite", choices=SUITES, default="all")

    g = sub.add_parser("gauge", help="apply a seeded random gauge transformation", parents=[common])
    g.add_argument("file")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--rescale", type=_rational, default=Q(1))
    g.add_argument("--out")

    sub.add_parser("formal-sasakian", help="formal graded-algebra checks", parents=[common])
    return p


def _model_meta(st: PqcStructure) -> dict:
    return {"name": st.name, "n": st.n, "dim": st.model.dim, "metadata": st.metadata}


def _report(command: str, suites: list[Ledger], model: dict | None = None, extra: dict | None = None, error: str | None = None) -> dict:
    ok = all(l.passed for l in suites) and error is None
    out = {"schema": REPORT_SCHEMA, "engine": "pqc", "engine_version": __version__, "command": command}
    if model is not None:
        out["model"] = model
    out["status"] = "pass" if ok else "fail"
    if error is not None:
        out["error"] = error
    out["suites"] = [l.to_dict() for l in suites]
    if extra:
        out.update(extra)
    return jsonable(out)


def _pipeline_failure(led: Ledger, id: str, anchor: str, exc: Exception) -> Ledger:
    led.record(id, anchor, {"error": str(exc)})
    return led


def verify_structure(st: PqcStructure, suite: str = "all") -> dict:
    """Run the suites in dependency order; stop at the first stage that cannot proceed."""
    ledgers: list[Ledger] = []
    meta = _model_meta(st)
    val = validate_pqc(st)
    ledgers.append(val)
    if not val.passed:
        return _report("verify", ledgers, meta)
    try:
        reeb = solve_reeb(st)
    except NoReebSolution as exc:
        ledgers.append(_pipeline_failure(Ledger("reeb"), "reeb-solution", "unique xi_s with eta_s(xi_t) = delta_st and the Reeb conditions", exc))
        return _report("verify", ledgers, meta)
    ledgers.append(reeb.checks)
    try:
        conn = build_connection(st, reeb)
    except ConnectionError_ as exc:
        ledgers.append(_pipeline_failure(Ledger("connection"), "connection", "canonical connection exists", exc))
        return _report("verify", ledgers, meta)
    ledgers.append(conn.checks)
    cd = ricci_contractions(curvature_tensor(conn))
    if suite in ("all", "ricci"):
        ledgers.append(levi_civita_compare(conn))
        ledgers.append(verify_curvature_symmetries(cd))
        ledgers.append(verify_ricci_identities(cd))
        ledgers.append(verify_vertical_curvature(cd))
    if suite in ("all", "bianchi"):
        ledgers.append(verify_bianchi(cd))
    data = None
    if suite in ("all", "structure", "forms"):
        data = fundamental_four_form(conn)
    if suite in ("all", "structure"):
        ledgers.append(verify_structure_equations(cd, data))
    if suite in ("all", "forms"):
        ledgers.append(verify_four_form(conn, data))
    extra = {"suite": suite, "invariants": {"lambda": conn.lam, "Scal": cd.scal}}
    if suite == "all":
        led = Ledger("classification")
        try:
            verdict = classify(cd)
            led.record("classified", "flat, para 3-Sasakian candidate, pqc-Einstein or generic", None)
            extra["classification"] = verdict.to_dict()
        except (FlatInconsistency, EinsteinInconsistency) as exc:
            led.record("classified", "flat, para 3-Sasakian candidate, pqc-Einstein or generic", {"error": str(exc)})
        ledgers.append(led)
    return _report("verify", ledgers, meta, extra)


def _verify_file(args: tuple[str, str]) -> dict:
    path, suite = args
    return verify_structure(load_model(path, check_jacobi=False), suite)


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        k = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    if k < 1:
        raise UsageError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return k


def _text(report: dict) -> str:
    lines = [f"pqc {report['engine_version']} {report['command']}"]
    model = report.get("model")
    if model:
        lines.append(f"model: {model['name'] or '(unnamed)'} n={model['n']} dim={model['dim']}")
    if "error" in report:
        lines.append(f"error: {report['error']}")
    for suite in report.get("suites", []):
        lines.append(f"[{suite['suite']}] {suite['status'].upper()}")
        for e in suite["entries"]:
            lines.append(f"  {e['status'].upper():4} {e['id']}: {e['anchor']}")
            if "witness" in e:
                lines.append(f"       witness: {json.dumps(e['witness'], sort_keys=True)}")
            if "note" in e:
                lines.append(f"       note: {e['note']}")
    for key in ("classification", "invariants", "xi", "gauge", "label"):
        if key in report:
            lines.append(f"{key}: {json.dumps(report[key], sort_keys=True)}")
    lines.append(f"overall: {report['status'].upper()}")
    return "\n".join(lines) + "\n"


def _emit(report: dict, fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(report, indent=2, ensure_ascii=False) + "\n")
    else:
        out.write(_text(report))


def _write_model(st: PqcStructure, dest: str | None, fmt: str, out, command: str, extra: dict | None = None) -> None:
    text = dumps_model(st)
    if dest:
        Path(dest).write_text(text, encoding="utf-8")
        report = _report(command, [], _model_meta(st), dict(extra or {}, written=dest))
        _emit(report, fmt, out)
    elif fmt == "json":
        out.write(text)
    else:
        out.write(_text(_report(command, [], _model_meta(st), extra)))


def run_command(argv: list[str], out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = _parser().parse_args(argv)
        return _dispatch(args, out)
    except UsageError as exc:
        err.write(f"pqc: usage error: {exc}\n")
        return 2
    except (ModelFileError, GaugeError, ValueError) as exc:
        err.write(f"pqc: invalid input: {exc}\n")
        return 2


def _dispatch(args, out) -> int:
    fmt = getattr(args, "format", "json")
    if args.command == "builtin":
        if args.family == "heisenberg":
            if args.n < 1:
                raise UsageError("--n must be a positive integer")
            st = builtin_heisenberg(args.n)
        else:
            st = builtin_l0(args.c)
        _write_model(st, args.out, fmt, out, "builtin")
        return 0

    if args.command == "formal-sasakian":
        report = _report("formal-sasakian", [formal_dga_verify()])
        _emit(report, fmt, out)
        return 0 if report["status"] == "pass" else 1

    if args.command == "verify":
        k = _threads()
        jobs = [(f, args.suite) for f in args.files]
        if k > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=k) as pool:
                reports = list(pool.map(_verify_file, jobs))
        else:
            reports = [_verify_file(j) for j in jobs]
        for path, report in zip(args.files, reports):
            report["file"] = Path(path).name
            _emit(report, fmt, out)
        return 0 if all(r["status"] == "pass" for r in reports) else 1

    st = load_model(args.file, check_jacobi=args.command == "gauge")
    if args.command == "validate":
        report = _report("validate", [validate_pqc(st)], _model_meta(st))
    elif args.command == "reeb":
        val = validate_pqc(st)
        ledgers = [val]
        extra = {}
        try:
            reeb = solve_reeb(st)
            ledgers.append(reeb.checks)
            extra["xi"] = {f"xi{s}": {st.labels[a]: reeb.xi[s - 1][a] for a in range(st.model.dim) if reeb.xi[s - 1][a] != 0} for s in (1, 2, 3)}
        except NoReebSolution as exc:
            ledgers.append(_pipeline_failure(Ledger("reeb"), "reeb-solution", "unique xi_s with eta_s(xi_t) = delta_st and the Reeb conditions", exc))
        report = _report("reeb", ledgers, _model_meta(st), extra)
    elif args.command == "classify":
        val = validate_pqc(st)
        if not val.passed:
            report = _report("classify", [val], _model_meta(st))
        else:
            try:
                verdict = classify(st)
                report = _report("classify", [val], _model_meta(st), {"label": verdict.label, "classification": verdict.to_dict()})
            except (NoReebSolution, ConnectionError_, FlatInconsistency, EinsteinInconsistency) as exc:
                report = _report("classify", [val], _model_meta(st), error=f"{type(exc).__name__}: {exc}")
    elif args.command == "gauge":
        gt = random_gauge(st, args.seed, rescale=args.rescale)
        new = gauge_transform(st, gt)
        extra = {"gauge": {"seed": args.seed, "rescale": args.rescale}}
        if args.out:
            _write_model(new, args.out, fmt, out, "gauge", extra)
        else:
            _write_model(new, None, fmt, out, "gauge", extra)
        return 0
    else:  # pragma: no cover - argparse restricts the choices
        raise UsageError(f"unknown command {args.command}")
    _emit(report, fmt, out)
    return 0 if report["status"] == "pass" else 1


def main(argv: list[str] | None = None) -> int:
    return run_command(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
