"""
Command-line front end.

Subcommands: ``dist``, ``law``, ``verify``, ``sweep``, ``calibrate``.

Exit codes: 0 success, 1 a verification check failed, 2 usage error,
3 work budget exceeded. CSV output has a header line and full round-trip
float precision; JSON output is one object with ``meta`` and ``data``.
Output goes to stdout unless ``--out`` is given, in which case the file is
written atomically.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
import tempfile

import numpy as np
import scipy

from . import __version__
from . import harness as H
from . import laws as L
from .walk import DEFAULT_BUDGET, MIXED, BudgetExceeded, InitialSpec, Pure, WalkSpec, distribution
from .verify import run_suite, suite_names

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


# formatting --------------------------------------------------------------------


def _num(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_num(v) for v in row) + "\n")
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def to_json(meta: dict, data) -> str:
    return json.dumps({"meta": _jsonable(meta), "data": _jsonable(data)}, indent=2, allow_nan=False) + "\n"


def write_output(text: str, path: str | None) -> None:
    """Write to stdout, or atomically to ``path`` (temp file + rename)."""
    if not path or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    target = os.path.abspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(target), prefix=".mcqw-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _meta(args, **extra) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func",)}
    return {
        "command": args.command,
        "config": cfg,
        "seed": getattr(args, "seed", None),
        "versions": {"mcqw": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
        **extra,
    }


# init parsing --------------------------------------------------------------------


def parse_init(text: str, M: int) -> tuple[InitialSpec, dict]:
    """
    ``caseA``, ``caseB``, ``ket1``, ``mix:beta=X`` or ``file=PATH``.

    The file holds a JSON list with one entry per coin: ``"mixed"`` or
    ``[[re, im], [re, im]]``.
    """
    if text in ("caseA", "caseB", "ket1"):
        init = {"caseA": InitialSpec.case_a, "caseB": InitialSpec.case_b, "ket1": InitialSpec.ket1}[text](M)
    elif text.startswith("mix:"):
        key, _, val = text[4:].partition("=")
        if key != "beta":
            raise UsageError("mix init takes beta=X")
        try:
            beta = float(val)
        except ValueError as exc:
            raise UsageError(f"bad beta {val!r}") from exc
        if not 0.0 <= beta <= 1.0:
            raise UsageError("beta must lie in [0, 1]")
        init = InitialSpec.mixture(M, min(M, int(round(M**beta))))
    elif text.startswith("file="):
        init = _init_from_file(text[5:], M)
    else:
        raise UsageError(f"unknown init {text!r}")
    return init, {"n_pure": init.M - init.n_mixed, "n_mixed": init.n_mixed}


def _init_from_file(path: str, M: int) -> InitialSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            entries = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read init file: {exc}") from exc
    if not isinstance(entries, list) or len(entries) != M:
        raise UsageError(f"init file must list exactly M = {M} coins")
    coins = []
    for e in entries:
        if e == "mixed":
            coins.append(MIXED)
            continue
        try:
            vec = [complex(float(re), float(im)) for re, im in e]
            coins.append(Pure.of(vec))
        except (TypeError, ValueError) as exc:
            raise UsageError(f"bad coin entry {e!r}: {exc}") from exc
    return InitialSpec(tuple(coins))


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad {what} list {text!r}") from exc


# commands -------------------------------------------------------------------------


def cmd_dist(args) -> int:
    if args.M < 1 or args.t < 0:
        raise UsageError("need M >= 1 and t >= 0")
    init, counts = parse_init(args.init, args.M)
    dist = distribution(WalkSpec(args.M, args.t), init, budget=args.budget)
    x = dist.positions[::2]
    p = dist.mass[::2]
    if args.format == "json":
        data = {"t": args.t, "M": args.M, "x": x, "mass": p}
        text = to_json(_meta(args, realized=counts), data)
    else:
        text = to_csv(["x", "probability"], zip(x, p))
    write_output(text, args.out)
    return EXIT_OK


def _grid(args) -> np.ndarray:
    if args.grid:
        parts = args.grid.split(",")
        if len(parts) != 3:
            raise UsageError("--grid takes lo,hi,n")
        try:
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise UsageError(f"bad grid {args.grid!r}") from exc
        if n < 1:
            raise UsageError("grid needs n >= 1")
        return np.linspace(lo, hi, n)
    return np.array(args.x, dtype=np.float64)


def cmd_law(args) -> int:
    try:
        law = L.parse_law(args.name)
    except L.UnknownLaw as exc:
        raise UsageError(str(exc)) from exc
    query = [q for q in ("density", "cdf", "moment", "sample") if getattr(args, q) is not None]
    if len(query) != 1:
        raise UsageError("choose exactly one of --density, --cdf, --moment, --sample")
    q = query[0]
    if args.format is None:
        args.format = "json" if q == "moment" else "csv"
    meta = _meta(args, law=law.name)
    if q in ("density", "cdf"):
        args.x = getattr(args, q)
        x = _grid(args)
        if x.size == 0:
            raise UsageError(f"--{q} needs points or --grid")
        try:
            y = law.density(x) if q == "density" else law.cdf(x)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        if args.format == "json":
            text = to_json(meta, {"query": q, "x": x, "value": y})
        else:
            text = to_csv(["x", "value"], zip(x, y))
    elif q == "moment":
        if not 0 <= args.moment <= 8:
            raise UsageError("moment order must be in 0..8")
        val = L.moment(law, args.moment)
        if args.format == "csv":
            text = to_csv(["n", "value"], [(args.moment, val)])
        else:
            text = to_json(meta, {"query": "moment", "n": args.moment, "value": val})
    else:
        if args.sample < 1:
            raise UsageError("--sample needs n >= 1")
        s = L.sample(law, args.sample, args.seed)
        if args.format == "json":
            text = to_json(meta, {"query": "sample", "value": s})
        else:
            text = to_csv(["i", "value"], enumerate(s))
    write_output(text, args.out)
    return EXIT_OK


def _budget_failed(checks) -> bool:
    return any(c.name.endswith("_complete") and not c.passed for c in checks)


def cmd_verify(args) -> int:
    if args.suite not in suite_names():
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(suite_names())}")
    kw = {"budget": args.budget}
    if args.suite.startswith("theorem:"):
        kw["t_max"] = args.tmax
        if args.beta:
            kw["betas"] = _floats(args.beta, "beta")
    checks = run_suite(args.suite, **kw)
    passed = all(c.passed for c in checks)
    data = {"suite": args.suite, "passed": passed, "checks": [c.to_dict() for c in checks]}
    write_output(to_json(_meta(args), data), args.out)
    if _budget_failed(checks):
        return EXIT_BUDGET
    return EXIT_OK if passed else EXIT_FAIL


def cmd_sweep(args) -> int:
    betas = _floats(args.betas, "beta")
    if not betas or any(not 0.0 <= b <= 1.0 for b in betas):
        raise UsageError("betas must lie in [0, 1]")
    reports = H.phase_sweep(args.assumption, betas, args.tmax, t_min=args.tmin, budget=args.budget, jobs=args.jobs)
    if args.format == "json":
        text = to_json(_meta(args), {"reports": [r.to_dict() for r in reports]})
    else:
        rows = [row for r in reports for row in r.csv_rows()]
        text = to_csv(H.ConvergenceReport.CSV_FIELDS, rows)
    write_output(text, args.out)
    return EXIT_OK if all(r.complete for r in reports) else EXIT_BUDGET


def cmd_calibrate(args) -> int:
    doc = H.calibrate(t_max=args.tmax, headroom=args.headroom, budget=args.budget)
    write_output(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


# parser --------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mcqw", description="Multi-coin Hadamard walk toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt_default="csv"):
        sp.add_argument("--out", default=None, help="output path (default stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default=fmt_default,
                        help=f"output format (default {fmt_default or 'csv, json for --moment'})")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--budget", type=float, default=DEFAULT_BUDGET, help="max grid work per walk")

    d = sub.add_parser("dist", help="exact position distribution")
    d.add_argument("--M", type=int, required=True)
    d.add_argument("--t", type=int, required=True)
    d.add_argument("--init", default="caseA", help="caseA | caseB | ket1 | mix:beta=X | file=PATH")
    common(d)
    d.set_defaults(func=cmd_dist)

    law = sub.add_parser("law", help="evaluate a limit law")
    law.add_argument("name", help="catalog name, e.g. konno or arcsine:beta=0.5")
    law.add_argument("--density", nargs="*", type=float, default=None, metavar="X")
    law.add_argument("--cdf", nargs="*", type=float, default=None, metavar="X")
    law.add_argument("--moment", type=int, default=None, metavar="N")
    law.add_argument("--sample", type=int, default=None, metavar="N")
    law.add_argument("--grid", default=None, help="lo,hi,n evaluation grid (write --grid=-1,1,5 when lo is negative)")
    common(law, None)
    law.set_defaults(func=cmd_law)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", help="one of: " + ", ".join(suite_names()))
    v.add_argument("--beta", default=None, help="comma-separated betas for theorem suites")
    v.add_argument("--tmax", type=int, default=4000)
    common(v, "json")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", help="phase-diagram sweep")
    s.add_argument("--assumption", choices=("a", "b", "c"), required=True)
    s.add_argument("--betas", required=True, help="comma-separated list")
    s.add_argument("--tmax", type=int, default=2000)
    s.add_argument("--tmin", type=int, default=125)
    s.add_argument("--jobs", type=int, default=1)
    common(s)
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("calibrate", help="measure golden KS ceilings")
    c.add_argument("--tmax", type=int, default=4000)
    c.add_argument("--headroom", type=float, default=H.CEILING_HEADROOM)
    common(c, "json")
    c.set_defaults(func=cmd_calibrate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"mcqw: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceeded as exc:
        print(f"mcqw: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
