"""Command-line batch runner.

Subcommands: ``check-weight``, ``norm``, ``calc``, ``verify``, ``run`` and
``bench``.  Exit status is 0 when everything passes, 2 when an embedded
assertion fails and 1 on configuration or input errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import jsonschema
import numpy as np

from . import apps, calculus, hoermander, operators, sampling, strip_spaces
from .errors import HoercalcError, InputError
from .functions import function_from_spec, resolvent, sector_function_from_spec, sector_power
from .sampling import Grid
from .weights import Weight

EXIT_OK, EXIT_CONFIG, EXIT_ASSERT = 0, 1, 2

TASK_KINDS = ("weight-check", "norm", "calculus", "verify", "app")

MANIFEST_SCHEMA = {
    "type": "object",
    "required": ["version", "tasks"],
    "additionalProperties": False,
    "properties": {
        "version": {"type": "integer", "const": 1},
        "seed": {"type": "integer", "minimum": 0},
        "output_dir": {"type": "string"},
        "grid_overrides": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"half_width": {"type": "number", "exclusiveMinimum": 0},
                           "points": {"type": "integer", "minimum": 8}},
        },
        "tasks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["kind"],
                "additionalProperties": False,
                "properties": {
                    "kind": {"enum": list(TASK_KINDS)},
                    "name": {"type": "string"},
                    "params": {"type": "object"},
                },
            },
        },
    },
}


class ConfigError(Exception):
    """Bad manifest or arguments; maps to exit status 1."""


@dataclass
class TaskOutcome:
    name: str
    kind: str
    status: str  # ok | failed | error
    summary: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    header: list = field(default_factory=list)
    message: str = ""

    @property
    def code(self) -> int:
        return {"ok": EXIT_OK, "failed": EXIT_ASSERT, "error": EXIT_CONFIG}[self.status]


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (complex, np.complexfloating)):
        return repr(complex(value))
    return str(value)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(header)
    for row in rows:
        out.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _jsonable(obj):
    return calculus._jsonable(obj)


def _check_expectations(summary: dict, expect: dict | None) -> list[str]:
    """``expect`` maps result keys to ``[lo, hi]`` (either may be null) or a literal value."""
    failures = []
    for key, want in (expect or {}).items():
        if key not in summary:
            raise ConfigError(f"expect: unknown result key {key!r}")
        got = summary[key]
        if isinstance(want, list) and len(want) == 2:
            lo, hi = want
            if (lo is not None and not got >= lo) or (hi is not None and not got <= hi):
                failures.append(f"{key} = {got} outside [{lo}, {hi}]")
        elif got != want:
            failures.append(f"{key} = {got} != {want}")
    return failures


# task kinds ------------------------------------------------------------

def task_weight_check(params: dict, grid: Grid, seed: int) -> tuple[dict, list, list]:
    v = Weight.from_spec(params.get("weight", "poly:1"))
    report = v.report(float(params.get("scan_range", 1e3)), int(params.get("samples", 2000)))
    summary = {"weight": v.describe(), **report.to_dict()}
    rows = [[k, summary[k]] for k in summary]
    return summary, ["field", "value"], rows


def _strip_rep(params: dict, grid: Grid) -> strip_spaces.StripFunctionRep:
    fn = function_from_spec(params.get("function", "gauss"))
    weight = Weight.from_spec(params.get("weight", "const"))
    return strip_spaces.StripFunctionRep.from_function(fn, float(params.get("omega", 0.0)), weight, grid)


def task_norm(params: dict, grid: Grid, seed: int) -> tuple[dict, list, list]:
    kind = params.get("norm", "sobolev")
    label = params.get("function", "gauss")
    if kind == "hoermander":
        fn = function_from_spec(label)
        est = hoermander.hoermander_norm(fn, weight=Weight.from_spec(params.get("weight", "const")),
                                         omega=float(params.get("omega", 0.0)), grid=grid)
        value = est.refined_value
        extra = {"argmax_t": est.argmax_t, "converged": est.convergence_flag}
    else:
        rep = _strip_rep(params, grid)
        if kind == "sobolev":
            value, extra = strip_spaces.sobolev_norm(rep), {}
        elif kind == "algebra":
            value, extra = strip_spaces.fourier_algebra_norm(rep), {}
        elif kind == "hardy":
            res = strip_spaces.hardy2_norm(rep, float(params.get("omega_prime", 1.0)))
            value, extra = res.value, {"ordinate": res.ordinate}
        else:
            raise ConfigError(f"params.norm: unknown norm {kind!r}")
    summary = {"function": label, "norm": kind, "value": value, **extra}
    return summary, ["function", "norm", "value"], [[label, kind, value]]


def cross_check(seeds, dim: int, height: float, functions, methods, grid: Grid) -> list[list]:
    rows = []
    for seed in seeds:
        A = operators.DiagonalizableOperator.random_strip(dim, height, np.random.default_rng(seed))
        for spec in functions:
            fn = function_from_spec(spec)
            for method in methods:
                if method == "contour":
                    res = calculus.elementary_contour(A, fn)
                elif method == "sobolev":
                    res = calculus.sobolev_integral(A, strip_spaces.StripFunctionRep.from_function(
                        fn, height, grid=grid, verify=False))
                elif method == "meda":
                    res = calculus.meda_hoermander(A, fn, grid=grid)
                else:
                    raise ConfigError(f"params.methods: unknown method {method!r}")
                rows.append([seed, spec, method, res.relative_deviation])
    return rows


def task_calculus(params: dict, grid: Grid, seed: int) -> tuple[dict, list, list]:
    seeds = params.get("seeds", 10)
    seeds = list(range(seed, seed + int(seeds))) if isinstance(seeds, int) else [int(s) for s in seeds]
    rows = cross_check(seeds, int(params.get("dim", 6)), float(params.get("height", 0.5)),
                       params.get("functions", ["gauss"]), params.get("methods", ["contour", "sobolev"]), grid)
    tol = float(params.get("tolerance", 1e-6))
    worst = max(r[3] for r in rows) if rows else 0.0
    summary = {"rows": len(rows), "max_deviation": worst, "tolerance": tol, "within_tolerance": worst <= tol}
    return summary, ["seed", "function", "method", "deviation"], rows


# verification suite ----------------------------------------------------

def _check_hardy(grid):
    out = {}
    for lam, exact in ((2j, math.sqrt(math.pi)), (3j, math.sqrt(math.pi / 2))):
        rep = strip_spaces.StripFunctionRep.from_function(resolvent(lam), 1.0, grid=grid)
        out[f"hardy_r{lam.imag:g}i"] = abs(strip_spaces.hardy2_norm(rep, 1.0).value / exact - 1)
    return max(out.values()) <= 5e-3, out


def _check_weights(grid):
    m_v = Weight.poly(1).report(1e6).m_v_estimate
    dbl = Weight.custom(lambda s: np.log(math.e + np.abs(s)), "log").report().doubling_sup
    trend = Weight.custom(lambda s: np.exp(np.sqrt(np.abs(s))), "exp-sqrt").report(1e3).doubling_trend
    ok = abs(m_v - 1) <= 1e-6 and dbl <= 1 + math.log(2) + 1e-6 and trend == "diverging"
    return ok, {"m_v": m_v, "doubling_log": dbl, "trend_exp_sqrt": trend}


def _check_plancherel(grid):
    xg = grid.dual()
    f = sampling.SampledFunction.from_function(lambda x: np.exp(-(x**2)), xg)
    g = sampling.SampledFunction.from_function(lambda x: np.exp(-((x - 0.5) ** 2) / 2), xg)
    fv, gv = sampling.fourier_inverse(f), sampling.fourier_inverse(g)
    lhs = float(np.sum(np.abs(f.values) ** 2) * xg.spacing)
    rhs = 2 * math.pi * float(np.sum(np.abs(fv.values) ** 2) * grid.spacing)
    prod = sampling.fourier_inverse(f * g)
    conv = sampling.convolve(fv, gv)
    err_conv = float(np.abs(prod.values - conv.values).max())
    err_pl = abs(lhs / rhs - 1)
    return max(err_pl, err_conv) <= 1e-8, {"plancherel": err_pl, "convolution": err_conv}


def _check_partition(grid):
    part = hoermander.build_partition(1.0, 1.0)
    t = np.linspace(-5, 5, 1001)
    total = sum(part.phi(t - n) for n in range(-40, 41))
    err = float(np.abs(total - 1).max())
    rng = np.random.default_rng(0)
    z = rng.uniform(-10, 10, 1000) + 1j * rng.uniform(-1, 1, 1000) * part.theta * (1 - 1e-3)
    positive = bool(np.all(part.phi(z).real > 0))
    return err <= 1e-8 and positive, {"sum_error": err, "positive": positive}


def _check_omega_p(grid):
    err = max(abs(apps.omega_p(2.0)), abs(apps.omega_p(4.0) - math.pi / 6))
    return err <= 1e-12, {"error": err}


def _check_composition(grid):
    A = operators.DiagonalizableOperator.from_eig([0.5, 1.0, 3.0, 7.0], kind="sectorial")
    err = 0.0
    for s0 in (1.0, 2.0, 5.0):
        res = calculus.sector_calculus(A, sector_power(s0), "meda", grid=grid)
        err = max(err, float(np.abs(res.matrix - operators.imaginary_power(A, s0)).max()))
    return err <= 1e-10, {"max_error": err}


def _check_boundary(grid):
    ratios = {}
    for spec in ("resolvent:2i", "resolvent:-3i", "gauss", "sech:2", "eta:1"):
        rep = strip_spaces.StripFunctionRep.from_function(function_from_spec(spec), 0.5, grid=grid)
        ratios[spec] = strip_spaces.boundary_norm_ratio(rep)
    ok = all(1 - 1e-3 <= r <= 2 * (1 + 1e-3) for r in ratios.values())
    return ok, ratios


VERIFY_CHECKS = {
    "hardy": _check_hardy,
    "weights": _check_weights,
    "plancherel": _check_plancherel,
    "partition": _check_partition,
    "omega-p": _check_omega_p,
    "composition": _check_composition,
    "boundary": _check_boundary,
}


def task_verify(params: dict, grid: Grid, seed: int) -> tuple[dict, list, list]:
    names = params.get("checks", list(VERIFY_CHECKS))
    rows, summary = [], {}
    for name in names:
        if name not in VERIFY_CHECKS:
            raise ConfigError(f"params.checks: unknown check {name!r}")
        ok, detail = VERIFY_CHECKS[name](grid)
        summary[name] = bool(ok)
        rows.append([name, bool(ok), json.dumps(_jsonable(detail), sort_keys=True)])
    summary["all_passed"] = all(summary[n] for n in names)
    return summary, ["check", "passed", "detail"], rows


def task_app(params: dict, grid: Grid, seed: int) -> tuple[dict, list, list]:
    experiment = params.get("experiment", "cd-growth")
    if experiment == "omega-p":
        ps = [float(p) for p in params.get("p", [4 / 3, 2, 4])]
        rows = [[p, apps.omega_p(p)] for p in ps]
        return {"values": dict((str(p), w) for p, w in rows)}, ["p", "omega_p"], rows
    if experiment == "cd-growth":
        p = float(params.get("p", 4.0))
        model_spec = params.get("model", "cycle:8")
        model = _contraction_model(model_spec, seed)
        s_max = float(params.get("s_max", 20.0))
        res = apps.cd_growth_check(model, p, np.linspace(-s_max, s_max, int(params.get("s_points", 81))))
        rows = [list(r) for r in zip(res.s, res.measured, res.bound, res.ratio)]
        return res.summary(), ["s", "measured", "bound", "ratio"], rows
    if experiment == "ou":
        model = apps.OUModel(int(params.get("truncation", 32)))
        s_values = np.linspace(-20, 20, int(params.get("s_points", 41)))
        rows = [[s, model.imaginary_power_norm(s)] for s in s_values]
        dev = max(abs(r[1] - 1) for r in rows)
        gram = float(np.abs(model.gram() - np.eye(model.truncation + 1)).max())
        return {"unitarity_deviation": dev, "gram_deviation": gram}, ["s", "norm"], rows
    if experiment == "multiplier":
        p = float(params.get("p", 4.0))
        model = _contraction_model(params.get("model", "cycle:8"), seed)
        v = Weight.from_spec(params.get("weight", "poly:1.5"))
        reports = [apps.multiplier_experiment(model, sector_function_from_spec(m), p, v)
                   for m in params.get("multipliers", ["resolvent:-1", "power:1", "power:2"])]
        rows = [[r.label, r.measured, r.hoermander, r.ratio] for r in reports]
        return {"max_ratio": max(r.ratio for r in reports)}, ["multiplier", "measured", "hoermander", "ratio"], rows
    raise ConfigError(f"params.experiment: unknown experiment {experiment!r}")


def _contraction_model(spec: str, seed: int) -> apps.ContractionModel:
    head, _, rest = spec.partition(":")
    if head == "cycle":
        return apps.ContractionModel.cycle_walk(int(rest or 8))
    if head == "swap":
        return apps.ContractionModel.swap()
    if head == "random":
        return apps.ContractionModel.random(int(rest or 6), np.random.default_rng(seed))
    raise ConfigError(f"params.model: unknown model {spec!r}")


TASKS = {
    "weight-check": task_weight_check,
    "norm": task_norm,
    "calculus": task_calculus,
    "verify": task_verify,
    "app": task_app,
}

PASS_KEYS = {"calculus": "within_tolerance", "verify": "all_passed", "app": "passes"}


def execute_task(index: int, task: dict, grid: Grid, seed: int) -> TaskOutcome:
    kind = task["kind"]
    name = task.get("name", f"{index:02d}-{kind}")
    params = dict(task.get("params", {}))
    expect = params.pop("expect", None)
    try:
        summary, header, rows = TASKS[kind](params, grid, seed)
        failures = _check_expectations(summary, expect)
        key = PASS_KEYS.get(kind)
        if key in summary and summary[key] is False:
            failures.append(f"{key} is false")
        status = "failed" if failures else "ok"
        return TaskOutcome(name, kind, status, summary, rows, header, "; ".join(failures))
    except ConfigError as exc:
        return TaskOutcome(name, kind, "error", message=str(exc))
    except (InputError, ValueError, TypeError, KeyError) as exc:
        return TaskOutcome(name, kind, "error", message=f"{type(exc).__name__}: {exc}")
    except HoercalcError as exc:
        return TaskOutcome(name, kind, "failed", message=f"{type(exc).__name__}: {exc}")


def load_manifest(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read manifest: {exc}") from exc
    if isinstance(data, dict) and data.get("tasks") == []:
        raise ConfigError("no tasks")
    errors = sorted(jsonschema.Draft202012Validator(MANIFEST_SCHEMA).iter_errors(data),
                    key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"manifest field {where}: {err.message}")
    return data


def run_manifest(path, out_dir=None, grid: Grid | None = None, seed: int | None = None,
                 parallel: int = 1) -> int:
    """Execute every task; write ``<name>.csv``, ``<name>.json`` and ``run.log.jsonl``."""
    manifest = load_manifest(path)
    overrides = manifest.get("grid_overrides", {})
    if grid is None:
        grid = Grid(overrides.get("half_width", 32.0), overrides.get("points", 4096))
    seed = manifest.get("seed", 0) if seed is None else seed
    out = Path(out_dir or manifest.get("output_dir", "hoercalc-out"))
    out.mkdir(parents=True, exist_ok=True)
    tasks = manifest["tasks"]
    args = [(i, t, grid, seed) for i, t in enumerate(tasks)]
    if parallel > 1:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            outcomes = list(pool.map(lambda a: execute_task(*a), args))
    else:
        outcomes = [execute_task(*a) for a in args]
    with open(out / "run.log.jsonl", "a") as log:
        for res in outcomes:
            if res.rows:
                (out / f"{res.name}.csv").write_text(csv_text(res.header, res.rows))
            (out / f"{res.name}.json").write_text(json.dumps(_jsonable(res.summary), indent=2, sort_keys=True))
            entry = {"time": datetime.now(timezone.utc).isoformat(), "task": res.name, "kind": res.kind,
                     "status": res.status, "message": res.message, "summary": _jsonable(res.summary)}
            log.write(json.dumps(entry, sort_keys=True) + "\n")
            print(f"{res.status.upper():6s} {res.name}" + (f": {res.message}" if res.message else ""))
    codes = {res.code for res in outcomes}
    if EXIT_CONFIG in codes:
        return EXIT_CONFIG
    return EXIT_ASSERT if EXIT_ASSERT in codes else EXIT_OK


# entry point -----------------------------------------------------------

def _single(kind: str, params: dict, args) -> int:
    res = execute_task(0, {"kind": kind, "params": params}, args.grid, args.seed)
    print(json.dumps(_jsonable(res.summary), indent=2, sort_keys=True))
    if res.message:
        print(res.message, file=sys.stderr)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if res.rows:
            (out / f"{kind}.csv").write_text(csv_text(res.header, res.rows))
        (out / f"{kind}.json").write_text(json.dumps(_jsonable(res.summary), indent=2, sort_keys=True))
    return res.code


def _bench(args) -> int:
    grid = args.grid
    timings = []

    def timed(label, fn):
        start = time.perf_counter()
        fn()
        timings.append([label, time.perf_counter() - start])

    rep = strip_spaces.StripFunctionRep.from_function(resolvent(2j), 1.0, grid=grid)
    A = operators.DiagonalizableOperator.random_strip(6, 0.5, np.random.default_rng(args.seed))
    fn = function_from_spec("gauss-tanh")
    timed("hardy2_norm", lambda: strip_spaces.hardy2_norm(rep, 1.0))
    timed("hoermander_norm", lambda: hoermander.hoermander_norm(fn, grid=grid))
    timed("elementary_contour", lambda: calculus.elementary_contour(A, fn))
    timed("meda_hoermander", lambda: calculus.meda_hoermander(A, fn, grid=grid))
    timed("admissibility_report", lambda: Weight.poly(1.5).report())
    for label, sec in timings:
        print(f"{label:24s} {sec:8.3f} s")
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "bench.csv").write_text(csv_text(["operation", "seconds"], timings))
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser, defaults: bool) -> None:
    def default(value):
        return value if defaults else argparse.SUPPRESS

    parser.add_argument("--grid-L", type=float, default=default(None), help="grid half-width (default 32)")
    parser.add_argument("--grid-N", type=int, default=default(None), help="grid points, a power of two (default 4096)")
    parser.add_argument("--seed", type=int, default=default(None))
    parser.add_argument("--out", default=default(None), help="directory for CSV/JSON artifacts")
    parser.add_argument("--parallel", type=int, default=default(1), help="worker threads for manifest tasks")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hoercalc", description=__doc__.splitlines()[0])
    _add_common(parser, True)
    common = argparse.ArgumentParser(add_help=False)
    _add_common(common, False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-weight", parents=[common], help="admissibility diagnostics of a weight")
    p.add_argument("weight", help='e.g. "poly:1.5", "polylog:0.5:1.2", "const", "table:path.csv"')
    p.add_argument("--scan-range", type=float, default=1e3)
    p.add_argument("--samples", type=int, default=2000)

    p = sub.add_parser("norm", parents=[common], help="strip-space or Hörmander norm of a function")
    p.add_argument("function", help='e.g. "gauss", "resolvent:2i", "tanh", "sech:2"')
    p.add_argument("--norm", choices=["sobolev", "algebra", "hardy", "hoermander"], default="sobolev")
    p.add_argument("--omega", type=float, default=0.0)
    p.add_argument("--omega-prime", type=float, default=1.0)
    p.add_argument("--weight", default="const")

    p = sub.add_parser("calc", parents=[common], help="cross-check calculus methods on random models")
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--dim", type=int, default=6)
    p.add_argument("--height", type=float, default=0.5)
    p.add_argument("--functions", default="gauss,resolvent:2i,gauss-tanh")
    p.add_argument("--methods", default="contour,sobolev")
    p.add_argument("--tolerance", type=float, default=1e-6)

    p = sub.add_parser("verify", parents=[common], help="run the built-in verification checks")
    p.add_argument("--checks", default=",".join(VERIFY_CHECKS))

    p = sub.add_parser("run", parents=[common], help="execute a JSON manifest")
    p.add_argument("manifest")

    sub.add_parser("bench", parents=[common], help="time the core operations")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.grid = Grid(args.grid_L or 32.0, args.grid_N or 4096)
    except HoercalcError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    seed = 0 if args.seed is None else args.seed
    try:
        if args.command == "check-weight":
            return _single("weight-check", {"weight": args.weight, "scan_range": args.scan_range,
                                            "samples": args.samples}, _with_seed(args, seed))
        if args.command == "norm":
            return _single("norm", {"function": args.function, "norm": args.norm, "omega": args.omega,
                                    "omega_prime": args.omega_prime, "weight": args.weight}, _with_seed(args, seed))
        if args.command == "calc":
            return _single("calculus", {"seeds": args.seeds, "dim": args.dim, "height": args.height,
                                        "functions": args.functions.split(","),
                                        "methods": args.methods.split(","), "tolerance": args.tolerance},
                           _with_seed(args, seed))
        if args.command == "verify":
            return _single("verify", {"checks": args.checks.split(",")}, _with_seed(args, seed))
        if args.command == "run":
            grid = args.grid if (args.grid_L or args.grid_N) else None
            return run_manifest(args.manifest, args.out, grid, args.seed, args.parallel)
        return _bench(_with_seed(args, seed))
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def _with_seed(args, seed):
    args.seed = seed
    return args


if __name__ == "__main__":
    sys.exit(main())
