"""Command-line front end.

Every subcommand resolves its settings in the order defaults, then the
``--config`` file, then explicit flags, and embeds the resolved settings in
its JSON output. Exit status is 0 on success, 1 when a validation or
verification fails and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .core_types import Envelope, EnvelopeSpec, ThresholdParams, make_threshold_params, threshold_conditions
from .dynamics import (
    AdmissibleFamily,
    CoefficientTrajectory,
    default_jobs,
    reduced_field,
    run_comparison,
    simulate_aux,
    simulate_reduced,
    sweep_classify,
)
from .errors import EPCTError, PreconditionError, SearchFailed, ValidationError
from .geometry import LEMMA_IDS, default_x_grid, verify_lemma
from .thresholds import ThresholdRegion, find_feasible_params, region_boundary

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

PARAM_KEYS = ("m1", "m2", "n1", "n2", "M", "N")


class UsageError(Exception):
    """Bad combination of options or an unreadable input file."""


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _envelope(text) -> str:
    try:
        return Envelope.parse(text).value
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


@dataclass(frozen=True)
class Opt:
    name: str
    type: Callable[[str], Any]
    default: Any
    help: str
    choices: tuple | None = None

    @property
    def dest(self) -> str:
        return self.name.replace("-", "_")


_ENV = Opt("envelope", _envelope, "poly", "envelope law: poly or exp")
_S = Opt("s", float, 1.0, "polynomial exponent s >= 1 (ignored for exp)")
_PARAMS = Opt("params", str, None, "JSON file with constants (as written by find-params)")
_SEARCH_SEED = Opt("search-seed", int, 0, "seed of the constant search when --params is absent")
_TOL = Opt("tol", float, 1e-9, "integrator relative and absolute tolerance")
_OUT = Opt("out", str, None, "output file (default: stdout)")
_CONSTANTS = [Opt(k, float, None, f"constant {k}") for k in PARAM_KEYS]

COMMANDS: dict[str, tuple[str, list[Opt]]] = {
    "validate-params": (
        "check constants against the threshold conditions",
        [_ENV, _S, *_CONSTANTS, _PARAMS, Opt("slack", float, 1e-12, "relative slack on strict inequalities"), _OUT],
    ),
    "find-params": (
        "search for valid constants with small m*",
        [_ENV, _S, Opt("budget", int, 10_000, "objective evaluations"), Opt("seed", int, 0, "search seed"),
         Opt("starts", int, 4, "restarts of the coordinate descent"), _OUT],
    ),
    "region": (
        "export the threshold line or a reduced vector-field sample as CSV",
        [_ENV, _S, _PARAMS, _SEARCH_SEED,
         Opt("what", str, "boundary", "boundary or vector-field", ("boundary", "vector-field")),
         Opt("rho-max", float, None, "right end of the rho range (default 2 n*/m*)"),
         Opt("num-points", int, 100, "samples on the threshold line"),
         Opt("d-max", float, 5.0, "top of the d range for vector-field samples"),
         Opt("grid", int, 21, "vector-field samples per axis"),
         Opt("A", float, 0.0, "constant coefficient for vector-field samples"), _OUT],
    ),
    "simulate": (
        "integrate one trajectory and write it as CSV",
        [Opt("system", str, "reduced", "reduced, aux-poly, aux-exp or trace",
             ("reduced", "aux-poly", "aux-exp", "trace")),
         Opt("rho0", float, 1.0, "initial density (reduced)"), Opt("d0", float, 0.0, "initial divergence (reduced)"),
         Opt("a0", float, 0.1, "initial a (aux)"), Opt("b0", float, 1.0, "initial b (aux)"),
         _ENV, _S, Opt("A", float, None, "constant coefficient (reduced); default: admissible family member"),
         Opt("upper", float, 0.5, "upper bound of A, (omega0/rho0)^2 / 2"),
         Opt("seed", int, 0, "admissible family seed"), Opt("member", int, 0, "admissible family member"),
         Opt("t-end", float, 10.0, "final time"), _TOL,
         Opt("samples", int, 0, "uniform dense-output samples (0: accepted steps)"),
         Opt("n", int, 64, "grid size (trace)"), Opt("x1", float, 1.0, "start x1 (trace)"),
         Opt("x2", float, 2.0, "start x2 (trace)"), Opt("amplitude", float, 0.1, "max|rho0 - 1| (trace)"),
         Opt("irrotational", _bool, False, "curl-free initial velocity (trace)"), _OUT],
    ),
    "sweep": (
        "classify a (rho0, d0) grid as global, blow-up or undecided",
        [_ENV, _S, _PARAMS, _SEARCH_SEED,
         Opt("n-rho", int, 50, "rho0 grid points on (0, rho-max]"),
         Opt("n-d", int, 50, "d0 grid points on (0, d-max] or [d-min, d-max]"),
         Opt("rho-max", float, None, "default 2 n*/m*"), Opt("d-max", float, 5.0, "top of the d0 grid"),
         Opt("d-min", float, None, "closed lower end of the d0 grid (default: open at 0)"),
         Opt("upper", float, 0.5, "upper bound of A, (omega0/rho0)^2 / 2"),
         Opt("seed", int, 0, "admissible family seed"), Opt("t-end", float, 50.0, "final time"),
         Opt("tol", float, 1e-11, "integrator tolerance"),
         Opt("jobs", int, None, "worker processes (default: EPCT_JOBS or 1)"),
         Opt("report", str, None, "also write a JSON summary here"), _OUT],
    ),
    "verify-lemmas": (
        "check the lemma inequalities on a log-spaced grid",
        [Opt("lemma", str, "all", "4.1, 4.2, 5.1, 5.2 or all", (*LEMMA_IDS, "all")),
         _ENV, _S, _PARAMS, _SEARCH_SEED,
         Opt("num-points", int, 10_000, "log-spaced points (plus x = 0)"),
         Opt("x-max", float, 1e3, "right end of the x grid"), _OUT],
    ),
    "verify-reduction": (
        "run the flow solver and check the reduction identities",
        [Opt("n", int, 128, "grid size"), Opt("t-end", float, 0.3, "final time"),
         Opt("points", int, 16, "traced characteristics (a perfect square)"),
         Opt("amplitude", float, 0.1, "max|rho0 - 1|"),
         Opt("irrotational", _bool, False, "curl-free initial velocity"),
         Opt("omega-tol", float, 1e-3, "pass threshold for the vorticity residual"),
         Opt("residual-tol", float, 1e-2, "pass threshold for the strain and divergence residuals"),
         Opt("trace-out", str, None, "CSV of the first trace"), _OUT],
    ),
    "compare": (
        "integrate the reduced and auxiliary systems jointly and check ordering",
        [Opt("rho0", float, 0.5, "initial density"), Opt("d0", float, 1.0, "initial divergence"),
         Opt("a0", float, 0.6, "initial a"), Opt("b0", float, 0.9, "initial b"),
         _ENV, _S, Opt("A", str, "family", "upper, lower, family or a number"),
         Opt("upper", float, 0.5, "upper bound of A"), Opt("seed", int, 0, "family seed"),
         Opt("member", int, 0, "family member"), Opt("t-end", float, 20.0, "final time"), _TOL, _OUT],
    ),
}


# parsing ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epct",
        description="Critical-threshold experiments for the 2-D Euler-Poisson system.",
        epilog=(
            "Outputs: trajectories as CSV (reduced: t,rho,d; aux: t,a,b,B; trace: "
            "t,x1,x2,d,omega,eta,xi,rho,f1,f2); sweeps as CSV rho0,d0,member,status,t_end_or_blow; "
            'reports as JSON {"verdict", "margins", "config"}. Exit 0 ok, 1 failed check, 2 usage error.'
        ),
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    for name, (help_text, opts) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--config", default=argparse.SUPPRESS,
                       help="flat key = value file; flags override it, it overrides defaults")
        for o in opts:
            default_note = "" if o.default is None else f" (default {o.default})"
            p.add_argument(f"--{o.name}", dest=o.dest, type=o.type, choices=o.choices,
                           default=argparse.SUPPRESS, help=o.help + default_note)
    return parser


def read_config(path: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def resolve(command: str, ns: argparse.Namespace) -> dict:
    """Merge defaults, config file and flags for ``command``."""
    opts = {o.dest: o for o in COMMANDS[command][1]}
    cfg = {dest: o.default for dest, o in opts.items()}
    given = vars(ns)
    if "config" in given:
        for key, value in read_config(given["config"]).items():
            if key not in opts:
                raise UsageError(f"unknown config key {key!r} for {command}")
            o = opts[key]
            try:
                converted = o.type(value)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"config key {key}: {exc}") from None
            if o.choices and converted not in o.choices:
                raise UsageError(f"config key {key}: {converted!r} not in {o.choices}")
            cfg[key] = converted
    for key, value in given.items():
        if key in opts:
            cfg[key] = value
    return cfg


# output helpers ----------------------------------------------------------------


def _num(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return repr(float(v))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    if isinstance(obj, Envelope):
        return obj.value
    return obj


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_num(v) for v in row) + "\n")
    return buf.getvalue()


def _report(verdict: str, margins: dict, config: dict, **extra) -> str:
    body = {"verdict": verdict, "margins": margins, "config": config, **extra}
    return json.dumps(_jsonable(body), indent=2, sort_keys=True) + "\n"


# parameter resolution ----------------------------------------------------------


def _load_params_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read params {path}: {exc}") from None
    if isinstance(data, dict) and isinstance(data.get("params"), dict):
        data = data["params"]
    if not isinstance(data, dict) or any(k not in data for k in PARAM_KEYS):
        raise UsageError(f"{path} must hold the constants {', '.join(PARAM_KEYS)}")
    return data


def _params(cfg: dict) -> ThresholdParams:
    """Constants from ``--params`` or, failing that, a seeded search."""
    if cfg.get("params"):
        data = _load_params_file(cfg["params"])
        params = ThresholdParams.from_dict(data)
    else:
        params = find_feasible_params(cfg["envelope"], cfg["s"], seed=cfg.get("search_seed", 0))
    cfg["resolved_params"] = params.to_dict()
    return params


def _margins(params_or_conds) -> dict:
    conds = params_or_conds.conditions() if isinstance(params_or_conds, ThresholdParams) else params_or_conds
    return {c.name: c.margin for c in conds}


# commands --------------------------------------------------------------------------


def cmd_validate_params(cfg: dict) -> int:
    if cfg["params"]:
        raw = _load_params_file(cfg["params"])
        for k in PARAM_KEYS:
            if cfg[k] is None:
                cfg[k] = float(raw[k])
        if "envelope" in raw:
            cfg["envelope"] = _envelope(raw["envelope"])
        if "s" in raw:
            cfg["s"] = float(raw["s"])
    missing = [k for k in PARAM_KEYS if cfg[k] is None]
    if missing:
        raise UsageError("missing constants: " + ", ".join(f"--{k}" for k in missing))
    values = {k: cfg[k] for k in PARAM_KEYS}
    s = 1.0 if cfg["envelope"] == "exp" else cfg["s"]
    margins = _margins(threshold_conditions(**values, s=s, envelope=cfg["envelope"]))
    try:
        make_threshold_params(**values, s=cfg["s"], envelope=cfg["envelope"], slack=cfg["slack"])
    except ValidationError as exc:
        violations = [{"condition": v.name, "lhs": v.lhs, "rhs": v.rhs} for v in exc.violations]
        _emit(_report("invalid", margins, cfg, violations=violations), cfg["out"])
        return EXIT_FAIL
    _emit(_report("valid", margins, cfg), cfg["out"])
    return EXIT_OK


def cmd_find_params(cfg: dict) -> int:
    try:
        res = find_feasible_params(cfg["envelope"], cfg["s"], cfg["budget"], cfg["seed"], cfg["starts"],
                                   return_result=True)
    except SearchFailed as exc:
        _emit(_report("not-found", {}, cfg, error=str(exc)), cfg["out"])
        return EXIT_FAIL
    p = res.params
    _emit(_report("found", _margins(p), cfg, params=p.to_dict(), m_star=p.m_star, n_star=p.n_star,
                  evaluations=res.evaluations), cfg["out"])
    return EXIT_OK


def cmd_region(cfg: dict) -> int:
    params = _params(cfg)
    region = ThresholdRegion.from_params(params)
    rho_max = cfg["rho_max"] if cfg["rho_max"] is not None else 2.0 * region.rho_intercept
    if cfg["what"] == "boundary":
        b = region_boundary(region, rho_max, cfg["num_points"])
        if b.empty:
            sys.stderr.write(b.note + "\n")
        _emit(_csv(("rho", "d"), b.points()), cfg["out"])
        return EXIT_OK
    f = reduced_field(cfg["A"])
    n = cfg["grid"]
    if n < 2:
        raise UsageError("--grid must be >= 2")
    rows = []
    for r in np.linspace(rho_max / n, rho_max, n):
        for d in np.linspace(-cfg["d_max"], cfg["d_max"], n):
            drho, dd = f(0.0, np.array([r, d]))
            rows.append((r, d, drho, dd))
    _emit(_csv(("rho", "d", "drho", "dd"), rows), cfg["out"])
    return EXIT_OK


def _coefficient(cfg: dict, spec_text=None) -> CoefficientTrajectory:
    env = EnvelopeSpec(cfg["envelope"], cfg["s"], cfg["upper"])
    text = spec_text if spec_text is not None else cfg.get("A")
    if text is None or text == "family":
        return AdmissibleFamily(env, cfg["seed"]).member(cfg["member"])
    if text == "upper":
        return CoefficientTrajectory.upper_bound(env)
    if text == "lower":
        return CoefficientTrajectory.lower_bound(env)
    try:
        value = float(text)
    except ValueError:
        raise UsageError(f"--A must be upper, lower, family or a number, got {text!r}") from None
    env = EnvelopeSpec(cfg["envelope"], cfg["s"], max(cfg["upper"], value))
    return CoefficientTrajectory.constant(value, env)


def cmd_simulate(cfg: dict) -> int:
    system = cfg["system"]
    t_eval = None
    if cfg["samples"] > 0 and system != "trace":
        t_eval = np.linspace(0.0, cfg["t_end"], cfg["samples"])
    if system == "reduced":
        A = _coefficient(cfg, None if cfg["A"] is None else repr(cfg["A"]))
        res = simulate_reduced(cfg["rho0"], cfg["d0"], A, cfg["t_end"], cfg["tol"], t_eval)
        header = ("t", "rho", "d")
    elif system in ("aux-poly", "aux-exp"):
        kind = "poly" if system == "aux-poly" else "exp"
        res = simulate_aux(cfg["a0"], cfg["b0"], kind, cfg["s"], cfg["t_end"], cfg["tol"], t_eval)
        header = ("t", "a", "b", "B")
    else:
        from .pde import run_flow, smooth_initial_state, trace_characteristic

        history = run_flow(smooth_initial_state(cfg["n"], cfg["amplitude"], irrotational=cfg["irrotational"]),
                           cfg["t_end"])
        tr = trace_characteristic(history, (cfg["x1"], cfg["x2"]))
        _emit(_csv(tr.COLUMNS, tr.rows()), cfg["out"])
        return EXIT_OK
    rows = [(t, *y) for t, y in zip(res.times, res.states)]
    sys.stderr.write(f"status={res.status.value} t_stop={res.t_stop!r}\n")
    _emit(_csv(header, rows), cfg["out"])
    return EXIT_OK


def cmd_sweep(cfg: dict) -> int:
    params = _params(cfg)
    region = ThresholdRegion.from_params(params)
    rho_max = cfg["rho_max"] if cfg["rho_max"] is not None else 2.0 * region.rho_intercept
    if cfg["n_rho"] < 0 or cfg["n_d"] < 0:
        raise UsageError("grid sizes must be non-negative")
    rhos = np.linspace(0.0, rho_max, cfg["n_rho"] + 1)[1:]
    if cfg["d_min"] is None:
        ds = np.linspace(0.0, cfg["d_max"], cfg["n_d"] + 1)[1:]
    else:
        ds = np.linspace(cfg["d_min"], cfg["d_max"], cfg["n_d"])
    env = EnvelopeSpec(params.envelope, params.s, cfg["upper"])
    jobs = cfg["jobs"] if cfg["jobs"] is not None else default_jobs()
    cfg["jobs"] = jobs
    rows = sweep_classify(region, rhos, ds, AdmissibleFamily(env, cfg["seed"]), cfg["t_end"], cfg["tol"], jobs)
    out = [(r.rho0, r.d0, r.member, r.status.value, r.t_end_or_blow) for r in rows]
    _emit(_csv(("rho0", "d0", "member", "status", "t_end_or_blow"), out), cfg["out"])
    members = [r for r in rows if r.member]
    failures = [r for r in members if r.status.value != "Global" or not r.bound_held()]
    slack = min((1.0 - r.d_max / r.d_bound for r in members), default=math.inf)
    verdict = "pass" if not failures else "fail"
    if cfg["report"]:
        margins = {"members": len(members), "member_failures": len(failures), "min_bound_slack": slack}
        _emit(_report(verdict, margins, cfg), cfg["report"])
    return EXIT_OK if not failures else EXIT_FAIL


def cmd_verify_lemmas(cfg: dict) -> int:
    params = _params(cfg)
    if cfg["lemma"] == "all":
        ids = ("4.1", "4.2") if params.envelope is Envelope.POLYNOMIAL else ("5.1", "5.2")
    else:
        ids = (cfg["lemma"],)
    grid = default_x_grid(cfg["num_points"], cfg["x_max"])
    reports = [verify_lemma(i, params, grid) for i in ids]
    ok = all(r.passed for r in reports)
    margins = {r.lemma: r.worst_margin for r in reports}
    _emit(_report("pass" if ok else "fail", margins, cfg, lemmas=[r.to_dict() for r in reports]), cfg["out"])
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify_reduction(cfg: dict) -> int:
    from .pde import DOMAIN_NOTE, default_starts, verify_flow

    try:
        starts = default_starts(cfg["points"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    report, traces = verify_flow(cfg["n"], cfg["t_end"], starts, cfg["amplitude"], cfg["irrotational"])
    ok = (report.omega_rel < cfg["omega_tol"] and report.strain_rel < cfg["residual_tol"]
          and report.divergence_rel < cfg["residual_tol"])
    if cfg["trace_out"]:
        tr = traces[0]
        _emit(_csv(tr.COLUMNS, tr.rows()), cfg["trace_out"])
    _emit(_report("pass" if ok else "fail", report.to_dict(), cfg, domain=DOMAIN_NOTE), cfg["out"])
    return EXIT_OK if ok else EXIT_FAIL


def cmd_compare(cfg: dict) -> int:
    A = _coefficient(cfg)
    rep = run_comparison(cfg["rho0"], cfg["d0"], cfg["a0"], cfg["b0"], A, cfg["t_end"], cfg["tol"])
    margins = {"d_minus_b": rep.min_gap_d_minus_b, "a_minus_rho": rep.min_gap_a_minus_rho}
    _emit(_report("held" if rep.ordering_held else "violated", margins, cfg, result=rep.to_dict()), cfg["out"])
    return EXIT_OK if rep.ordering_held else EXIT_FAIL


HANDLERS = {
    "validate-params": cmd_validate_params,
    "find-params": cmd_find_params,
    "region": cmd_region,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "verify-lemmas": cmd_verify_lemmas,
    "verify-reduction": cmd_verify_reduction,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    command = ns.command
    del ns.command
    try:
        cfg = resolve(command, ns)
        cfg["command"] = command
        return HANDLERS[command](cfg)
    except (UsageError, PreconditionError) as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"epct {command}: error: {exc}\n")
        return EXIT_USAGE
    except (ValidationError, SearchFailed) as exc:
        sys.stderr.write(f"epct {command}: {exc}\n")
        return EXIT_FAIL
    except EPCTError as exc:
        sys.stderr.write(f"epct {command}: {type(exc).__name__}: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
