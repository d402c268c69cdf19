"""Command-line front end: ``levyzoom <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .attraction import (
    BracketingFailure, ScalingFunction, Tolerance, UndeterminedError, attractor_from_dict,
    RWSpec, StrictlyStable, Brownian, LinearDrift, classify, rw_constant_attraction,
)
from .experiments import (
    ConfigError, ExperimentConfig, convergence_report, default_threads, dumps, error_csv,
    limit_csv, parse_eps_grid, run_error_experiment, run_limit_experiment, tau_fraction_check,
)
from .fixtures import FIXTURES, fixture
from .model import LevyModel, ModelError

EXIT_OK, EXIT_CONFIG, EXIT_STRICT = 0, 2, 3
DEFAULT_GRID = "1e-2:1e-8:logstep10"


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise CliError(f"{path} is not valid JSON: {exc}") from None


def load_model(spec: str) -> LevyModel:
    """A model JSON file, or ``fixture:NAME`` for a built-in reference model."""
    if spec.startswith("fixture:"):
        name = spec.split(":", 1)[1]
        if name not in FIXTURES:
            raise CliError(f"unknown fixture {name!r}; known: {sorted(FIXTURES)}")
        return fixture(name)
    return LevyModel.from_dict(_read_json(spec))


def load_attractor(spec: str):
    """A JSON file, or ``brownian[:sigma]``, ``drift:gamma`` or ``stable:alpha:c_plus:c_minus[:gamma]``."""
    if spec.endswith(".json"):
        return attractor_from_dict(_read_json(spec))
    name, *args = spec.split(":")
    try:
        vals = [float(a) for a in args]
        if name == "brownian" and len(vals) <= 1:
            return Brownian(*vals)
        if name == "drift" and len(vals) == 1:
            return LinearDrift(vals[0])
        if name == "stable" and len(vals) in (3, 4):
            return StrictlyStable(*vals)
    except ValueError as exc:
        raise CliError(f"bad attractor {spec!r}: {exc}") from None
    raise CliError(f"bad attractor {spec!r}; expected brownian[:sigma], drift:gamma, "
                   "stable:alpha:c_plus:c_minus[:gamma] or a JSON file")


def _tol(args) -> Tolerance:
    return Tolerance() if args.tol is None else Tolerance(limit=args.tol)


def _config(args) -> ExperimentConfig:
    raw = _read_json(args.config)
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    raw = dict(raw)
    for flag, key in (("seed", "seed"), ("n", "n"), ("refine_k", "refine_k"), ("k_window", "k_window")):
        val = getattr(args, flag, None)
        if val is not None:
            raw[key] = val
    if getattr(args, "eps_grid", None):
        raw["eps"] = args.eps_grid
    if getattr(args, "reference", None):
        raw["reference"] = args.reference
    return ExperimentConfig.from_dict(raw)


def _scaling_table(model, att, grid: list[float]) -> list[dict]:
    if not att.is_limit:
        return []
    sf = ScalingFunction(model, att)
    return [{"eps": e, "a_eps": sf(e), "residual": sf.residual(e)} for e in grid]


def _public(d: dict) -> dict:
    return json.loads(json.dumps(d, default=_plain))


def _plain(o):
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


# ---------------------------------------------------------------------------
# subcommands; each returns ({filename: text}, exit code)

def cmd_classify(args):
    model = load_model(args.model)
    att = classify(model, tol=_tol(args))
    grid = parse_eps_grid(args.eps_grid or DEFAULT_GRID)
    out = {"model": model.to_dict(), "attractor": _public(att.to_dict()),
           "scaling": _scaling_table(model, att, grid)}
    code = EXIT_STRICT if args.strict and not att.is_limit else EXIT_OK
    return {"classify.json": dumps(out)}, code


def cmd_scaling(args):
    model = load_model(args.model)
    att = classify(model, tol=_tol(args))
    if not att.is_limit:
        if args.strict:
            return {}, EXIT_STRICT
        raise CliError(f"no scaling function: model classifies as {att.variant}")
    grid = parse_eps_grid(args.eps_grid or DEFAULT_GRID)
    out = {"attractor": _public({k: v for k, v in att.to_dict().items() if k != "diagnostics"}),
           "scaling": _scaling_table(model, att, grid)}
    return {"scaling.json": dumps(out)}, EXIT_OK


def _check_limit(cfg: ExperimentConfig, args):
    att = classify(cfg.model, tol=_tol(args))
    if not att.is_limit:
        if args.strict:
            return att, EXIT_STRICT
        raise ConfigError(f"model classifies as {att.variant}; no limit law to compare against")
    return att, EXIT_OK


def cmd_simulate(args):
    cfg = _config(args)
    _, code = _check_limit(cfg, args)
    if code:
        return {}, code
    res = run_error_experiment(cfg, args.threads)
    summary = {"config": cfg.to_dict(), "config_hash": cfg.digest(), "seed": cfg.seed,
               "engine": res.engine, "attractor": _public(res.attractor.to_dict()),
               "per_eps": [{"eps": r.eps, "a_eps": r.a_eps, "n_paths": len(r.boundary),
                            "n_boundary": r.n_boundary} for r in res.per_eps]}
    return {"errors.csv": error_csv(res), "simulate.json": dumps(summary)}, EXIT_OK


def cmd_report(args):
    cfg = _config(args)
    _, code = _check_limit(cfg, args)
    if code:
        return {}, code
    res = run_error_experiment(cfg, args.threads)
    rep = convergence_report(cfg, threads=args.threads, result=res)
    return {"errors.csv": error_csv(res), "report.json": dumps(rep)}, EXIT_OK


def cmd_limit(args):
    att = load_attractor(args.attractor)
    n = args.n if args.n is not None else 100_000
    k = args.k_window if args.k_window is not None else 20
    res = run_limit_experiment(att, n, k, args.seed, args.threads)
    summary = {"attractor": _public(att.to_dict()), "n": n, "k_window": k, "seed": args.seed,
               "method": res.method, "rejected": res.rejected,
               "mean_minus_v": res.minus_v.mean(), "se_minus_v": res.minus_v.std_error()}
    return {"limit.csv": limit_csv(res), "limit.json": dumps(summary)}, EXIT_OK


def cmd_tau_check(args):
    if args.config:
        cfg = _config(args)
        model, T, eps, n, seed, k = cfg.model, cfg.T, cfg.eps[0], cfg.n, cfg.seed, cfg.refine_k
    else:
        if not args.model:
            raise CliError("tau-check needs --config or --model")
        model, T, eps = load_model(args.model), 1.0, 2.0 ** -10
        n = args.n if args.n is not None else 10_000
        seed = args.seed if args.seed is not None else 0
        k = args.refine_k if args.refine_k is not None else 7
    if args.eps is not None:
        eps = args.eps
    out = tau_fraction_check(model, T, eps, n, seed, k, threads=args.threads)
    out["seed"] = seed
    return {"tau_check.json": dumps(out)}, EXIT_OK


def cmd_rw_check(args):
    spec = RWSpec.from_dict(_read_json(args.model))
    res = rw_constant_attraction(spec, tol=_tol(args))
    out = {"attracted": res.attracted, "diagnostics": _public(res.diagnostics)}
    if res.attracted:
        ns = [10.0 ** j for j in range(1, 9)]
        a = [res.solver(n) for n in ns]
        out["a_n"] = [{"n": n, "a_n": v, "a_n_over_n": v / n} for n, v in zip(ns, a)]
    code = EXIT_STRICT if args.strict and not res.attracted else EXIT_OK
    return {"rw_check.json": dumps(out)}, code


COMMANDS = {
    "classify": cmd_classify, "scaling": cmd_scaling, "simulate": cmd_simulate, "limit": cmd_limit,
    "report": cmd_report, "tau-check": cmd_tau_check, "rw-check": cmd_rw_check,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $LEVYZOOM_THREADS or 1); never changes outputs")
    common.add_argument("--strict", action="store_true", help="exit 3 when no attractor exists")
    common.add_argument("--json-errors", action="store_true", help="report errors as JSON on stderr")
    common.add_argument("--tol", type=float, default=None, help="relative tolerance of the limit tests")

    p = _Parser(prog="levyzoom", description="Small-time attractors of Levy processes and "
                "the limit law of the supremum discretization error.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        s = sub.add_parser(name, parents=[common])
        if name in ("classify", "scaling", "rw-check", "tau-check"):
            s.add_argument("--model", required=name != "tau-check",
                           help="model JSON file or fixture:NAME" if name != "rw-check"
                           else "step-law JSON file")
        if name in ("classify", "scaling", "simulate", "report"):
            s.add_argument("--eps-grid", default=None, help="lo:hi:logstepN")
        if name in ("simulate", "report", "tau-check"):
            s.add_argument("--config", required=name != "tau-check")
            s.add_argument("--n", type=int, default=None)
            s.add_argument("--refine-k", dest="refine_k", type=int, default=None)
        if name in ("simulate", "report"):
            s.add_argument("--k-window", dest="k_window", type=int, default=None)
        if name == "report":
            s.add_argument("--reference", choices=["bessel", "uniform", "bootstrap"], default=None)
        if name == "tau-check":
            s.add_argument("--eps", type=float, default=None)
        if name == "limit":
            s.add_argument("--attractor", required=True)
            s.add_argument("--n", type=int, default=None)
            s.add_argument("--k-window", dest="k_window", type=int, default=None)
    return p


def _fail(message: str, kind: str, json_errors: bool) -> int:
    if json_errors:
        sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    else:
        sys.stderr.write(f"levyzoom: error: {message}\n")
    return EXIT_CONFIG


def dispatch(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    json_errors = "--json-errors" in argv
    try:
        args = build_parser().parse_args(argv)
        if args.threads is None:
            args.threads = default_threads()
        elif args.threads < 1:
            raise CliError("--threads must be >= 1")
        if args.command == "limit" and args.seed is None:
            args.seed = 0
        files, code = COMMANDS[args.command](args)
    except (CliError, ConfigError, ModelError, BracketingFailure, UndeterminedError,
            ValueError, KeyError) as exc:
        return _fail(str(exc), type(exc).__name__, json_errors)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            (out / name).write_text(text)
    except OSError as exc:
        return _fail(f"cannot write to {out}: {exc.strerror}", "OutputError", json_errors)
    return code


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
