"""Command-line front end.

Every command prints a JSON report (sorted keys, with a provenance block)
unless it produces a table or CSV.  Quantities such as t, x, x0 and horizons
accept ``e^<expr>`` so that doubly exponential values never overflow.

Exit codes: 0 success/pass, 1 fail/counterexample, 2 usage error,
3 inconclusive.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .config import RunConfig
from .corpus import builtin_corpus, corpus_by_name
from .errors import HypothesisError, LogTauberError
from .funcspec import parse, parse_constant, parse_log_quantity
from .harness import classify, run_suite, run_theorem
from .lemmas import (build_chain, check_liminf_s_over_x, construct_bn, default_t_samples,
                     j_decomposition, verify_lemma1, verify_lemma2, verify_lemma3,
                     verify_lemma4)
from .logmean import integrate_weighted_u, log_mean_u, mean_curve
from .statlimit import (density_profile, detect_ordinary_limit, detect_statistical_limit,
                        exceptional_measure)
from .tauber import (SlowWindow, TauberConstant, check_hardy, check_landau, find_window,
                     primitive, slow_decrease_modulus, slow_oscillation_modulus)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3

# operation -> the one subcommand that exposes it
OPERATION_COMMANDS = {
    "funcspec.parse": "show", "funcspec.from_json": "show", "funcspec.evaluate": "eval",
    "logmean.integrate_weighted": "integrate", "logmean.log_mean": "mean",
    "logmean.mean_curve": "mean",
    "statlimit.exceptional_measure": "measure", "statlimit.density_profile": "density",
    "statlimit.detect_statistical_limit": "stat-limit",
    "statlimit.detect_ordinary_limit": "ord-limit",
    "tauber.slow_decrease_modulus": "modulus", "tauber.slow_oscillation_modulus": "modulus",
    "tauber.find_window": "window", "tauber.check_landau": "check-condition",
    "tauber.check_hardy": "check-condition", "tauber.primitive": "check-condition",
    "lemmas.verify_lemma1": "verify-lemma", "lemmas.verify_lemma2": "verify-lemma",
    "lemmas.verify_lemma3": "verify-lemma", "lemmas.verify_lemma4": "verify-lemma",
    "lemmas.build_chain": "chain", "lemmas.construct_bn": "witness-theorem1",
    "lemmas.j_decomposition": "j-decomp", "lemmas.check_liminf_s_over_x": "liminf",
    "harness.run_theorem": "theorem", "logmean.tau_function": "theorem",
    "harness.run_suite": "suite",
    "harness.classify": "classify", "corpus.builtin_corpus": "corpus",
}


class UsageError(Exception):
    pass


def _log_q(text):
    try:
        return parse_log_quantity(text)
    except (LogTauberError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _num(text):
    try:
        return parse_constant(text)
    except LogTauberError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _num_list(text):
    return tuple(_num(t) for t in text.split(",") if t.strip())


def _log_list(text):
    return tuple(_log_q(t) for t in text.split(",") if t.strip())


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    return v


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2)


# ---------------------------------------------------------------- plumbing

def _load_fn(args):
    if getattr(args, "fn_file", None):
        with open(args.fn_file) as fh:
            text = fh.read()
        name = args.fn_file.rsplit("/", 1)[-1].rsplit(".", 1)[0]
        if text.lstrip().startswith("{"):
            from .funcspec import from_json
            return from_json(text)
        return parse(text, name=name)
    if getattr(args, "fn", None):
        table = corpus_by_name()
        if args.fn not in table:
            raise UsageError(f"unknown corpus function {args.fn!r}; known: {', '.join(table)}")
        return table[args.fn].spec
    raise UsageError("give a function with --fn NAME or --fn-file PATH")


def _config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if getattr(args, "config", None) else RunConfig()
    over = {}
    if getattr(args, "jobs", None) is not None:
        over["jobs"] = args.jobs
    if getattr(args, "horizons", None):
        over["log_horizons"] = args.horizons
    return cfg.merged(over) if over else cfg


def _report(args, cfg, spec, result):
    prov = {"package": "logtauber", "version": __version__, "command": args.command,
            "config": cfg.as_dict()}
    if spec is not None:
        prov["function"] = {"name": spec.name, "source": spec.to_source()}
    return {"provenance": prov, "result": result}


def _emit(args, text):
    out = getattr(args, "out", None)
    if out:
        with open(out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _plot(args, xs, ys):
    if getattr(args, "plot_data", None):
        with open(args.plot_data, "w") as fh:
            for x, y in zip(xs, ys):
                fh.write(f"{float(x)!r} {float(np.real(y))!r}\n")


def _verdict_code(kind, positive):
    return {positive: EXIT_OK, "inconclusive": EXIT_INCONCLUSIVE}.get(kind, EXIT_FAIL)


def _window(args, mode, eps=1.0):
    return SlowWindow(eps, math.exp(args.x0), args.lam, mode)


# ---------------------------------------------------------------- commands

def cmd_show(args, cfg):
    spec = _load_fn(args)
    _emit(args, spec.to_source() if args.format == "dsl" else spec.to_json())
    return EXIT_OK


def cmd_eval(args, cfg):
    spec = _load_fn(args)
    vals = spec.eval_u(np.array(args.x))
    rows = [{"log_x": lx, "value": v} for lx, v in zip(args.x, vals)]
    _emit(args, dumps(_report(args, cfg, spec, rows)))
    return EXIT_OK


def cmd_integrate(args, cfg):
    spec = _load_fn(args)
    v = integrate_weighted_u(spec, args.a, args.b, cfg.abs_tol)
    _emit(args, dumps(_report(args, cfg, spec, {"log_a": args.a, "log_b": args.b,
                                                "integral": v, "abs_tol": cfg.abs_tol})))
    return EXIT_OK


def cmd_mean(args, cfg):
    spec = _load_fn(args)
    if args.points == 1:
        tau = log_mean_u(spec, args.t_max, cfg.abs_tol)
        t = math.exp(args.t_max) if args.t_max < 709 else math.inf
        text = ("t,log_t,loglog_t,tau_re,tau_im\n"
                f"{t!r},{args.t_max!r},{math.log(args.t_max)!r},"
                f"{float(np.real(tau))!r},{float(np.imag(tau))!r}")
        _emit(args, text)
        return EXIT_OK
    curve = mean_curve(spec, n_points=args.points, abs_tol=cfg.abs_tol,
                       log_t_min=args.t_min, log_t_max=args.t_max)
    _emit(args, curve.to_csv().rstrip("\n"))
    _plot(args, curve.loglog_t, curve.tau)
    return EXIT_OK


def cmd_measure(args, cfg):
    spec = _load_fn(args)
    m = exceptional_measure(spec, args.ell, args.eps, None, log_b=args.b)
    _emit(args, dumps(_report(args, cfg, spec, {
        "ell": args.ell, "eps": args.eps, "log_b": args.b, "measure": m.value,
        "bounds": [m.lo, m.hi], "exact": m.exact, "method": m.method})))
    return EXIT_OK


def cmd_density(args, cfg):
    spec = _load_fn(args)
    prof = density_profile(spec, args.ell, args.eps or cfg.epsilons,
                           log_horizons=args.horizons or cfg.log_horizons)
    _emit(args, prof.to_csv().rstrip("\n"))
    _plot(args, prof.log_horizons, prof.density[-1])
    return EXIT_OK


def cmd_stat_limit(args, cfg):
    spec = _load_fn(args)
    v = detect_statistical_limit(spec, epsilons=cfg.epsilons, decay_threshold=cfg.decay_threshold,
                                 log_horizons=cfg.log_horizons)
    _emit(args, dumps(_report(args, cfg, spec, v.as_dict())))
    return _verdict_code(v.kind, "statistical")


def cmd_ord_limit(args, cfg):
    spec = _load_fn(args)
    v = detect_ordinary_limit(spec, tol=cfg.ordinary_tol, log_horizons=cfg.log_horizons)
    _emit(args, dumps(_report(args, cfg, spec, v.as_dict())))
    return _verdict_code(v.kind, "ordinary")


def cmd_modulus(args, cfg):
    spec = _load_fn(args)
    lams = args.lambdas or cfg.lambdas
    if args.mode == "oscillation":
        curve = slow_oscillation_modulus(spec, lams, grid_density=cfg.grid_density,
                                         log_x_horizon=args.x_horizon)
    else:
        curve = slow_decrease_modulus(spec, lams, grid_density=cfg.grid_density,
                                      log_x_horizon=args.x_horizon)
    _emit(args, curve.to_csv().rstrip("\n"))
    _plot(args, curve.lambdas, curve.values)
    return EXIT_OK


def cmd_window(args, cfg):
    spec = _load_fn(args)
    w = find_window(spec, args.eps, args.mode, cfg.search_budget, grid_density=cfg.grid_density)
    _emit(args, dumps(_report(args, cfg, spec, {"found": w is not None,
                                                "window": None if w is None else w.as_dict()})))
    return EXIT_OK if w is not None else EXIT_FAIL


def cmd_check_condition(args, cfg):
    spec = _load_fn(args)
    const = TauberConstant(args.C, math.exp(args.x0))
    if args.condition == "landau":
        rep = check_landau(spec, const, log_horizon=args.horizon)
    else:
        rep = check_hardy(spec, const, log_horizon=args.horizon, u_weighted=args.u_weighted)
    result = {"condition": rep.as_dict()}
    if args.primitive_window is not None:
        mode = "decrease" if args.condition == "landau" else "oscillation"
        w = find_window(primitive(spec, cfg.abs_tol), args.primitive_window, mode,
                        cfg.search_budget, grid_density=cfg.grid_density)
        result["primitive_window"] = None if w is None else w.as_dict()
    _emit(args, dumps(_report(args, cfg, spec, result)))
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_verify_lemma(args, cfg):
    spec = _load_fn(args)
    lid = int(args.lemma)
    if lid in (1, 2):
        mode = "decrease" if lid == 1 else "oscillation"
        t_max = args.t_max if args.t_max is not None else math.exp(3.0)
        fn = verify_lemma1 if lid == 1 else verify_lemma2
        rep = fn(spec, _window(args, mode), t_max, args.pairs, cfg.seed)
    else:
        mode = "decrease" if lid == 3 else "oscillation"
        t_max = args.t_max if args.t_max is not None else 64.0
        samples = default_t_samples(math.exp(args.x0), args.lam, t_max)
        fn = verify_lemma3 if lid == 3 else verify_lemma4
        rep = fn(spec, _window(args, mode), samples, cfg.abs_tol)
    _emit(args, dumps(_report(args, cfg, spec, rep.as_dict())))
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_chain(args, cfg):
    chain = build_chain(log_t=args.t, log_x=args.x, lam=args.lam)
    result = chain.as_dict()
    if args.fn or args.fn_file:
        spec = _load_fn(args)
        terms = chain.telescoping_terms(spec)
        result["terms"] = terms
        result["sum"] = terms.sum()
        result["difference"] = spec.eval_u(np.array([args.t]))[0] - spec.eval_u(np.array([args.x]))[0]
    else:
        spec = None
    _emit(args, dumps(_report(args, cfg, spec, result)))
    return EXIT_OK


def cmd_witness_theorem1(args, cfg):
    spec = _load_fn(args)
    seq = construct_bn(spec, args.ell, args.eps, args.lam, math.exp(args.x0), args.max_n,
                       log_horizon=args.horizon)
    inv = seq.check_invariants(spec)
    _emit(args, dumps(_report(args, cfg, spec, {"sequence": seq.as_dict(), "invariants": inv})))
    return EXIT_OK if all(inv.values()) else EXIT_FAIL


def cmd_j_decomp(args, cfg):
    spec = _load_fn(args)
    j = j_decomposition(spec, abs_tol=cfg.abs_tol, log_x=args.x, log_t=args.t, log_x0=args.x0)
    _emit(args, dumps(_report(args, cfg, spec, j.as_dict())))
    return EXIT_OK


def cmd_liminf(args, cfg):
    spec = _load_fn(args)
    rep = check_liminf_s_over_x(spec, _window(args, "decrease"))
    _emit(args, dumps(_report(args, cfg, spec, rep.as_dict())))
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_theorem(args, cfg):
    spec = _load_fn(args)
    case = run_theorem(args.id, spec, cfg)
    _emit(args, dumps(_report(args, cfg, spec, case.as_dict())))
    return {"pass": EXIT_OK, "consistent-control": EXIT_OK,
            "inconclusive": EXIT_INCONCLUSIVE}.get(case.status, EXIT_FAIL)


def cmd_classify(args, cfg):
    spec = _load_fn(args)
    if not getattr(args, "horizons", None) and not args.config:
        cfg = cfg.merged({"log_horizons": (8.0, 16.0, 32.0, 64.0)})
    obs = classify(spec, cfg)
    _emit(args, dumps(_report(args, cfg, spec, obs.as_dict())))
    return EXIT_OK


def cmd_suite(args, cfg):
    extra = []
    for path in args.fn_file or ():
        with open(path) as fh:
            extra.append(parse(fh.read(), name=path.rsplit("/", 1)[-1].rsplit(".", 1)[0]))
    if args.out:
        cfg = cfg.merged({"out_dir": args.out})
    if args.only:
        cfg = cfg.merged({"corpus": tuple(args.only.split(","))})
    report = run_suite(cfg, extra)
    doc = _report(args, cfg, None, report.as_dict())
    if args.out:
        with open(f"{args.out}/suite.json", "w") as fh:
            fh.write(dumps(doc) + "\n")
    print(dumps(doc) if args.json else report.table())
    return report.exit_code


def cmd_corpus(args, cfg):
    rows = [{"name": e.name, "source": e.spec.to_source(), "note": e.note,
             "expected": e.expected.as_dict()} for e in builtin_corpus()]
    if args.json:
        print(dumps(rows))
    else:
        for r in rows:
            print(f"{r['name']:<4} {r['note']}")
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _add_fn(p, required=True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--fn", help="corpus function name (see `corpus list`)")
    g.add_argument("--fn-file", help="file with a function in the piecewise DSL or JSON")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file merged into the run configuration")
    common.add_argument("--jobs", type=int, help="worker pool size (default: all cores)")
    common.add_argument("--out", help="write the report here instead of standard output")

    ap = argparse.ArgumentParser(prog="logtauber", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"logtauber {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_, description=help_)
        p.set_defaults(func=func)
        return p

    p = add("show", cmd_show, "print a function as DSL or JSON")
    _add_fn(p)
    p.add_argument("--format", choices=("dsl", "json"), default="dsl")

    p = add("eval", cmd_eval, "evaluate s at one or more points")
    _add_fn(p)
    p.add_argument("--x", type=_log_q, nargs="+", required=True, help="points x >= 1")

    p = add("integrate", cmd_integrate, "integral of s(x)/x over [a, b]")
    _add_fn(p)
    p.add_argument("--a", type=_log_q, default=0.0)
    p.add_argument("--b", type=_log_q, required=True)

    p = add("mean", cmd_mean, "logarithmic mean tau(t), as one row or a curve (CSV)")
    _add_fn(p)
    p.add_argument("--t-max", type=_log_q, required=True)
    p.add_argument("--t-min", type=_log_q, default=1.0)
    p.add_argument("--points", type=int, default=1)
    p.add_argument("--plot-data", help="two-column file: log log t, tau")

    p = add("measure", cmd_measure, "measure of {x < b : |s(x) - ell| > eps}")
    _add_fn(p)
    p.add_argument("--ell", type=_num, required=True)
    p.add_argument("--eps", type=_num, required=True)
    p.add_argument("--b", type=_log_q, required=True)

    p = add("density", cmd_density, "exceptional-set densities over eps x horizons (CSV)")
    _add_fn(p)
    p.add_argument("--ell", type=_num, required=True)
    p.add_argument("--eps", type=_num_list, help="decreasing list, e.g. 0.5,0.25,0.1")
    p.add_argument("--horizons", type=_log_list, help="comma list, e.g. 1e2,1e3,e^8")
    p.add_argument("--plot-data", help="two-column file: log b, density at the smallest eps")

    for name, func, what in (("stat-limit", cmd_stat_limit, "statistical"),
                             ("ord-limit", cmd_ord_limit, "ordinary")):
        p = add(name, func, f"finite-horizon {what}-limit verdict")
        _add_fn(p)
        p.add_argument("--horizons", type=_log_list)

    p = add("modulus", cmd_modulus, "slow-decrease or slow-oscillation modulus per lambda (CSV)")
    _add_fn(p)
    p.add_argument("--mode", choices=("decrease", "increase", "oscillation"), default="decrease")
    p.add_argument("--lambdas", type=_num_list)
    p.add_argument("--x-horizon", type=_log_q, default=32.0)
    p.add_argument("--plot-data", help="two-column file: lambda, modulus")

    p = add("window", cmd_window, "search for a window (x0, lambda) that clears eps")
    _add_fn(p)
    p.add_argument("--eps", type=_num, required=True)
    p.add_argument("--mode", choices=("decrease", "oscillation"), default="decrease")

    p = add("check-condition", cmd_check_condition, "one- or two-sided integrand condition")
    p.add_argument("condition", choices=("landau", "hardy"))
    _add_fn(p)
    p.add_argument("--C", type=_num, required=True)
    p.add_argument("--x0", type=_log_q, default=0.0)
    p.add_argument("--horizon", type=_log_q, default=32.0)
    p.add_argument("--u-weighted", action="store_true", help="two-sided bound with the extra u factor")
    p.add_argument("--primitive-window", type=_num, metavar="EPS",
                   help="also search a window for the primitive at this eps")

    p = add("verify-lemma", cmd_verify_lemma, "check a growth lemma on a window with eps = 1")
    p.add_argument("lemma", choices=("1", "2", "3", "4"))
    _add_fn(p)
    p.add_argument("--lambda", dest="lam", type=_num, required=True)
    p.add_argument("--x0", type=_log_q, required=True)
    p.add_argument("--t-max", type=_log_q, help="horizon for t (default e^(e^3) or e^64)")
    p.add_argument("--pairs", type=int, default=10_000)

    p = add("chain", cmd_chain, "geometric chain t_p = t^(lambda^-p) down to x")
    _add_fn(p, required=False)
    p.add_argument("--t", type=_log_q, required=True)
    p.add_argument("--x", type=_log_q, required=True)
    p.add_argument("--lambda", dest="lam", type=_num, default=2.0)

    p = add("witness-theorem1", cmd_witness_theorem1, "construct the sequence b_n and check it")
    _add_fn(p)
    p.add_argument("--ell", type=_num, required=True)
    p.add_argument("--eps", type=_num, required=True)
    p.add_argument("--lambda", dest="lam", type=_num, required=True)
    p.add_argument("--x0", type=_log_q, default=1.0)
    p.add_argument("--horizon", type=_log_q, default=1e6)
    p.add_argument("--max-n", type=int, default=50)

    p = add("j-decomp", cmd_j_decomp, "split tau(t) - tau(x) into J1..J4")
    _add_fn(p)
    p.add_argument("--x", type=_log_q, required=True)
    p.add_argument("--t", type=_log_q, required=True)
    p.add_argument("--x0", type=_log_q, required=True)

    p = add("liminf", cmd_liminf, "lower bound for s(x)/x along x0^(lambda^p)")
    _add_fn(p)
    p.add_argument("--lambda", dest="lam", type=_num, required=True)
    p.add_argument("--x0", type=_log_q, required=True)

    p = add("theorem", cmd_theorem, "run one theorem case on one function")
    p.add_argument("--id", choices=("A", "B", "1", "2", "3", "4"), required=True)
    _add_fn(p)
    p.add_argument("--horizons", type=_log_list)

    p = add("classify", cmd_classify, "detector-based classification of a function")
    _add_fn(p)
    p.add_argument("--horizons", type=_log_list)

    p = add("suite", cmd_suite, "every theorem on every corpus function")
    p.add_argument("--fn-file", action="append", help="extra DSL function (repeatable)")
    p.add_argument("--only", help="comma list of corpus names")
    p.add_argument("--horizons", type=_log_list)
    p.add_argument("--json", action="store_true", help="print JSON instead of the table")

    p = add("corpus", cmd_corpus, "built-in functions")
    p.add_argument("action", choices=("list",))
    p.add_argument("--json", action="store_true")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = _config(args)
        return args.func(args, cfg)
    except UsageError as exc:
        print(f"logtauber {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HypothesisError as exc:
        print(f"logtauber {args.command}: hypothesis not met: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (LogTauberError, ValueError, TypeError, KeyError, OSError) as exc:
        print(f"logtauber {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
