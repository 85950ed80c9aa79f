"""Command-line experiment driver.

Exit codes: 0 success, 1 error (bad config, unknown subcommand, module
failure), 2 a ``verify`` suite ran and at least one check failed.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import os
import sys
import time
import warnings
from typing import Callable

import numpy as np

from . import bounds, functionals, paths, verify
from . import moving_average as ma
from .config import SCHEMA_VERSION, SUBCOMMANDS, ConfigError, ExperimentConfig, loads, parse_config, parse_policy_spec
from .core import _json_float, choquet_lower, choquet_upper
from .measures import GeneratorSet

EXIT_OK, EXIT_ERROR, EXIT_VERIFY_FAILED = 0, 1, 2


def build_policy(spec: str, gen: GeneratorSet) -> paths.Policy:
    name, idx = parse_policy_spec(spec)
    if name == "mean-seeking":
        pol = paths.mean_seeking_policy(gen)
    elif name == "constant":
        pol = paths.ConstantPolicy(idx[0])
    else:
        pol = paths.CyclicPolicy(idx)
    pol.validate(len(gen))
    return pol


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


class Outcome:
    """What a subcommand produced: JSON results, CSV tables, console text, exit code."""

    def __init__(self):
        self.results: dict = {}
        self.tables: dict[str, str] = {}
        self.lines: list[str] = []
        self.code = EXIT_OK

    def say(self, text: str):
        self.lines.append(text)


def _choquet(cfg, gen, out):
    p = cfg.params
    up = choquet_upper(gen, tol=p["tol"], t_cap=p["t_cap"])
    lo = choquet_lower(gen, tol=p["tol"], t_cap=p["t_cap"])
    out.results = {"upper": up.to_dict(), "lower": lo.to_dict()}
    out.say(f"C_V[X] = {up.value:.10g} ({up.status})")
    out.say(f"C_v[X] = {lo.value:.10g} ({lo.status})")
    if p["r"] is not None:
        ab = functionals.choquet_abs_power(gen, p["r"], tol=p["tol"], t_cap=p["t_cap"])
        pos = functionals.choquet_pos_power(gen, p["r"], tol=p["tol"], t_cap=p["t_cap"])
        out.results.update(abs_power=ab.to_dict(), pos_power=pos.to_dict())
        out.say(f"C_V[|X|^r] = {ab.value:.10g} ({ab.status})")
        out.say(f"C_V[(X+)^r] = {pos.value:.10g} ({pos.status})")


def _functionals(cfg, gen, out):
    rep = functionals.functional_report(gen, r=cfg.params["r"], tol=cfg.params["tol"])
    out.results = rep.to_dict()
    out.say(f"sigma_bar^2 = {rep.sigma_bar_sq:.10g}")
    out.say(f"varsigma = {rep.varsigma.value:.10g} ({rep.varsigma.status})")
    out.say(f"eta_r = {rep.eta.value:.10g} ({rep.eta.status})")
    out.say(f"upper mean = {rep.mean_upper:.10g}, lower mean = {rep.mean_lower:.10g}")


def _series(cfg, gen, out):
    p = cfg.params
    curves = []
    if p["which"] in ("truncated", "both"):
        curves.append(functionals.series_truncated_moment(gen, p["p"], p["delta"], p["N"]))
    if p["which"] in ("excess", "both"):
        curves.append(functionals.series_excess_moment(gen, p["r"], p["N"], with_integral_form=p["integral_form"]))
    rtol = cfg.tolerances["series_cauchy_rtol"]
    out.results = {"curves": [c.to_dict() for c in curves]}
    for c in curves:
        out.tables[f"series_{c.name}.csv"] = c.to_csv()
        out.say(f"{c.name}: total {c.total:.10g}, cauchy {c.is_cauchy(rtol)}")


def _bound(cfg, gen, out):
    p = cfg.params
    if p["kind"] == "exp":
        value, inp = bounds.best_exp_inequality_rhs(gen, p["n"], p["x"])
        out.results = {"rhs": value, "inputs": dataclasses.asdict(inp)}
        out.say(f"exponential inequality rhs = {value:.10g}")
        return
    s2 = p["sigma_bar_sq"]
    if s2 is None:
        s2 = functionals.functional_report(gen, r=p["r"]).sigma_bar_sq
    rep = bounds.blocking_bound(bounds.BlockingInputs(p["r"], p["p"], p["z"], s2, p["K_max"]), gen)
    out.results = {"bound": rep.to_dict()}
    out.tables["blocks.csv"] = _csv(["k", "n_k", "g1_k", "g2_k", "g3_k"],
                                    [[b["k"], b["n_k"], b["g1"], b["g2"], b["g3"]] for b in rep.blocks])
    out.say(rep.table())
    out.say(f"g1 = {rep.g1:.6g}, g2 = {rep.g2:.6g}, g3 = {rep.g3:.6g}, total = {rep.total:.6g}")
    if p["integrate"]:
        integ = bounds.integrate_blocking_bound(gen, p["r"], p["p"], s2, K_max=p["K_max"])
        out.results["integral"] = integ.to_dict()
        out.say(f"integral over z = {integ.value:.6g} (cauchy {integ.cauchy})")


def _dp(cfg, gen, out):
    p = cfg.params
    if p["functional"] == "max_stat":
        f = paths.max_stat_functional(p["r"], p["mode"])
    elif p["functional"] == "partial_sum":
        f = paths.partial_sum()
    else:
        f = paths.abs_partial_sum()
    res = paths.solve_dp(gen, f, p["N"], p["cap"])
    out.results = {"upper": res.value}
    out.say(f"upper value: {res.value:.6f}")
    if p["lower"]:
        lo = paths.exact_dp_lower(gen, f, p["N"], p["cap"])
        out.results["lower"] = lo
        out.say(f"lower value: {lo:.6f}")


def _simulate(cfg, gen, out):
    p = cfg.params
    mc_cfg = paths.MaxStatConfig(p["N"], p["r"], p["mode"], seed=cfg.seed, replications=p["replications"])
    pols = [build_policy(s, gen) for s in p["policies"]]
    est = paths.mc_choquet_max_moment(gen, pols, mc_cfg, threads=cfg.threads)
    out.results = est.to_dict()
    rows = []
    for e in est.estimates:
        t, surv = e.survival_curve()
        rows.extend([e.label, repr(float(a)), repr(float(b))] for a, b in zip(t, surv))
        out.say(f"{e.label}: mean {e.mean:.6g} +- {e.se:.2g} (95% CI [{e.ci_lo:.6g}, {e.ci_hi:.6g}])")
    out.tables["survival.csv"] = _csv(["policy", "t", "survival"], rows)
    env = est.envelope
    out.say(f"envelope (lower estimate): {env.mean:.6g} via {env.label}")
    if p["dump_paths"]:
        k = min(p["dump_paths"], p["replications"])
        S = paths.sample_paths(gen, pols[0], p["N"], cfg.seed, range(k))
        out.tables["paths.csv"] = _csv(["replication", "n", "S_n"],
                                       ([i, n + 1, repr(float(S[i, n]))] for i in range(k) for n in range(p["N"])))


def _probe(cfg, gen, out):
    p = cfg.params
    grid = [2**k for k in range(p["k_min"], p["k_max"] + 1)]
    res = paths.plateau_divergence_probe(gen, p["r"], p["mode"], grid, p["replications"], cfg.seed,
                                         build_policy(p["policy"], gen), cfg.threads,
                                         cfg.tolerances["plateau_rtol"], cfg.tolerances["growth"])
    out.results = res.to_dict()
    out.tables["probe.csv"] = _csv(["N", "mean", "se"],
                                   [[n, repr(float(m)), repr(float(s))] for n, m, s in zip(grid, res.means, res.ses)])
    out.say(f"verdict: {res.verdict}")


def _ma_lil(cfg, gen, out):
    p = cfg.params
    coeffs = ma.Coefficients.from_dict(p["coefficients"])
    seeds = p["seeds"] if isinstance(p["seeds"], list) else [cfg.seed + i for i in range(p["seeds"])]
    window = (p["n0"], p["N"]) if p["n0"] is not None else ma.default_window(p["N"])
    policy = build_policy(p["policy"], gen)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        est = ma.lil_estimate(coeffs, gen, p["N"], seeds, window, p["m"], p["convention"], policy, cfg.threads)
    out.results = est.to_dict()
    out.results["residuals"] = est.residuals.tolist()
    out.results["warnings"] = [str(w.message) for w in caught]
    out.tables["ma_summary.csv"] = est.summary_csv()
    out.say(f"median max |T_n|/a_n = {est.median:.6g}, target {est.target:.6g}, ratio {est.ratio:.4g}")
    for w in caught:
        out.say(f"warning: {w.message}")
    if p["coverage"] or p["dump_full_paths"]:
        sims = [ma.simulate_ma(coeffs, gen, p["N"], s, p["m"], p["convention"], policy) for s in seeds]
        if p["coverage"]:
            cov = ma.cluster_coverage(sims, est.target, window)
            out.results["coverage"] = {"edges": cov.edges.tolist(), "counts": cov.counts.tolist(),
                                       "interior_visited": cov.interior_visited(cfg.tolerances["coverage_frac"])}
        if p["dump_full_paths"]:
            size = sum(s.N for s in sims)
            print(f"warning: dumping {size} path points", file=sys.stderr)
            out.tables["ma_paths.csv"] = _csv(["seed", "t", "Y", "X", "T"], (
                [s.seed, t + 1, repr(float(s.Y[t])), repr(float(s.X[t])), repr(float(s.T[t]))]
                for s in sims for t in range(s.N)))


def _verify(cfg, gen, out, progress: Callable | None = None):
    p = cfg.params
    rep = verify.run_suite(p["suite"], p["checks"], cfg.seed, cfg.threads, cfg.tolerances, progress=progress)
    out.results = rep.to_dict()
    out.tables["verdicts.csv"] = _csv(["criterion", "check", "passed", "runtime_s"],
                                      [[r.criterion, r.name, r.passed, f"{r.runtime_s:.3f}"] for r in rep.results])
    if progress is None:
        out.say(rep.table())
    out.code = EXIT_OK if rep.passed else EXIT_VERIFY_FAILED


HANDLERS = {
    "choquet": _choquet, "functionals": _functionals, "series": _series, "bound": _bound, "dp": _dp,
    "simulate": _simulate, "probe": _probe, "ma-lil": _ma_lil, "verify": _verify,
}


def run(cfg: ExperimentConfig, echo: Callable[[str], None] | None = None) -> tuple[dict, Outcome]:
    """Dispatch one experiment; returns the run report and the raw outcome.

    Module errors are caught and recorded in the report with exit code 1.
    """
    out = Outcome()
    t0 = time.perf_counter()
    error = None
    try:
        gen = cfg.generator_set() if cfg.dist is not None else None
        if cfg.subcommand == "verify" and echo is not None:
            _verify(cfg, gen, out, progress=lambda r: echo(r.line()))
        else:
            HANDLERS[cfg.subcommand](cfg, gen, out)
    except Exception as exc:  # every module failure becomes an error report
        error = f"{type(exc).__name__}: {exc}"
        out.code = EXIT_ERROR
    report = {
        "schema_version": SCHEMA_VERSION,
        "config": cfg.resolved(),
        "config_hash": cfg.content_hash(),
        "results": _sanitize(out.results),
        "wall_time_s": time.perf_counter() - t0,
        "exit_code": out.code,
        "error": error,
    }
    if cfg.subcommand == "verify" and error is None:
        report["verdicts"] = {c["name"]: c["passed"] for c in out.results["checks"]}
    return report, out


def _sanitize(obj):
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _sanitize(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return _json_float(float(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_outputs(report: dict, out: Outcome, directory: str) -> None:
    os.makedirs(directory, exist_ok=True)
    with open(os.path.join(directory, "report.json"), "w") as fh:
        json.dump(report, fh, indent=2, allow_nan=False)
        fh.write("\n")
    for name, text in out.tables.items():
        with open(os.path.join(directory, name), "w") as fh:
            fh.write(text)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_ERROR)


def _key_value(text: str) -> tuple[str, object]:
    name, sep, raw = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    try:
        value = loads(raw)
    except ConfigError:
        value = raw
    return name, value


def _json_or_file(text: str):
    if text.startswith("@"):
        with open(text[1:]) as fh:
            text = fh.read()
    return loads(text)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="sublin", description="Sub-linear expectation numerics and verification runner.")
    ap.add_argument("subcommand", nargs="?", help=f"one of: {', '.join(SUBCOMMANDS)}")
    ap.add_argument("--config", help="JSON config file (a previous report.json also works)")
    ap.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    ap.add_argument("--threads", type=int, help="worker threads")
    ap.add_argument("--out", help="directory for report.json and CSV tables")
    ap.add_argument("--tolerance", action="append", default=[], type=_key_value, metavar="NAME=VALUE")
    ap.add_argument("--param", action="append", default=[], type=_key_value, metavar="NAME=VALUE",
                    help="subcommand parameter; the value is parsed as JSON when possible")
    ap.add_argument("--dist", help="generator set as JSON text or @file")
    ap.add_argument("--suite", help="verify: suite name (quick or full)")
    ap.add_argument("--check", action="append", help="verify: run only this check (repeatable)")
    ap.add_argument("--json", action="store_true", help="print the full report as JSON")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc = {}
        if args.config:
            with open(args.config) as fh:
                doc = loads(fh.read())
        params = dict(args.param)
        if args.suite:
            params["suite"] = args.suite
        if args.check:
            params["checks"] = args.check
        overrides = {
            "subcommand": args.subcommand, "seed": args.seed, "threads": args.threads, "out": args.out,
            "dist": _json_or_file(args.dist) if args.dist else None,
            "params": params, "tolerances": dict(args.tolerance),
        }
        cfg = parse_config(doc, overrides)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"sublin: error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    echo = None if args.json else (lambda s: print(s, flush=True))
    report, out = run(cfg, echo)
    if cfg.out:
        try:
            write_outputs(report, out, cfg.out)
        except OSError as exc:
            print(f"sublin: error: cannot write outputs: {exc}", file=sys.stderr)
            return EXIT_ERROR
    if args.json:
        print(json.dumps(report, indent=2, allow_nan=False))
    else:
        for line in out.lines:
            print(line)
        print(f"config {report['config_hash'][:12]}  wall {report['wall_time_s']:.2f}s")
    if report["error"]:
        print(f"sublin: error: {report['error']}", file=sys.stderr)
    return out.code


if __name__ == "__main__":
    sys.exit(main())
