"""Experiment runner: config parsing, seeded execution, CSV/JSON emission.

Every experiment writes into an output directory: one or more CSV data
files (RFC 4180, header row), optional metrics JSON, and a
``run_manifest.json`` echoing the configuration, the package version,
the wall-clock time, and a sha256 checksum per output file.  Given the
same configuration and seed, every output byte is reproducible.

Configuration comes from command-line flags, optionally backed by an
INI-style file (section per experiment); flags override file values.

Exit codes: 0 success, 2 configuration error, 3 runtime model error.
"""

import argparse
import configparser
import csv
import hashlib
import json
import math
import os
import sys
import time
from multiprocessing import get_context

import numpy as np

from . import __version__, backend
from .distributions import parse_distribution
from .errors import ConfigError, HeavyTailsError, ParameterError
from .tails import EmpiricalDistribution

ENV_OUTPUT_ROOT = "HEAVYTAILS_OUTPUT_ROOT"


def _fmt(v):
    """17-significant-digit float serialization (lossless round-trip)."""
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"not serializable: {type(v)}")


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _manifest(outdir, experiment, params, outputs, t0, columns=None):
    man = {
        "experiment": experiment,
        "config": params,
        "version": __version__,
        "backend": backend.backend_name(),
        "wallclock_s": time.time() - t0,
        "outputs": {name: _sha256(os.path.join(outdir, name))
                    for name in outputs},
    }
    if columns:
        man["columns"] = columns
    _write_json(os.path.join(outdir, "run_manifest.json"), man)
    return man


def _outdir(args, params):
    out = getattr(args, "out", None) or params.get("out")
    if out is None:
        root = os.environ.get(ENV_OUTPUT_ROOT, ".")
        out = os.path.join(root, f"{args.experiment}-run")
    os.makedirs(out, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# rate-function grammar for the aging model


def parse_rate(text):
    """``const:c=V`` | ``prop:c=V`` (c*a) | ``powerlaw:c=V,q=V`` (c*a^q)."""
    kind, _, args = text.strip().partition(":")
    kv = {}
    if args:
        for piece in args.split(","):
            k, sep, v = piece.partition("=")
            if not sep:
                raise ConfigError(f"bad rate parameter {piece!r}")
            kv[k.strip()] = float(v)
    kind = kind.strip().lower()
    if kind == "const":
        c = kv.pop("c", 1.0)
        fn = lambda a, c=c: c * np.ones_like(np.asarray(a, dtype=float))
    elif kind == "prop":
        c = kv.pop("c", 1.0)
        fn = lambda a, c=c: c * np.asarray(a, dtype=float)
    elif kind == "powerlaw":
        c = kv.pop("c", 1.0)
        q = kv.pop("q", 1.0)
        fn = lambda a, c=c, q=q: c * np.asarray(a, dtype=float) ** q
    else:
        raise ConfigError(f"unknown rate kind {kind!r}")
    if kv:
        raise ConfigError(f"unknown rate parameters {sorted(kv)} in {text!r}")
    return fn


# ---------------------------------------------------------------------------
# experiments


def run_langevin(params, outdir):
    from .langevin import LangevinParams, simulate_langevin, estimate_tail_beta
    lp = LangevinParams(b_law=parse_distribution(params["b"]),
                        f_law=parse_distribution(params["f"]),
                        burn_in=params["burnin"], stride=params["stride"],
                        x0=params["x0"])
    run = simulate_langevin(lp, params["steps"], params["seed"])
    outputs = []
    if params["mode"] == "trajectory":
        rows = enumerate(run.raw.tolist())
        _write_csv(os.path.join(outdir, "trajectory.csv"), ["t", "x"], rows)
        outputs.append("trajectory.csv")
    else:
        rows = ((x,) for x in (run.samples.samples.tolist() if run.samples else []))
        _write_csv(os.path.join(outdir, "samples.csv"), ["x"], rows)
        outputs.append("samples.csv")
    metrics = {"diverged_at": run.diverged_at,
               "n_samples": run.samples.count if run.samples else 0,
               "second_moment": run.trace[-1][1] if run.trace else None}
    try:
        fit = estimate_tail_beta(run)
        metrics["tail_beta"] = fit.exponent
        metrics["tail_stderr"] = fit.stderr
    except HeavyTailsError as exc:
        metrics["tail_beta"] = None
        metrics["tail_note"] = str(exc)
    _write_json(os.path.join(outdir, "metrics.json"), metrics)
    outputs.append("metrics.json")
    return outputs


def run_graph(params, outdir):
    from . import graphgen
    if params["kind"] == "dma":
        cfg = graphgen.DmaConfig(n=params["n"], gamma=params["gamma"],
                                 alpha=params["alpha"], c1=params["c1"])
        g = graphgen.generate_dma_graph(cfg, params["seed"])
    else:
        cfg = graphgen.CameoConfig(n=params["n"], alpha=params["alpha"],
                                   phi=parse_distribution(params["phi"]),
                                   out_degree=params["dout"])
        g = graphgen.generate_cameo_graph(cfg, params["seed"])
    _write_csv(os.path.join(outdir, "edges.csv"), ["src", "dst"],
               g.edges.tolist())
    _write_csv(os.path.join(outdir, "degrees.csv"),
               ["vertex", "omega_or_group", "dout", "din", "d"],
               ((v, g.labels[v], g.d_out[v], g.d_in[v], g.d[v])
                for v in range(g.n)))
    metrics = {"n": g.n, "n_edges": int(g.edges.shape[0]),
               "n_choices": g.n_choices}
    try:
        stats = graphgen.degree_stats(g)
        metrics["degree_ccdf_exponent"] = stats["fit"].exponent
        metrics["degree_ccdf_stderr"] = stats["fit"].stderr
    except HeavyTailsError:
        pass
    _write_json(os.path.join(outdir, "metrics.json"), metrics)
    return ["edges.csv", "degrees.csv", "metrics.json"]


def run_intermittency(params, outdir):
    from .intermittency import (ThresholdModel, pmf_bounds, pmf_series,
                                simulate_episodes)
    model = ThresholdModel(F=parse_distribution(params["F"]),
                           G=parse_distribution(params["G"]),
                           eta=params["eta"])
    tmax = params["tmax"]
    series = pmf_series(model, tmax)
    bounds = [pmf_bounds(model, T) for T in range(tmax + 1)]
    if params["oracle_only"]:
        mc = se = [None] * (tmax + 1)
        extras = {}
    else:
        pmf = simulate_episodes(model, params["episodes"],
                                t_cap=params["tcap"], seed=params["seed"])
        mc = pmf.values[:tmax + 1]
        se = pmf.stderr[:tmax + 1].tolist()
        extras = {"censored": pmf.censored, "episodes": pmf.n_episodes}
    rows = [(T,
             "" if mc[T] is None else mc[T],
             series.values[T], bounds[T][0], bounds[T][1],
             "" if se[T] is None else se[T])
            for T in range(tmax + 1)]
    _write_csv(os.path.join(outdir, "pmf.csv"),
               ["T", "p_mc", "p_series", "p_lower", "p_upper", "se_mc"], rows)
    if extras:
        _write_json(os.path.join(outdir, "metrics.json"), extras)
        return ["pmf.csv", "metrics.json"]
    return ["pmf.csv"]


def run_queue(params, outdir):
    from .queueing import (QueueConfig, analytic_ltp_edf, analytic_ltp_fcfs,
                           run_des, snapshot_compare)
    cfg = QueueConfig(arrival=parse_distribution(params["arrival"]),
                      service=parse_distribution(params["service"]),
                      deadline=parse_distribution(params["deadline"]),
                      policy=params["policy"])
    window = None
    if params["snapshot_q"]:
        lo, _, hi = params["snapshot_q"].partition(":")
        window = (float(lo), float(hi))
    res = run_des(cfg, horizon=params["horizon"], seed=params["seed"],
                  max_departures=params["max_departures"],
                  snapshot_rate=params["snapshot_rate"], q_window=window)
    _write_csv(os.path.join(outdir, "tasks.csv"),
               ["seq", "arrival", "service", "deadline", "start", "finish",
                "wait", "late"],
               ((t.seq, t.arrival, t.service, t.deadline_rel, t.first_start,
                 t.finish, t.wait, int(t.late)) for t in res.tasks))
    outputs = ["tasks.csv"]
    metrics = dict(res.metrics)
    metrics["policy"] = cfg.policy
    metrics["rho"] = cfg.rho
    metrics.update(res.flags)
    if res.snapshots and window is not None:
        pooled = np.sort(np.concatenate(
            [l for (_t, q, l) in res.snapshots
             if window[0] <= q <= window[1]]))
        if pooled.size:
            q_c = 0.5 * (window[0] + window[1])
            oracle = (analytic_ltp_edf if cfg.policy == "edf"
                      else analytic_ltp_fcfs)(cfg.deadline, cfg.lam, q_c)
            emp = np.arange(1, pooled.size + 1) / pooled.size
            _write_csv(os.path.join(outdir, "ltp.csv"),
                       ["x", "F_emp", "F_analytic"],
                       zip(pooled.tolist(), emp.tolist(),
                           np.asarray(oracle(pooled)).tolist()))
            outputs.append("ltp.csv")
            try:
                ks, n_obs = snapshot_compare(res.snapshots, cfg.deadline,
                                             cfg.lam, window, cfg.policy)
                metrics["ltp_ks"] = ks
                metrics["ltp_observations"] = n_obs
            except HeavyTailsError as exc:
                metrics["ltp_note"] = str(exc)
    _write_json(os.path.join(outdir, "metrics.json"), metrics)
    outputs.append("metrics.json")
    return outputs


def run_aging(params, outdir):
    from .queueing import AgingConfig, aging_evolve, aging_stationary
    cfg = AgingConfig(p=parse_rate(params["p"]), mu=parse_rate(params["mu"]),
                      inflow=parse_rate(params["inflow"]),
                      cutoff=params["T"], a_max=params["amax"],
                      da=params["da"])
    sta = aging_stationary(cfg)
    if params["evolve"]:
        dt = params["dt"] or 0.5 * cfg.da / float(np.max(cfg.fields(cfg.grid())[0]))
        a, M_pde = aging_evolve(cfg, dt, params["tend"])
    else:
        M_pde = np.full_like(sta["M"], math.nan)
    _write_csv(os.path.join(outdir, "profile.csv"),
               ["a", "M_stationary", "M_pde"],
               zip(sta["a"].tolist(), sta["M"].tolist(), M_pde.tolist()))
    _write_json(os.path.join(outdir, "metrics.json"),
                {"kind": sta["kind"], "k": sta["k"], "q": sta["q"],
                 "balance_residual": sta["balance_residual"],
                 "stationary": sta["stationary"]})
    return ["profile.csv", "metrics.json"]


def run_sandpile(params, outdir):
    from .sandpile import LatticeConfig, fss_fit, run_avalanches
    Ls = [int(v) for v in str(params["L"]).split(",")]
    outputs = []
    by_L = {k: {} for k in ("s", "a", "t")}
    audits = {}
    for L in Ls:
        cfg = LatticeConfig(L=L, model=params["model"], ec=params["ec"],
                            exact=params["exact"])
        records, dists, pile = run_avalanches(cfg, params["n"],
                                              seed=params["seed"])
        name = f"avalanches_L{L}.csv"
        _write_csv(os.path.join(outdir, name),
                   ["s", "a", "t", "dissipated"],
                   ((r.s, r.a, r.t, r.dissipated) for r in records))
        outputs.append(name)
        for k in by_L:
            by_L[k][L] = dists[k].samples
        audits[L] = float(pile.energy_residual())
    fss = {"energy_residual": audits}
    if len(Ls) >= 2:
        for k, samples in by_L.items():
            try:
                fit = fss_fit(samples)
                fss[k] = {"tau": fit.tau, "tau_stderr": fit.tau_stderr,
                          "sigma": fit.sigma, "sigma_stderr": fit.sigma_stderr,
                          "collapse": fit.collapse,
                          "low_confidence": fit.low_confidence}
            except HeavyTailsError as exc:
                fss[k] = {"error": str(exc)}
    else:
        fss["note"] = "finite-size scaling needs >= 2 lattice sizes"
    _write_json(os.path.join(outdir, "fss.json"), fss)
    outputs.append("fss.json")
    return outputs


def run_bench(params, outdir):
    from .bench import run_benchmarks
    results = run_benchmarks(seed=params["seed"], scale=params["scale"])
    _write_json(os.path.join(outdir, "bench.json"), results)
    return ["bench.json"]


_RUNNERS = {
    "langevin": run_langevin,
    "graph": run_graph,
    "intermittency": run_intermittency,
    "queue": run_queue,
    "aging": run_aging,
    "sandpile": run_sandpile,
    "bench": run_bench,
}


def run_experiment(experiment, params, outdir):
    """Execute one experiment; returns the manifest dict."""
    t0 = time.time()
    os.makedirs(outdir, exist_ok=True)
    outputs = _RUNNERS[experiment](params, outdir)
    class _A:
        pass
    man = _manifest(outdir, experiment, params, outputs, t0)
    return man


# ---------------------------------------------------------------------------
# argument plumbing

_SCHEMAS = {
    # name: (type, default, help); required when default is REQUIRED
    "langevin": {
        "b": (str, None, "amplification law (distribution grammar)"),
        "f": (str, None, "additive-noise law"),
        "steps": (int, 1_000_000, "total iterations"),
        "burnin": (int, 10_000, "discarded initial steps"),
        "stride": (int, 10, "sampling stride after burn-in"),
        "x0": (float, 0.0, "initial state"),
        "mode": (str, "samples", "samples | trajectory"),
        "seed": (int, None, "RNG seed"),
    },
    "graph": {
        "kind": (str, None, "dma | cameo"),
        "n": (int, 100_000, "vertex count"),
        "gamma": (float, 3.0, "group-size exponent (dma)"),
        "alpha": (float, 0.5, "preference exponent"),
        "c1": (float, None, "group-size normalization (dma)"),
        "phi": (str, "exp:rate=1", "trait law (cameo)"),
        "dout": (int, 3, "choices per vertex (cameo)"),
        "seed": (int, None, "RNG seed"),
    },
    "intermittency": {
        "F": (str, "uniform", "state law"),
        "G": (str, "uniform", "threshold law"),
        "eta": (float, None, "state-only redraw probability"),
        "episodes": (int, 1_000_000, "Monte Carlo episodes"),
        "tmax": (int, 50, "largest tabulated T"),
        "tcap": (int, 10_000, "censoring cap"),
        "oracle_only": (bool, False, "skip the Monte Carlo pass"),
        "seed": (int, None, "RNG seed"),
    },
    "queue": {
        "arrival": (str, "exp:rate=1", "interarrival law"),
        "service": (str, "exp:rate=2", "service law"),
        "deadline": (str, "exp:rate=1", "relative-deadline law"),
        "policy": (str, "fcfs", "edf | fcfs | ros"),
        "horizon": (float, 10_000.0, "simulated time"),
        "max_departures": (int, None, "stop after this many completions"),
        "snapshot_rate": (float, 0.0, "Poisson inspection rate"),
        "snapshot_q": (str, None, "queue-length window LO:HI"),
        "seed": (int, None, "RNG seed"),
    },
    "aging": {
        "p": (str, "const:c=1", "aging speed (rate grammar)"),
        "mu": (str, "const:c=1", "service rate"),
        "inflow": (str, "const:c=1", "inflow density on [0, T]"),
        "T": (float, 1.0, "inflow cutoff"),
        "amax": (float, None, "grid extent"),
        "da": (float, None, "grid spacing"),
        "dt": (float, None, "time step (default from CFL)"),
        "tend": (float, 50.0, "evolution end time"),
        "evolve": (bool, False, "also run the PDE evolution"),
        "seed": (int, 0, "unused; accepted for uniformity"),
    },
    "sandpile": {
        "model": (str, "btw", "btw | zhang"),
        "L": (str, "64", "lattice side(s), comma-separated"),
        "n": (int, 100_000, "avalanches collected after transient"),
        "ec": (float, 1.0, "critical energy"),
        "exact": (bool, False, "integer E_c/4 units (btw)"),
        "seed": (int, None, "RNG seed"),
    },
    "bench": {
        "scale": (float, 0.2, "workload scale factor"),
        "seed": (int, 0, "RNG seed"),
    },
}

_STOCHASTIC = {"langevin", "graph", "intermittency", "queue", "sandpile"}


def _load_file_section(path, section):
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise ConfigError(f"cannot read config file {path!r}")
    if not cp.has_section(section):
        return {}
    return dict(cp.items(section))


def _coerce(schema, key, raw):
    typ = schema[key][0]
    if typ is bool:
        if isinstance(raw, bool):
            return raw
        return str(raw).strip().lower() in ("1", "true", "yes", "on")
    return typ(raw)


def _resolve_params(experiment, args):
    schema = _SCHEMAS[experiment]
    params = {k: v for k, (_t, v, _h) in schema.items()}
    if args.config:
        for k, raw in _load_file_section(args.config, experiment).items():
            if k in ("out",):
                params["out"] = raw
                continue
            if k not in schema:
                raise ConfigError(f"unknown config key {k!r} for {experiment}")
            params[k] = _coerce(schema, k, raw)
    for k in schema:
        v = getattr(args, k, None)
        if v is not None and v is not False:
            params[k] = v
    if experiment in _STOCHASTIC and params.get("seed") is None:
        raise ConfigError(f"{experiment} is stochastic: --seed is mandatory")
    missing = [k for k, v in params.items()
               if v is None and k in ("b", "f", "kind", "eta")]
    if missing:
        raise ConfigError(f"missing required parameters: {missing}")
    return params


def build_parser():
    ap = argparse.ArgumentParser(
        prog="heavytails",
        description="Experiment runner for heavy-tailed model suites.")
    sub = ap.add_subparsers(dest="experiment", required=True)
    for name, schema in _SCHEMAS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="INI config file (flags override)")
        sp.add_argument("--out", help="output directory")
        for key, (typ, default, help_) in schema.items():
            flag = "--" + key.replace("_", "-")
            if typ is bool:
                sp.add_argument(flag, action="store_true", default=None,
                                help=help_)
            else:
                sp.add_argument(flag, type=typ, default=None, help=help_)
    sw = sub.add_parser("sweep")
    sw.add_argument("--config", help="INI config file for the base cell")
    sw.add_argument("--out", required=True, help="sweep root directory")
    sw.add_argument("--target", required=True,
                    help="experiment to fan out")
    sw.add_argument("--set", action="append", default=[],
                    metavar="KEY=V1,V2,...",
                    help="parameter values to sweep (repeatable)")
    sw.add_argument("--seeds", default="0",
                    help="comma list or LO:HI range of seeds")
    sw.add_argument("--workers", type=int, default=1)
    co = sub.add_parser("collect")
    co.add_argument("--out", required=True, help="sweep root to merge")
    return ap


def _parse_seeds(text):
    if ":" in text:
        lo, _, hi = text.partition(":")
        return list(range(int(lo), int(hi)))
    return [int(v) for v in text.split(",")]


def _sweep_cell(job):
    experiment, params, outdir = job
    run_experiment(experiment, params, outdir)
    return outdir


def cmd_sweep(args):
    experiment = args.target
    if experiment not in _SCHEMAS:
        raise ConfigError(f"unknown sweep target {experiment!r}")
    schema = _SCHEMAS[experiment]
    base = {k: v for k, (_t, v, _h) in schema.items()}
    if args.config:
        for k, raw in _load_file_section(args.config, experiment).items():
            if k not in schema:
                raise ConfigError(f"unknown config key {k!r}")
            base[k] = _coerce(schema, k, raw)
    axes = []
    for spec in args.set:
        key, sep, vals = spec.partition("=")
        if not sep or key not in schema:
            raise ConfigError(f"bad sweep axis {spec!r}")
        axes.append((key, [_coerce(schema, key, v) for v in vals.split(",")]))
    seeds = _parse_seeds(args.seeds)
    cells = [dict(base)]
    for key, vals in axes:
        cells = [dict(c, **{key: v}) for c in cells for v in vals]
    jobs = []
    idx = 0
    for cell in cells:
        for seed in seeds:
            p = dict(cell, seed=seed)
            jobs.append((experiment, p, os.path.join(args.out, f"cell_{idx:04d}")))
            idx += 1
    os.makedirs(args.out, exist_ok=True)
    if args.workers > 1:
        with get_context("spawn").Pool(args.workers) as pool:
            pool.map(_sweep_cell, jobs)
    else:
        for job in jobs:
            _sweep_cell(job)
    _write_json(os.path.join(args.out, "sweep.json"),
                {"target": experiment, "cells": len(jobs),
                 "axes": {k: v for k, v in axes}, "seeds": seeds})
    return 0


def cmd_collect(args):
    root = args.out
    index = []
    for name in sorted(os.listdir(root)):
        man_path = os.path.join(root, name, "run_manifest.json")
        if os.path.isfile(man_path):
            with open(man_path) as fh:
                man = json.load(fh)
            index.append({"cell": name, "experiment": man["experiment"],
                          "config": man["config"],
                          "outputs": man["outputs"]})
    if not index:
        raise ConfigError(f"no run manifests under {root!r}")
    _write_json(os.path.join(root, "collected.json"), index)
    return 0


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.experiment == "sweep":
            return cmd_sweep(args)
        if args.experiment == "collect":
            return cmd_collect(args)
        params = _resolve_params(args.experiment, args)
        outdir = _outdir(args, params)
        params.pop("out", None)
        run_experiment(args.experiment, params, outdir)
        return 0
    except (ConfigError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except HeavyTailsError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
