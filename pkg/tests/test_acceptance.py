"""End-to-end acceptance checks.

Each test covers one numbered criterion and prints a single
``ACCEPTANCE n PASS/FAIL`` line with the measured values.
"""

import json
import math
import os
from fractions import Fraction

import numpy as np
import pytest

from heavytails.distributions import Pareto, parse_distribution
from heavytails.intermittency import (ThresholdModel, crossover,
                                      pmf_bounds, pmf_eta1, pmf_eta1_beta,
                                      pmf_series, pmf_uniform_gf,
                                      pmf_uniform_nested, simulate_episodes)
from heavytails.langevin import LangevinParams, simulate_langevin
from heavytails.queueing import (QueueConfig, aging_evolve, aging_stationary,
                                 analytic_ltp_edf, boxma_tail, frontier,
                                 run_des, snapshot_compare)
from heavytails.sandpile import (LatticeConfig, fss_fit, planted_fss_samples,
                                 run_avalanches)


def report(num, ok, detail):
    print(f"ACCEPTANCE {num:2d} {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def uniform_model(eta):
    return ThresholdModel(F=parse_distribution("uniform"),
                          G=parse_distribution("uniform"), eta=eta)


def loglog_slope(x, y):
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def binned_density(counts, n_total, lo, hi, n_bins=25):
    edges = np.unique(np.round(np.geomspace(lo, hi, n_bins)).astype(int))
    dens, ctr = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        c = counts[a:b].sum()
        if c > 0:
            dens.append(c / (b - a) / n_total)
            ctr.append(math.sqrt(a * (b - 1)))
    return np.array(ctr), np.array(dens)


def test_01_eta0_uniform_halving_law():
    pmf = simulate_episodes(uniform_model(0.0), 10_000_000, seed=1)
    worst = 0.0
    for T in range(16):
        target = 0.5 ** (T + 1)
        z = abs(pmf.values[T] - target) / max(pmf.stderr[T], 1e-12)
        worst = max(worst, z)
    report(1, worst < 4.0, f"max |z| over T<=15: {worst:.2f} (limit 4)")


def test_02_eta1_uniform_exact_and_simulated_slope():
    m = uniform_model(1.0)
    exact_ok = all(
        pmf_eta1(m, T, exact=True) == Fraction(1, (T + 1) * (T + 2))
        for T in range(65))
    pmf = simulate_episodes(m, 20_000_000, t_cap=4000, seed=2)
    ctr, dens = binned_density(pmf.counts, pmf.n_episodes, 20, 2000)
    slope = loglog_slope(ctr, dens)
    ok = exact_ok and abs(slope + 2.0) < 0.1
    report(2, ok, f"exact T<=64: {exact_ok}, simulated slope {slope:.3f} "
                  f"(want -2.0 +- 0.1)")


def test_03_intermediate_eta_cross_validation():
    msgs = []
    ok = True
    for eta in (0.5, 0.7, 0.9):
        m = uniform_model(eta)
        series = pmf_series(m, 64, exact=True)
        gf = pmf_uniform_gf(eta, 64, exact=True)
        gf_err = max(abs(float(series.values[T] - gf.values[T]))
                     for T in range(65))
        nested_err = max(abs(float(series.values[T]
                                   - pmf_uniform_nested(eta, T)))
                         for T in range(9))
        pmf = simulate_episodes(m, 1_000_000, seed=3)
        z = 0.0
        for T in range(33):
            p = float(series.values[T])
            se = math.sqrt(p * (1 - p) / pmf.n_episodes)
            z = max(z, abs(pmf.values[T] - p) / se)
        sandwich = all(
            pmf_bounds(m, T, exact=True)[0] <= series.values[T]
            <= pmf_bounds(m, T, exact=True)[1] for T in range(65))
        ok &= gf_err <= 1e-12 and nested_err <= 1e-12 and z < 4.0 and sandwich
        msgs.append(f"eta={eta}: gf_err={gf_err:.1e} nested={nested_err:.1e} "
                    f"max|z|={z:.2f} sandwich={sandwich}")
    report(3, ok, "; ".join(msgs))


def test_04_power_family_decay_exponent():
    T = np.unique(np.round(np.geomspace(100, 10000, 30)).astype(int))
    msgs, ok = [], True
    for beta in (0.0, 0.5, 1.0):
        v = np.array([pmf_eta1_beta(0.5, beta, int(t)) for t in T])
        s = loglog_slope(T, v)
        ok &= abs(s + (2 + beta)) < 0.15
        msgs.append(f"beta={beta}: {s:.3f}")
    slopes = [loglog_slope(T, np.array([pmf_eta1_beta(a, 0.5, int(t))
                                        for t in T])) for a in (0.3, 0.7)]
    spread = abs(slopes[0] - slopes[1])
    ok &= spread < 0.02
    report(4, ok, "; ".join(msgs) + f"; alpha spread {spread:.4f} (<0.02)")


def test_05_crossover_root_and_bound():
    s0, _, _ = crossover(0.5)
    resid = abs(-math.log(1 - 0.5 * s0) - s0)
    ok = resid <= 1e-12
    for eta in list(np.arange(0.1, 0.99, 0.05)) + [0.99]:
        s0e, _, _ = crossover(float(eta))
        ok &= eta < 1.0 / s0e + 1e-12
        ok &= 1.0 / s0e <= (1 + eta) / 2 + 1e-12
    report(5, ok, f"root residual {resid:.2e}; bound held on eta grid")


def test_06_multiplicative_recursion_second_moment():
    configs = [("point:x0=0.5", 0.25),
               ("twopoint:a=0,b=1,p=0.5", 0.5),
               ("point:x0=0.8944271909999159", 0.8)]
    f_law = parse_distribution("symunif:half=1")
    msgs, ok = [], True
    for b_spec, b2 in configs:
        b_law = parse_distribution(b_spec)
        target = f_law.second_moment() / (1.0 - b_law.second_moment())
        vals = []
        for seed in range(10):
            run = simulate_langevin(LangevinParams(b_law=b_law, f_law=f_law),
                                    1_000_000, seed=seed)
            vals.append(run.trace[-1][1])
        rel = abs(np.mean(vals) - target) / target
        ok &= rel < 0.05
        msgs.append(f"b2={b2}: rel err {rel:.3f}")
    report(6, ok, "; ".join(msgs))


def test_07_graph_degree_laws():
    from heavytails.graphgen import (CameoConfig, DmaConfig,
                                     generate_cameo_graph, generate_dma_graph,
                                     mean_indegree_by_group)
    from heavytails.tails import EmpiricalDistribution, fit_tail_loglog
    msgs, ok = [], True
    for alpha, gamma in ((0.5, 3.0), (1.0, 3.5)):
        g = generate_dma_graph(DmaConfig(n=100_000, gamma=gamma, alpha=alpha),
                               seed=7)
        grp, din = mean_indegree_by_group(g)
        m = (grp >= 2) & (din > 0)
        slope = float(np.polyfit(np.log(grp[m]), np.log(din[m]), 1)[0])
        ok &= abs(slope - alpha) < 0.1
        msgs.append(f"dma alpha={alpha}: slope {slope:.3f}")
    c = generate_cameo_graph(CameoConfig(n=100_000, alpha=0.5), seed=7)
    din = c.d_in[c.d_in > 0].astype(float)
    emp = EmpiricalDistribution(din)
    fit = fit_tail_loglog(emp, 10.0, emp.quantile(0.9999))
    ok &= abs(-fit.exponent - 2.0) < 0.2
    msgs.append(f"cameo ccdf exponent {-fit.exponent:.3f} (want 2.0 +- 0.2)")
    report(7, ok, "; ".join(msgs))


def test_08_queue_profiles_and_lateness():
    msgs, ok = [], True
    res = run_des(QueueConfig(arrival=parse_distribution("exp:rate=0.5"),
                              service=parse_distribution("exp:rate=1"),
                              deadline=parse_distribution("exp:rate=1"),
                              policy="fcfs"),
                  horizon=50_000.0, seed=8, keep_tasks=False)
    lit = res.metrics["little_residual"]
    ok &= lit < 0.03
    msgs.append(f"little residual {lit:.4f}")
    for dl, tag in (("exp:rate=0.5", "exp"), ("point:x0=0", "zero")):
        cfg = QueueConfig(arrival=parse_distribution("exp:rate=0.95"),
                          service=parse_distribution("exp:rate=1"),
                          deadline=parse_distribution(dl), policy="edf")
        r = run_des(cfg, horizon=200_000.0, seed=8, keep_tasks=False,
                    snapshot_rate=0.5, q_window=(15, 25))
        ks, n = snapshot_compare(r.snapshots, cfg.deadline, cfg.lam,
                                 (15, 25), "edf")
        ok &= ks <= 0.10 and n >= 500
        msgs.append(f"edf ks({tag}) {ks:.3f} on {n} obs")
    wins = 0
    for seed in range(20):
        late = {}
        for pol in ("edf", "fcfs"):
            cfg = QueueConfig(arrival=parse_distribution("exp:rate=0.7"),
                              service=parse_distribution("exp:rate=1"),
                              deadline=parse_distribution("exp:rate=0.2"),
                              policy=pol)
            r = run_des(cfg, horizon=20_000.0, seed=seed, keep_tasks=False)
            late[pol] = r.metrics["late_fraction"]
        wins += late["edf"] <= late["fcfs"]
    ok &= wins == 20
    msgs.append(f"edf<=fcfs lateness {wins}/20")
    report(8, ok, "; ".join(msgs))


def test_09_heavy_deadline_profiles():
    G = Pareto(B=1.0, omega=3.5)
    lam = 2.0
    _, q_star, _ = frontier(G, lam, 0.1)
    exact = lam * 1.0 / (3.5 - 2.0)
    ok = abs(q_star - exact) <= 1e-12 * exact
    prof = analytic_ltp_edf(G, lam, 0.5)
    x = np.geomspace(5.0, 5000.0, 60)
    slope = loglog_slope(x, 1.0 - prof(x))
    ok &= abs(slope + 1.5) < 0.05
    cfg = QueueConfig(arrival=parse_distribution("exp:rate=1.9"),
                      service=parse_distribution("exp:rate=2"),
                      deadline=parse_distribution("pareto:B=1,omega=3.5"),
                      policy="edf")
    res = run_des(cfg, horizon=100_000.0, seed=9, keep_tasks=False,
                  snapshot_rate=0.5, q_window=(15, 30))
    pooled = np.sort(np.concatenate(
        [l for (_t, q, l) in res.snapshots if 15 <= q <= 30]))
    xs = np.geomspace(2.0, np.quantile(pooled[pooled > 0], 0.9995), 25)
    ccdf = 1.0 - np.searchsorted(pooled, xs, side="right") / pooled.size
    m = ccdf > 0
    sim_slope = loglog_slope(xs[m], ccdf[m])
    ok &= abs(sim_slope + 1.5) < 0.3
    report(9, ok, f"Q* {q_star:.12f} (exact {exact:.12f}); analytic slope "
                  f"{slope:.4f}; simulated slope {sim_slope:.3f}")


def test_10_aging_profiles():
    from heavytails.cli import parse_rate
    from heavytails.queueing import AgingConfig
    power = AgingConfig(p=parse_rate("prop:c=1"), mu=parse_rate("const:c=2.5"),
                        inflow=parse_rate("const:c=1"), cutoff=1.0,
                        a_max=100.0, da=0.005)
    st = aging_stationary(power)
    k_ok = st["kind"] == "power" and abs(st["k"] - 2.5) < 0.1
    flat = AgingConfig(p=parse_rate("const:c=1"), mu=parse_rate("const:c=1"),
                       inflow=parse_rate("const:c=1"), cutoff=1.0,
                       a_max=15.0, da=0.02)
    st2 = aging_stationary(flat)
    a, M = aging_evolve(flat, dt=0.01, t_end=40.0)
    l1 = float(np.trapezoid(np.abs(M - st2["M"]), a)
               / np.trapezoid(st2["M"], a))
    bal = st2["balance_residual"]
    ok = k_ok and l1 < 0.02 and bal < 0.005
    report(10, ok, f"tail k {st['k']:.3f} (want 2.5 +- 0.1); "
                   f"evolution L1 {l1:.4f} (<0.02); balance {bal:.2e} (<0.005)")


def test_11_service_policy_tails():
    x = np.geomspace(10.0, 1e5, 40)
    slope = loglog_slope(x, boxma_tail(x, 0.8, 1.5))
    ok = abs(slope + 0.5) < 0.01
    waits = {}
    for pol in ("fcfs", "ros"):
        cfg = QueueConfig(arrival=parse_distribution("exp:rate=0.5"),
                          service=parse_distribution("exp:rate=1"),
                          deadline=parse_distribution("exp:rate=1"),
                          policy=pol)
        res = run_des(cfg, horizon=None, max_departures=1_000_000, seed=11)
        waits[pol] = np.array([t.wait for t in res.tasks])
    pos = waits["fcfs"][waits["fcfs"] > 1e-9]
    rate = 1.0 / float(pos.mean())
    rate_ok = abs(rate - 0.5) / 0.5 < 0.10
    q_ros = float(np.quantile(waits["ros"], 0.999))
    q_fcfs = float(np.quantile(waits["fcfs"], 0.999))
    heavier = q_ros > q_fcfs
    ok &= rate_ok and heavier
    report(11, ok, f"analytic slope {slope:.4f} (want -0.5 +- 0.01); "
                   f"fcfs wait rate {rate:.4f} (want 0.5 +- 10%); "
                   f"ros q999 {q_ros:.1f} > fcfs q999 {q_fcfs:.1f}")


def test_12_sandpile_statistics():
    recs, dists, pile = run_avalanches(
        LatticeConfig(L=64, model="btw", exact=True), 1_000_000, seed=3)
    audit = pile.energy_residual()
    s = dists["s"].samples
    lo, hi = 8.0, 8.0 * 10 ** 1.7
    edges = np.geomspace(lo, hi, 21)
    counts, e = np.histogram(s, bins=edges)
    ctr = np.sqrt(e[1:] * e[:-1])
    m = counts > 0
    x, y = np.log(ctr[m]), np.log(counts[m] / np.diff(e)[m] / s.size)
    A = np.vstack([x, np.ones_like(x)]).T
    coef, resid, *_ = np.linalg.lstsq(A, y, rcond=None)
    r2 = float(1.0 - resid[0] / np.sum((y - y.mean()) ** 2))
    decades = math.log10(hi / lo)
    msgs, ok = [], audit == 0 and r2 > 0.98 and decades >= 1.5
    msgs.append(f"audit residual {audit}; R2 {r2:.4f} over "
                f"{decades:.2f} decades")
    for tau, sigma, seed in ((1.3, 2.7, 11), (1.5, 2.0, 12)):
        samples = {L: planted_fss_samples(L, 300_000, tau=tau, sigma=sigma,
                                          seed=seed)
                   for L in (16, 32, 64, 128)}
        fit = fss_fit(samples)
        ok &= abs(fit.tau - tau) < 0.05 and abs(fit.sigma - sigma) < 0.05
        msgs.append(f"planted ({tau},{sigma}) -> "
                    f"({fit.tau:.3f},{fit.sigma:.3f})")
    report(12, ok, "; ".join(msgs))


def test_13_byte_identical_reruns(tmp_path):
    import hashlib

    from heavytails.cli import main
    jobs = [
        ["intermittency", "--eta", "0.6", "--episodes", "20000",
         "--tmax", "8", "--seed", "5"],
        ["sandpile", "--model", "btw", "--L", "16", "--n", "2000",
         "--exact", "--seed", "5"],
        ["queue", "--arrival", "exp:rate=0.5", "--service", "exp:rate=1",
         "--deadline", "exp:rate=1", "--policy", "edf", "--horizon", "500",
         "--seed", "5"],
    ]
    ok, checked = True, 0
    for i, args in enumerate(jobs):
        digests = []
        for sub in ("a", "b"):
            out = str(tmp_path / f"{i}{sub}")
            assert main(args + ["--out", out]) == 0
            with open(os.path.join(out, "run_manifest.json")) as fh:
                man = json.load(fh)
            blob = {}
            for name in man["outputs"]:
                with open(os.path.join(out, name), "rb") as fh:
                    blob[name] = hashlib.sha256(fh.read()).hexdigest()
                assert blob[name] == man["outputs"][name]
            digests.append(blob)
            checked += len(blob)
        ok &= digests[0] == digests[1]
    report(13, ok, f"{checked} output files checksum-stable across re-runs")
