import math

import numpy as np
import pytest

from heavytails.distributions import Pareto, parse_distribution
from heavytails.errors import NoFrontierError, ParameterError
from heavytails.queueing import (QueueConfig, aging_evolve, aging_stationary,
                                 analytic_ltp_edf, analytic_ltp_fcfs,
                                 boxma_h, boxma_tail, fcfs_mm1_tail, frontier,
                                 ros_mm1_tail, run_des, snapshot_compare)


def mm1(policy="fcfs", lam=0.5, mu=1.0, dl="exp:rate=1"):
    return QueueConfig(arrival=parse_distribution(f"exp:rate={lam}"),
                       service=parse_distribution(f"exp:rate={mu}"),
                       deadline=parse_distribution(dl), policy=policy)


def test_mm1_mean_wait():
    cfg = mm1()
    res = run_des(cfg, horizon=100000.0, seed=1, keep_tasks=False)
    rho = 0.5
    assert res.metrics["mean_wait"] == pytest.approx(
        rho / (1.0 * (1 - rho)), rel=0.05)


def test_littles_law_and_work_conservation():
    res = run_des(mm1(), horizon=50000.0, seed=2, keep_tasks=False)
    assert res.metrics["little_residual"] < 0.02
    assert abs(res.metrics["work_residual"]) < 1e-6


def test_edf_preemption_orders_by_deadline():
    cfg = mm1(policy="edf", lam=0.9, dl="exp:rate=0.5")
    res = run_des(cfg, horizon=5000.0, seed=3, check_edf=True)
    assert not res.flags.get("edf_violation", False)


def test_edf_beats_fcfs_on_late_fraction():
    late = {}
    for pol in ("edf", "fcfs"):
        cfg = mm1(policy=pol, lam=0.7, dl="exp:rate=0.2")
        res = run_des(cfg, horizon=20000.0, seed=4, keep_tasks=False)
        late[pol] = res.metrics["late_fraction"]
    assert late["edf"] <= late["fcfs"]


def test_frontier_exponential_deadlines():
    G = parse_distribution("exp:rate=1")
    fq, q_star, fhat = frontier(G, 1.0, 0.5)
    assert fhat == pytest.approx(math.log(2), abs=1e-10)
    assert q_star == pytest.approx(1.0)
    fq2, _, _ = frontier(G, 1.0, 2.0)
    assert fq2 == pytest.approx(-1.0)


def test_frontier_pareto_qstar():
    G = Pareto(B=1.0, omega=3.5)
    _, q_star, _ = frontier(G, 2.0, 0.1)
    assert q_star == pytest.approx(2.0 / 1.5, rel=1e-12)


def test_edf_profile_shape():
    G = parse_distribution("exp:rate=1")
    prof = analytic_ltp_edf(G, 1.0, 0.5)
    xs = np.linspace(-2, 12, 300)
    ys = prof(xs)
    assert np.all(np.diff(ys) >= -1e-12)
    assert ys[0] == 0.0
    assert ys[-1] == pytest.approx(1.0, abs=1e-2)
    fq, _, _ = frontier(G, 1.0, 0.5)
    assert prof(fq - 1e-9) == 0.0


def test_fcfs_profile_known_point():
    G = parse_distribution("exp:rate=1")
    prof = analytic_ltp_fcfs(G, 1.0, 1.0)
    # 1 - (H(0) - H(1)) = 1 - (1 - 1/e)
    assert prof(0.0) == pytest.approx(math.exp(-1.0))


def test_snapshot_compare_moderate_load():
    cfg = mm1(policy="edf", lam=0.95, dl="exp:rate=0.5")
    res = run_des(cfg, horizon=100000.0, seed=5, keep_tasks=False,
                  snapshot_rate=0.5, q_window=(15, 25))
    ks, n = snapshot_compare(res.snapshots, cfg.deadline, cfg.lam,
                             (15, 25), "edf")
    assert n >= 500
    assert ks < 0.15


def test_boxma_requires_positive_shape():
    with pytest.raises(ParameterError):
        boxma_h(0.9, -1.5)


def test_boxma_tail_slope():
    x = np.geomspace(10, 1e5, 40)
    y = boxma_tail(x, 0.8, 1.5)
    slope = np.polyfit(np.log(x), np.log(y), 1)[0]
    assert slope == pytest.approx(-0.5, abs=1e-6)


def test_fcfs_tail_rate():
    assert fcfs_mm1_tail(2.0, 0.5, 1.0) / fcfs_mm1_tail(1.0, 0.5, 1.0) == \
        pytest.approx(math.exp(-0.5))


def test_ros_tail_is_heavier_than_fcfs():
    x = np.linspace(25.0, 80.0, 30)
    ratio = ros_mm1_tail(x, 0.5) / fcfs_mm1_tail(x, 0.5, 1.0)
    assert np.all(np.diff(ratio) > 0)


def test_des_reproducible():
    a = run_des(mm1(), horizon=2000.0, seed=6)
    b = run_des(mm1(), horizon=2000.0, seed=6)
    assert len(a.tasks) == len(b.tasks)
    assert a.metrics["mean_wait"] == b.metrics["mean_wait"]
