"""Single-server discrete-event queue with deadline-aware scheduling.

Tasks arrive by a renewal process; each carries a service requirement
and a relative deadline drawn at arrival.  Policies:

* ``edf``   — earliest absolute deadline first, preemptive.  Because
  every lead time shrinks at unit rate, the EDF order is the static
  order of absolute deadlines; an arrival with a strictly smaller
  absolute deadline preempts the task in service, and preempted work
  is resumed later without loss (preempt-resume).
* ``fcfs``  — arrival order, non-preemptive.
* ``ros``   — uniformly random pick at each service completion.

Snapshots are taken at Poisson-spaced inspection times (never at event
instants, which would length-bias the sample) and record the lead
times (absolute deadline minus now) of every task present.

Per-task draws (service, deadline) happen in arrival order from
dedicated streams, so runs with different policies but the same seed
see identical task sequences (common random numbers).
"""

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .. import rng as rngmod
from ..distributions import Distribution
from ..errors import ParameterError

__all__ = ["QueueConfig", "TaskRecord", "DesResult", "run_des"]


@dataclass
class QueueConfig:
    arrival: Distribution      # interarrival-time law
    service: Distribution      # service-time law
    deadline: Distribution     # relative-deadline law G
    policy: str = "fcfs"       # edf | fcfs | ros

    def __post_init__(self):
        if self.policy not in ("edf", "fcfs", "ros"):
            raise ParameterError(f"unknown policy {self.policy!r}")
        for name in ("arrival", "service"):
            law = getattr(self, name)
            if law.support[0] < 0:
                raise ParameterError(f"{name} law must be nonnegative")

    @property
    def lam(self):
        return 1.0 / self.arrival.mean()

    @property
    def mu(self):
        return 1.0 / self.service.mean()

    @property
    def rho(self):
        return self.lam / self.mu


@dataclass
class TaskRecord:
    seq: int
    arrival: float
    service: float
    deadline_rel: float
    deadline_abs: float
    first_start: float = math.nan
    finish: float = math.nan

    @property
    def wait(self):
        """Time spent not being served (queue wait under any policy)."""
        return self.finish - self.arrival - self.service

    @property
    def sojourn(self):
        return self.finish - self.arrival

    @property
    def late(self):
        return self.finish > self.deadline_abs


@dataclass
class DesResult:
    tasks: list
    snapshots: list            # (time, Q, lead-time array)
    metrics: dict
    flags: dict = field(default_factory=dict)


class _Chunked:
    """Draws scalars from a Generator in vectorized chunks."""

    def __init__(self, rng, law, chunk=8192):
        self.rng = rng
        self.law = law
        self.chunk = chunk
        self.buf = np.empty(0)
        self.i = 0

    def draw(self):
        if self.i >= self.buf.size:
            self.buf = np.asarray(self.law.sample(self.rng, self.chunk), dtype=float)
            self.i = 0
        v = self.buf[self.i]
        self.i += 1
        return float(v)


def run_des(config, horizon=None, seed=0, max_departures=None,
            snapshot_rate=0.0, q_window=None, keep_tasks=True,
            check_edf=False):
    """Simulate until `horizon` sim-time or `max_departures` completions.

    Returns a DesResult with per-task records, lead-time snapshots
    (filtered by `q_window` on the number-in-system when given), and
    aggregate metrics including a work-conservation audit.
    """
    if horizon is None and max_departures is None:
        raise ParameterError("need a horizon or a departure cap")
    if horizon is None:
        horizon = math.inf
    arr = _Chunked(rngmod.stream(seed, 0), config.arrival)
    svc = _Chunked(rngmod.stream(seed, 1), config.service)
    dln = _Chunked(rngmod.stream(seed, 2), config.deadline)
    ros_rng = rngmod.stream(seed, 3)
    snap_rng = rngmod.stream(seed, 4)

    policy = config.policy
    tasks = []
    waiting = []               # heap for edf/fcfs, plain list for ros
    current = None             # (task, remaining, last_start)
    t = 0.0
    next_arrival = arr.draw()
    next_snapshot = math.inf
    if snapshot_rate > 0.0:
        next_snapshot = snap_rng.exponential(1.0 / snapshot_rate)
    snapshots = []
    seq = 0
    departures = 0
    busy_time = 0.0
    served_work = 0.0
    area_n = 0.0               # integral of number-in-system
    area_q = 0.0               # integral of number waiting
    late = 0
    wait_sum = 0.0
    sojourn_sum = 0.0
    in_system = []             # tasks currently present (for snapshots)

    def n_in_system():
        return len(waiting) + (1 if current is not None else 0)

    def start_service(task, remaining, now):
        nonlocal current
        if check_edf and policy == "edf" and waiting:
            if (task.deadline_abs, task.seq) > min(w[:2] for w in waiting):
                raise AssertionError("EDF invariant violated at service start")
        if math.isnan(task.first_start):
            task.first_start = now
        current = (task, remaining, now)

    def pick_next(now):
        nonlocal current
        if not waiting:
            current = None
            return
        if policy == "ros":
            k = int(ros_rng.integers(0, len(waiting)))
            waiting[k], waiting[-1] = waiting[-1], waiting[k]
            _, _, task, remaining = waiting.pop()
        else:
            _, _, task, remaining = heapq.heappop(waiting)
        start_service(task, remaining, now)

    while True:
        completion = (current[2] + current[1]) if current is not None else math.inf
        t_next = min(next_arrival, completion, next_snapshot)
        if t_next > horizon or (max_departures is not None
                                and departures >= max_departures):
            break
        dt = t_next - t
        area_n += dt * n_in_system()
        area_q += dt * len(waiting)
        if current is not None:
            busy_time += dt
        t = t_next

        if t == completion and current is not None:
            task, remaining, last_start = current
            task.finish = t
            served_work += task.service
            departures += 1
            late += task.late
            wait_sum += task.wait
            sojourn_sum += task.sojourn
            in_system.remove(task)
            if keep_tasks:
                tasks.append(task)
            pick_next(t)
        elif t == next_arrival:
            d_rel = dln.draw()
            task = TaskRecord(seq=seq, arrival=t, service=svc.draw(),
                              deadline_rel=d_rel, deadline_abs=t + d_rel)
            seq += 1
            in_system.append(task)
            next_arrival = t + arr.draw()
            if current is None:
                start_service(task, task.service, t)
            elif policy == "edf" and task.deadline_abs < current[0].deadline_abs:
                cur_task, remaining, last_start = current
                left = remaining - (t - last_start)
                heapq.heappush(waiting, (cur_task.deadline_abs, cur_task.seq,
                                         cur_task, left))
                start_service(task, task.service, t)
            else:
                if policy == "edf":
                    key = (task.deadline_abs, task.seq)
                elif policy == "fcfs":
                    key = (task.seq, 0)
                else:
                    key = (task.seq, 0)
                if policy == "ros":
                    waiting.append((key[0], key[1], task, task.service))
                else:
                    heapq.heappush(waiting, (key[0], key[1], task,
                                             task.service))
        else:
            # snapshot instant
            q = n_in_system()
            if q_window is None or (q_window[0] <= q <= q_window[1]):
                leads = np.array([tk.deadline_abs - t for tk in in_system])
                snapshots.append((t, q, np.sort(leads)))
            next_snapshot = t + snap_rng.exponential(1.0 / snapshot_rate)

    horizon_t = t
    # work-conservation audit: busy time must equal completed work plus
    # the partial work of preempted/in-service tasks
    partial = sum(tk.service - rem for _, _, tk, rem in waiting)
    if current is not None:
        task, remaining, last_start = current
        partial += (task.service - remaining) + (t - last_start)
    work_residual = busy_time - served_work - partial
    n_done = max(departures, 1)
    metrics = {
        "departures": departures,
        "sim_time": horizon_t,
        "mean_wait": wait_sum / n_done,
        "mean_sojourn": sojourn_sum / n_done,
        "mean_n_system": area_n / horizon_t if horizon_t > 0 else 0.0,
        "mean_n_waiting": area_q / horizon_t if horizon_t > 0 else 0.0,
        "late_fraction": late / n_done,
        "late_count": late,
        "busy_time": busy_time,
        "served_work": served_work,
        "work_residual": work_residual,
        "throughput": departures / horizon_t if horizon_t > 0 else 0.0,
    }
    lam_hat = seq / horizon_t if horizon_t > 0 else 0.0
    metrics["little_residual"] = (
        abs(metrics["mean_n_system"] - lam_hat * metrics["mean_sojourn"])
        / metrics["mean_n_system"] if metrics["mean_n_system"] > 0 else 0.0)
    flags = {"unstable": config.rho >= 1.0}
    return DesResult(tasks=tasks, snapshots=snapshots, metrics=metrics,
                     flags=flags)
