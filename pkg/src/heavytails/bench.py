"""Timing comparison of the compiled kernels against the numpy fallback."""

import time
from contextlib import contextmanager

from . import backend, kernels, rng as rngmod
from .distributions import Uniform
from .intermittency import ThresholdModel, simulate_episodes
from .sandpile import LatticeConfig, run_avalanches

__all__ = ["run_benchmarks"]


@contextmanager
def _forced(use_numba):
    old = backend.USE_NUMBA
    backend.USE_NUMBA = use_numba and kernels.HAVE_NUMBA
    try:
        yield
    finally:
        backend.USE_NUMBA = old


def _timed(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run_benchmarks(seed=0, scale=1.0):
    """Return {kernel: {"numba": seconds, "numpy": seconds, "speedup": x}}."""
    n_lang = int(1_000_000 * scale)
    n_epis = int(200_000 * scale)
    n_aval = int(20_000 * scale)

    rng = rngmod.stream(seed, 0)
    b = rng.random(n_lang)
    f = rng.random(n_lang) - 0.5
    model = ThresholdModel(F=Uniform(), G=Uniform(), eta=0.7)
    cfg = LatticeConfig(L=32, model="btw")

    cases = {
        "recursion": lambda: kernels.langevin_path(b, f, 0.0),
        "episodes": lambda: simulate_episodes(model, n_epis, t_cap=10_000,
                                              seed=seed),
        "sandpile": lambda: run_avalanches(cfg, n_aval, seed=seed),
    }
    results = {}
    for name, fn in cases.items():
        row = {}
        for label, flag in (("numba", True), ("numpy", False)):
            with _forced(flag):
                if flag and kernels.HAVE_NUMBA:
                    fn()  # warm-up compile outside the timed region
                row[label] = _timed(fn)
        row["speedup"] = row["numpy"] / row["numba"] if row["numba"] > 0 else 0.0
        results[name] = row
    return results
