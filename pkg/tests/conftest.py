import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from fraclab.analysis import msd
from fraclab.mcsolve import SolverConfig, solve
from fraclab.models import (
    MarketParams,
    make_market_problem,
    make_memoryless_problem,
)

_WORKERS = min(2, os.cpu_count() or 1)


def _market_job(args):
    lam, alpha, kbt, n_steps, t_end, tol, base, i = args
    params = MarketParams(lam=lam, beta=1.0, a=1.0, kbt=kbt, alpha=alpha)
    prob = make_market_problem(params, n_steps, t_end, seeds=(2 * (base + i), 2 * (base + i) + 1))
    rep = solve(prob, SolverConfig(tolerance=tol, max_steps=2_000_000_000, seed=17 + i))
    return i, rep.solution, rep.converged


def _memoryless_job(args):
    lam, alpha, kbt, n_steps, t_end, tol, base, i = args
    params = MarketParams(lam=lam, beta=1.0, a=1.0, kbt=kbt, alpha=alpha)
    prob = make_memoryless_problem(params, n_steps, t_end, seed=base + i)
    rep = solve(prob, SolverConfig(tolerance=tol, max_steps=2_000_000_000, seed=17 + i))
    return i, rep.solution, rep.converged


def _run_pool(job_fn, arg_list):
    out = [None] * len(arg_list)
    if _WORKERS <= 1:
        for a in arg_list:
            i, sol, conv = job_fn(a)
            out[i] = (sol, conv)
    else:
        with ProcessPoolExecutor(max_workers=_WORKERS) as pool:
            for i, sol, conv in pool.map(job_fn, arg_list):
                out[i] = (sol, conv)
    return out


class EnsembleCache:
    """Market/memoryless 20-path MSD ensembles, shared across acceptance tests."""

    N_PATHS = 20

    def __init__(self):
        self._curves = {}

    def market(self, lam, alpha, t_end, n_steps, tol, kbt=1.0):
        key = ("market", lam, alpha, kbt, t_end, n_steps, tol)
        if key not in self._curves:
            base = 10_000 + int(lam) + int(1000 * alpha) + int(t_end)
            args = [
                (lam, alpha, kbt, n_steps, t_end, tol, base, i)
                for i in range(self.N_PATHS)
            ]
            results = _run_pool(_market_job, args)
            assert all(conv for _, conv in results), f"non-converged path in {key}"
            self._curves[key] = msd([sol for sol, _ in results])
        return self._curves[key]

    def memoryless(self, lam, t_end, n_steps, tol, kbt=1.0):
        key = ("memoryless", lam, kbt, t_end, n_steps, tol)
        if key not in self._curves:
            base = 40_000 + int(lam) + int(t_end)
            args = [
                (lam, 0.5, kbt, n_steps, t_end, tol, base, i)
                for i in range(self.N_PATHS)
            ]
            results = _run_pool(_memoryless_job, args)
            assert all(conv for _, conv in results), f"non-converged path in {key}"
            self._curves[key] = msd([sol for sol, _ in results])
        return self._curves[key]


@pytest.fixture(scope="session")
def ensembles():
    return EnsembleCache()


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260810)
