"""Sampler microbenchmarks: a fixed element budget per grid cell.

A cell is (sampler, k, sampling_size); the harness generates one weight
vector of that size, runs budget/size trials, and reports wall time plus
the instrumented collective count per task. ``repeats`` runs take the
minimum time, the usual defence against timer noise.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .trials import run_trials

CSV_HEADER = "sampler,k,n,trials,elapsed_ns,collectives"


@dataclass
class BenchRow:
    sampler: str
    k: int
    n: int
    trials: int
    elapsed_ns: int
    collectives: float

    @property
    def ns_per_element(self):
        return self.elapsed_ns / max(self.trials * self.n, 1)

    def csv(self):
        return (f"{self.sampler},{self.k},{self.n},{self.trials},"
                f"{self.elapsed_ns},{self.collectives:g}")


def make_weights(n, kind="uniform", sigma=1.0, seed=7):
    """Bench weight generators: flat [1,5) or log-normal skew."""
    rng = np.random.default_rng(seed)
    if kind == "uniform":
        return rng.uniform(1.0, 5.0, n)
    if kind == "lognormal":
        if sigma <= 0:
            raise ValidationError("sigma must be positive")
        return rng.lognormal(0.0, sigma, n)
    raise ValidationError(f"unknown weight kind {kind!r}")


def bench_cell(sampler, n, k=32, element_budget=1 << 22, weights=None,
               seed=7, repeats=3, max_rounds=1 << 30):
    """Time one grid cell; rejection sampling gets an effectively unbounded
    round budget so skewed cells measure the true retry cost."""
    if weights is None:
        weights = make_weights(n, seed=seed)
    trials = max(1, element_budget // max(n, 1))
    best = None
    for rep in range(repeats):
        res = run_trials(sampler, weights, trials, seed + rep, k=k,
                         max_rounds=max_rounds)
        if best is None or res.elapsed_ns < best.elapsed_ns:
            best = res
    return BenchRow(sampler=sampler, k=k, n=n, trials=trials,
                    elapsed_ns=best.elapsed_ns,
                    collectives=best.collectives_per_task)


def bench_grid(samplers, ks, sizes, element_budget=1 << 22, kind="uniform",
               sigma=1.0, seed=7, repeats=3):
    """Full grid; k only matters for the lane samplers but every requested
    (sampler, k) pair gets its own row to keep the CSV shape predictable."""
    rows = []
    for sampler in samplers:
        for k in ks:
            for n in sizes:
                weights = make_weights(n, kind=kind, sigma=sigma, seed=seed)
                rows.append(bench_cell(sampler, n, k=k,
                                       element_budget=element_budget,
                                       weights=weights, seed=seed,
                                       repeats=repeats))
    return rows
