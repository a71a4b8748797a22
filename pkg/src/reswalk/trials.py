"""Batched sampling trials for distribution verification and benchmarks.

``run_trials`` executes one (sampler, weights, k) cell for a number of
independent trials — trial t draws from streams ``(t << 10) | lane`` — and
returns the picks plus instrumentation. ``verify_cell`` wraps that in the
TVD + chi-square acceptance decision.
"""

import time
from dataclasses import dataclass, asdict

import numpy as np

from . import _kernels as K
from . import stats as S
from .errors import ValidationError
from .samplers import WeightOracle, alias_build

SAMPLERS = ("seq", "dprs", "zprs", "its", "alias", "rjs")
LANE_SAMPLERS = ("dprs", "zprs")  # the only ones whose behavior depends on k


@dataclass
class TrialResult:
    sampler: str
    k: int
    n: int
    trials: int
    picks: np.ndarray
    elapsed_ns: int
    collectives_per_task: float
    collectives: np.ndarray | None = None
    rounds: np.ndarray | None = None

    def empirical(self):
        return S.EmpiricalDist.from_selections(self.picks, self.n)


def _check_weights(w):
    w = np.ascontiguousarray(w, dtype=np.float64)
    if np.any(np.isnan(w)) or np.any(w < 0):
        raise ValidationError("weights must be non-negative and not NaN")
    return w


def run_trials(sampler, weights, trials, seed, k=32, max_rounds=10_000):
    """Run one cell; the timer covers only the sampling loop itself."""
    w = _check_weights(weights)
    n = len(w)
    key = np.uint64(seed)
    collectives = None
    rounds = None
    if sampler == "seq":
        t0 = time.perf_counter_ns()
        picks = K.seq_rs_trials(w, key, trials)
        elapsed = time.perf_counter_ns() - t0
    elif sampler == "dprs":
        t0 = time.perf_counter_ns()
        picks, collectives = K.dprs_trials(w, k, key, trials)
        elapsed = time.perf_counter_ns() - t0
    elif sampler == "zprs":
        t0 = time.perf_counter_ns()
        picks, collectives = K.zprs_trials(w, k, key, trials)
        elapsed = time.perf_counter_ns() - t0
    elif sampler == "its":
        t0 = time.perf_counter_ns()
        picks = K.its_trials(w, key, trials)
        elapsed = time.perf_counter_ns() - t0
    elif sampler == "alias":
        table = alias_build(WeightOracle.from_array(w))
        t0 = time.perf_counter_ns()
        picks = K.alias_trials(table.prob, table.alias, key, trials)
        elapsed = time.perf_counter_ns() - t0
    elif sampler == "rjs":
        w_max = float(w.max()) if n else 0.0
        t0 = time.perf_counter_ns()
        picks, rounds = K.rjs_trials(w, w_max, key, trials, max_rounds)
        elapsed = time.perf_counter_ns() - t0
    elif sampler == "uniform-control":
        t0 = time.perf_counter_ns()
        picks = K.uniform_control_trials(n, key, trials)
        elapsed = time.perf_counter_ns() - t0
    else:
        raise ValidationError(f"unknown sampler {sampler!r}")
    per_task = float(collectives.mean()) if collectives is not None else 0.0
    return TrialResult(sampler=sampler, k=k, n=n, trials=trials, picks=picks,
                       elapsed_ns=int(elapsed), collectives_per_task=per_task,
                       collectives=collectives, rounds=rounds)


@dataclass
class CellReport:
    sampler: str
    k: int
    n: int
    trials: int
    tvd: float
    tvd_threshold: float
    chi2: float
    dof: int
    chi2_threshold: float
    passed: bool

    def to_dict(self):
        return asdict(self)


def verify_cell(sampler, weights, trials, seed, k=32, retries=3,
                max_rounds=10_000):
    """TVD + chi-square gate for one cell against p(i) = w(i)/sum(w).

    Rejection-sampling picks are conditioned on acceptance, so exhausted
    trials (pick 0 with the round budget spent) are excluded from the
    distribution rather than counted as "none".
    """
    w = _check_weights(weights)
    expected = S.analytic_dist(w)
    n = len(w)

    def cell(cell_seed):
        res = run_trials(sampler, w, trials, cell_seed, k=k,
                         max_rounds=max_rounds)
        picks = res.picks
        if sampler == "rjs" and res.rounds is not None:
            picks = picks[(picks > 0) | (res.rounds < max_rounds)]
        return S.EmpiricalDist.from_selections(picks, n)

    observed = cell(seed)
    tvd_value = S.tvd(expected, observed.probs())
    tvd_limit = S.tvd_threshold(n + 1, observed.trials)
    chi_ok, (chi_stat, dof) = S.passes_chi_square(cell, expected, seed,
                                                  retries=retries)
    passed = bool(tvd_value <= tvd_limit and chi_ok)
    return CellReport(sampler=sampler, k=k, n=n, trials=trials,
                      tvd=float(tvd_value), tvd_threshold=float(tvd_limit),
                      chi2=float(chi_stat), dof=int(dof),
                      chi2_threshold=S.chi_square_threshold(dof),
                      passed=passed)


def weight_corpus(count=50, max_n=64, seed=12345):
    """Randomized weight vectors covering the shapes that break samplers:
    real and integer weights, interior zeros, and single-positive spikes."""
    rng = np.random.default_rng(seed)
    corpus = []
    for i in range(count):
        n = int(rng.integers(1, max_n + 1))
        kind = i % 5
        if kind == 0:
            w = rng.uniform(0.1, 10.0, n)
        elif kind == 1:
            w = rng.integers(1, 20, n).astype(np.float64)
        elif kind == 2:
            w = rng.uniform(0.0, 5.0, n)
            w[rng.random(n) < 0.3] = 0.0
            if w.sum() == 0:
                w[int(rng.integers(0, n))] = 1.0
        elif kind == 3:
            w = np.zeros(n)
            w[int(rng.integers(0, n))] = float(rng.uniform(1.0, 9.0))
        else:
            w = rng.lognormal(0.0, 2.0, n)
        corpus.append(w)
    return corpus
