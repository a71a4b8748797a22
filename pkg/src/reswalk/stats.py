"""Statistical oracles: analytic distributions, TVD, chi-square, and an
exhaustive discretized-draw enumeration for tiny reservoir-sampling cases.

Everything here is deliberately independent of the sampler implementations
so it can serve as ground truth for them. Probability vectors follow one
convention: entry 0 is the "no selection" mass and entry i (1-based) the
mass of element i.
"""

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.stats import chi2 as _chi2

from .errors import ValidationError


@dataclass
class EmpiricalDist:
    """Observed selection counts (slot 0 = none) over a number of trials."""

    counts: np.ndarray
    trials: int

    @classmethod
    def from_selections(cls, selections, n):
        counts = np.bincount(np.asarray(selections, dtype=np.int64),
                             minlength=n + 1)
        return cls(counts=counts, trials=int(counts.sum()))

    def probs(self):
        if self.trials == 0:
            raise ValidationError("empirical distribution has no trials")
        return self.counts / self.trials


def analytic_dist(w):
    """p(i) = w(i)/sum(w); all-zero weights put the whole mass on slot 0."""
    arr = np.asarray(
        w.to_array() if hasattr(w, "to_array") else w, dtype=np.float64)
    out = np.zeros(len(arr) + 1)
    total = arr.sum()
    if total <= 0.0:
        out[0] = 1.0
    else:
        out[1:] = arr / total
    return out


def analytic_dist_exact(weights):
    """Fraction-valued version of analytic_dist for integer-weight corpora."""
    total = sum(weights)
    if total == 0:
        return [Fraction(1)] + [Fraction(0)] * len(weights)
    return [Fraction(0)] + [Fraction(int(v), int(total)) for v in weights]


def tvd(p, q):
    """Total variation distance, 0.5 * sum |p_i - q_i|."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ValidationError(f"length mismatch {p.shape} vs {q.shape}")
    for name, vec in (("p", p), ("q", q)):
        if abs(vec.sum() - 1.0) > 1e-9:
            raise ValidationError(f"{name} sums to {vec.sum()}, not 1")
    return 0.5 * float(np.abs(p - q).sum())


def tvd_threshold(n_outcomes, trials):
    """Generic sampling-noise bound, capped at 0.01 for 1e6-trial runs."""
    bound = 3.0 * np.sqrt(n_outcomes / trials)
    if trials >= 10**6:
        return min(bound, 0.01)
    return bound


def chi_square(expected, observed):
    """Pearson statistic over bins with expected count >= 5.

    Bins below the threshold are pooled; if the pool itself stays below 5
    it is folded into the largest bin. A zero-expected bin with observed
    mass is an impossible outcome and returns (inf, dof).
    """
    expected = np.asarray(expected, dtype=np.float64)
    if observed.trials == 0:
        raise ValidationError("chi-square needs at least one trial")
    counts = np.asarray(observed.counts, dtype=np.float64)
    if expected.shape != counts.shape:
        raise ValidationError("expected/observed length mismatch")
    exp_counts = expected * observed.trials

    impossible = (exp_counts == 0) & (counts > 0)
    keep = exp_counts > 0
    exp_kept, obs_kept = exp_counts[keep], counts[keep]

    big = exp_kept >= 5.0
    exp_bins = list(exp_kept[big])
    obs_bins = list(obs_kept[big])
    pool_e, pool_o = exp_kept[~big].sum(), obs_kept[~big].sum()
    if pool_e > 0:
        if pool_e >= 5.0 or not exp_bins:
            exp_bins.append(pool_e)
            obs_bins.append(pool_o)
        else:
            j = int(np.argmax(exp_bins))
            exp_bins[j] += pool_e
            obs_bins[j] += pool_o
    exp_bins = np.asarray(exp_bins)
    obs_bins = np.asarray(obs_bins)
    dof = max(len(exp_bins) - 1, 1)
    if impossible.any():
        return float("inf"), dof
    stat = float(((obs_bins - exp_bins) ** 2 / exp_bins).sum())
    return stat, dof


def chi_square_threshold(dof, percentile=0.999):
    return float(_chi2.ppf(percentile, dof))


def passes_chi_square(run_cell, expected, seed, retries=3, percentile=0.999):
    """Run a trial cell, retrying with fresh seeds before declaring failure.

    ``run_cell(seed)`` must return an EmpiricalDist. The 99.9th-percentile
    gate has a ~0.1% false-alarm rate per attempt; allowing ``retries``
    extra seeds keeps honest samplers effectively flake-free while a wrong
    distribution still fails every attempt.
    """
    last = None
    for attempt in range(retries + 1):
        observed = run_cell(seed + attempt)
        stat, dof = chi_square(expected, observed)
        last = (stat, dof)
        if stat <= chi_square_threshold(dof, percentile):
            return True, last
    return False, last


def node2vec_bruteforce(g, v_prev, v_cur, a, b, weighted=True):
    """Second-order transition distribution by literal definition.

    For each neighbor u of v_cur the base factor is 1/a if u is the
    previous vertex, 1 if u is in N(v_prev) (checked by a plain membership
    scan, no binary search), else 1/b; optionally scaled by the edge
    weight. Serves as the independent oracle for the optimized transition
    kernel.
    """
    lo, hi = int(g.offsets[v_cur]), int(g.offsets[v_cur + 1])
    prev_neighbors = g.targets[int(g.offsets[v_prev]):int(g.offsets[v_prev + 1])]
    prev_set = {int(x) for x in prev_neighbors}
    weights = []
    for e in range(lo, hi):
        u = int(g.targets[e])
        if u == v_prev:
            base = 1.0 / a
        elif u in prev_set:
            base = 1.0
        else:
            base = 1.0 / b
        weights.append(base * float(g.weights[e]) if weighted else base)
    return analytic_dist(np.asarray(weights))


def rs_exhaustive_oracle(weights, resolution_bits):
    """Exact selection masses of one-pass reservoir sampling under a
    discretized draw alphabet.

    Every draw is forced onto the grid (t + 0.5) / 2^bits; enumerating all
    (2^bits)^n equally likely draw strings and replaying the reservoir
    recurrence gives the exact distribution under that measure, which
    converges to w(i)/sum(w) as the resolution grows. Bounded to n <= 4
    and 4 bits so enumeration stays tiny.
    """
    weights = [float(v) for v in weights]
    n = len(weights)
    if n > 4:
        raise ValidationError("exhaustive oracle is bounded to n <= 4")
    if resolution_bits > 4 or resolution_bits < 1:
        raise ValidationError("resolution_bits must be in [1, 4]")
    levels = 1 << resolution_bits
    grid = [(t + 0.5) / levels for t in range(levels)]
    mass = np.zeros(n + 1)
    share = 1.0 / levels**n
    for draws in itertools.product(grid, repeat=n):
        prefix = 0.0
        selected = 0
        for i in range(n):
            prefix += weights[i]
            if weights[i] > 0.0 and draws[i] * prefix < weights[i]:
                selected = i + 1
        mass[selected] += share
    return mass


def discretized_draw_strings(n, resolution_bits):
    """All draw strings the exhaustive oracle enumerates, for replaying the
    production sampler against it."""
    levels = 1 << resolution_bits
    grid = [(t + 0.5) / levels for t in range(levels)]
    return itertools.product(grid, repeat=n)
