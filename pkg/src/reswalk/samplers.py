"""Weighted single-element sampling over an indexed weight oracle.

Six interchangeable methods, all drawing index i with probability
w(i)/sum(w):

* ``sequential_rs`` - one-pass weighted reservoir selection, O(1) state.
* ``dprs``          - reservoir selection parallelized over a lane group,
                      scanning in sequence order k elements per chunk with
                      one prefix-sum and one max-reduction per chunk.
* ``zprs``          - reservoir selection in lane-strided ("zig-zag") order:
                      two scans of the weights but exactly two collective
                      operations total, independent of length.
* ``its``           - inverse transform over an O(n) prefix buffer.
* ``alias_build`` / ``alias_sample`` - two-array alias tables.
* ``rjs``           - bounded rejection sampling against a weight cap.

Selections are 1-based; ``Selection(0)`` means no element was selected
(zero total weight or an empty sequence). Acceptance tests are written in
product form (``r * denom < w`` rather than ``r < w / denom``): the same
event up to one ulp, one division cheaper, and used identically by the
compiled kernels so replay tests can demand bit equality.
"""

import math
from typing import NamedTuple

import numpy as np

from .errors import CapacityError, RejectionExhausted, ValidationError
from .rng import make_stream


class Selection(NamedTuple):
    """Outcome of one sampling task: chosen 1-based index, or 0 for none."""

    index: int

    @property
    def is_none(self):
        return self.index == 0


class WeightOracle:
    """Length plus a 1-based index -> weight function.

    Weights are validated on evaluation: NaN or negative values raise
    immediately rather than silently corrupting the distribution. The
    function must be pure within one sampling call (zprs evaluates every
    element twice).
    """

    __slots__ = ("n", "_fn")

    def __init__(self, n, fn):
        self.n = n
        self._fn = fn

    def w(self, i):
        v = float(self._fn(i))
        if math.isnan(v) or v < 0.0:
            raise ValidationError(f"weight w({i}) = {v} is negative or NaN")
        return v

    @classmethod
    def from_array(cls, values):
        arr = np.asarray(values, dtype=np.float64)
        return cls(len(arr), lambda i: arr[i - 1])

    def to_array(self):
        return np.array([self.w(i) for i in range(1, self.n + 1)])


class LaneGroup:
    """k cooperating lanes with their own random streams and collectives.

    Lanes are evaluated in lane order, so a group is deterministic given
    its streams; every collective bumps ``collective_ops`` by one.
    """

    def __init__(self, lanes):
        self.k = len(lanes)
        self.lanes = lanes
        self.collective_ops = 0

    @classmethod
    def from_seed(cls, seed, k, trial=0):
        """Streams laid out as ``(trial << 10) | lane`` — the same scheme the
        trial-batched kernels use, so object/kernel runs are comparable."""
        return cls([make_stream(seed, lane_stream_id(trial, j)) for j in range(k)])

    def inclusive_prefix_sum(self, values):
        self.collective_ops += 1
        return np.cumsum(values)

    def exclusive_prefix_sum(self, values):
        self.collective_ops += 1
        out = np.cumsum(values)
        out[1:] = out[:-1]
        out[0] = 0.0
        return out

    def max_reduce(self, values):
        self.collective_ops += 1
        return int(max(values))

    def last_positive_reduce(self, values):
        """Last value > 0 in lane order (highest lane wins), else 0."""
        self.collective_ops += 1
        for v in reversed(values):
            if v > 0:
                return int(v)
        return 0


def lane_stream_id(trial, lane):
    """Stream-id layout shared with the compiled kernels: 10 bits of lane."""
    return (trial << 10) | lane


class PrefixBuffer:
    """Reusable O(n) scratch for inverse transform sampling."""

    def __init__(self, capacity):
        self.data = np.empty(capacity, dtype=np.float64)

    @property
    def capacity(self):
        return len(self.data)


class AliasTable(NamedTuple):
    prob: np.ndarray   # acceptance probability per bucket
    alias: np.ndarray  # fallback index per bucket (1-based)
    n: int


def sequential_rs(w, rng):
    """One-pass weighted reservoir selection.

    Element i replaces the running pick with probability w(i)/prefix(i);
    the last replacement wins, which makes the overall pick probability
    w(i)/total. Consumes exactly n draws (zero-weight elements included)
    and keeps O(1) auxiliary state.
    """
    prefix = 0.0
    selected = 0
    for i in range(1, w.n + 1):
        wi = w.w(i)
        prefix += wi
        r = rng.next_uniform()
        if wi > 0.0 and r * prefix < wi:
            selected = i
    return Selection(selected)


def dprs(w, group):
    """Chunked parallel reservoir selection in sequence order.

    Each chunk loads k consecutive weights (zero-padding past the end),
    prefix-sums them across lanes, lets lane j accept its element against
    the running total, then max-reduces the candidate indices. Costs
    2*ceil(n/k) collectives; every lane draws once per chunk (padding lanes
    draw and discard so replay is independent of n mod k).
    """
    k = group.k
    if k < 1:
        raise ValidationError("lane group must have at least one lane")
    n = w.n
    candidates = np.zeros(k, dtype=np.int64)
    lane_w = np.zeros(k, dtype=np.float64)
    carry = 0.0
    selected = 0
    for chunk in range((n + k - 1) // k):
        base = chunk * k
        for j in range(k):
            idx = base + j + 1
            lane_w[j] = w.w(idx) if idx <= n else 0.0
        prefix = group.inclusive_prefix_sum(lane_w)
        for j in range(k):
            r = group.lanes[j].next_uniform()
            if lane_w[j] > 0.0 and r * (prefix[j] + carry) < lane_w[j]:
                candidates[j] = base + j + 1
        selected = group.max_reduce(candidates)
        carry += prefix[k - 1]
    return Selection(selected)


def zprs(w, group):
    """Lane-strided parallel reservoir selection with two collectives.

    Pass 1 accumulates each lane's total over its strided slice
    (indices j, j+k, j+2k, ...); one exclusive prefix sum gives each lane
    the mass owned by lower lanes. Pass 2 re-reads the weights, each lane
    running an independent reservoir over its slice seeded with that
    offset. The surviving candidate of the highest lane wins, which is
    exactly a sequential reservoir pass over the lane-concatenated
    permutation of the input.
    """
    k = group.k
    if k < 1:
        raise ValidationError("lane group must have at least one lane")
    n = w.n
    chunks = (n + k - 1) // k
    lane_sum = np.zeros(k, dtype=np.float64)
    for chunk in range(chunks):
        base = chunk * k
        for j in range(min(k, n - base)):
            lane_sum[j] += w.w(base + j + 1)
    running = group.exclusive_prefix_sum(lane_sum)
    candidates = np.zeros(k, dtype=np.int64)
    for chunk in range(chunks):
        base = chunk * k
        for j in range(k):
            idx = base + j + 1
            wi = w.w(idx) if idx <= n else 0.0
            running[j] += wi
            r = group.lanes[j].next_uniform()
            if wi > 0.0 and r * running[j] < wi:
                candidates[j] = idx
    return Selection(group.last_positive_reduce(candidates))


def its(w, rng, scratch):
    """Inverse transform sampling over an explicit prefix-sum buffer.

    Builds inclusive prefix sums in ``scratch`` (hence O(n) memory), draws
    one uniform, and binary-searches the first index whose prefix reaches
    r * total.
    """
    n = w.n
    if scratch.capacity < n:
        raise CapacityError(f"prefix buffer holds {scratch.capacity}, need {n}")
    prefix = scratch.data
    total = 0.0
    for i in range(1, n + 1):
        total += w.w(i)
        prefix[i - 1] = total
    r = rng.next_uniform()
    if n == 0 or total <= 0.0:
        return Selection(0)
    target = r * total
    idx = int(np.searchsorted(prefix[:n], target, side="left"))
    return Selection(min(idx + 1, n))


def alias_build(w, scratch=None):
    """Standard two-array alias construction; O(n) table, O(1) sampling."""
    n = w.n
    weights = np.array([w.w(i) for i in range(1, n + 1)], dtype=np.float64)
    total = weights.sum()
    if n == 0 or total <= 0.0:
        raise ValidationError("alias table needs positive total weight")
    prob = weights * (n / total)
    alias = np.arange(1, n + 1, dtype=np.int64)
    small = [i for i in range(n) if prob[i] < 1.0]
    large = [i for i in range(n) if prob[i] >= 1.0]
    while small and large:
        s = small.pop()
        g = large.pop()
        alias[s] = g + 1
        prob[g] -= 1.0 - prob[s]
        (small if prob[g] < 1.0 else large).append(g)
    for i in large + small:
        prob[i] = 1.0
    return AliasTable(prob=prob, alias=alias, n=n)


def alias_sample(table, rng):
    """One uniform picks the bucket, a second flips the bucket/alias coin."""
    bucket = int(rng.next_uniform() * table.n)
    if bucket >= table.n:  # r is < 1, but guard the product anyway
        bucket = table.n - 1
    coin = rng.next_uniform()
    if coin < table.prob[bucket]:
        return Selection(bucket + 1)
    return Selection(int(table.alias[bucket]))


def rjs(w, w_max, rng, max_rounds=10_000):
    """Rejection sampling against a caller-supplied weight cap.

    Each round draws a uniform index and a uniform height in [0, w_max);
    the index is accepted if the height falls under its weight. Expected
    rounds are n * w_max / total, so heavily skewed weights with a loose
    cap degrade sharply. Raises RejectionExhausted after ``max_rounds``
    (diagnostic outcome); observing w(i) > w_max raises ValidationError.
    """
    if max_rounds < 1:
        raise ValidationError("max_rounds must be >= 1")
    if w_max < 0 or math.isnan(w_max):
        raise ValidationError(f"invalid weight cap {w_max}")
    n = w.n
    if n == 0 or w_max == 0.0:
        return Selection(0)
    for _ in range(max_rounds):
        i = int(rng.next_uniform() * n) + 1
        if i > n:
            i = n
        height = rng.next_uniform() * w_max
        wi = w.w(i)
        if wi > w_max:
            raise ValidationError(f"w({i}) = {wi} exceeds declared cap {w_max}")
        if height < wi:
            return Selection(i)
    raise RejectionExhausted(max_rounds)
