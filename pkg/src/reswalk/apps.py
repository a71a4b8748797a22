"""Walk applications: per-step transition-weight oracles plus stop rules.

Each application is the pair (weight oracle over the current vertex's
out-neighbors, stop condition). Probabilities are computed fresh at every
step — nothing is precomputed per vertex — which is what lets the engine
run with O(1) auxiliary state per query.

Walk-length convention: a query's start vertex is held in the task pool,
not in the result slot. ``emitted`` counts sampled vertices written to the
result slot, so the full sequence is ``emitted + 1`` vertices long and the
slot needs at most ``length`` entries.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .samplers import Selection, WeightOracle

APPS = ("deepwalk", "ppr", "node2vec", "metapath")

# integer codes shared with the compiled engine kernel
APP_IDS = {name: i for i, name in enumerate(APPS)}


@dataclass
class WalkQuery:
    """Mutable per-query walk state, owned by one worker at a time."""

    query_id: int
    cur: int
    prev: int | None = None
    emitted: int = 0
    result_base: int = 0


@dataclass
class AppConfig:
    app: str = "deepwalk"
    length: int = 80                 # max sampled vertices per query
    stop_prob: float = 0.2           # ppr only
    a: float = 2.0                   # node2vec return parameter
    b: float = 0.5                   # node2vec in-out parameter
    schema: tuple = (0, 1, 2, 3, 4)  # metapath edge labels
    weighted: bool = True

    def validate(self):
        if self.app not in APPS:
            raise ValidationError(f"unknown app {self.app!r}")
        if self.length < 1:
            raise ValidationError("walk length must be >= 1")
        if self.app == "ppr" and not 0.0 <= self.stop_prob <= 1.0:
            raise ValidationError("stop_prob must be in [0, 1]")
        if self.app == "node2vec" and (self.a <= 0 or self.b <= 0):
            raise ValidationError("node2vec parameters a, b must be positive")
        if self.app == "metapath" and len(self.schema) == 0:
            raise ValidationError("metapath needs a non-empty schema")
        return self


def deepwalk_oracle(g, q, weighted=True):
    """First-order transition weights: the edge weights of N(q.cur)."""
    lo = int(g.offsets[q.cur])
    n = int(g.offsets[q.cur + 1]) - lo
    weights = g.weights
    if weighted:
        return WeightOracle(n, lambda i: weights[lo + i - 1])
    return WeightOracle(n, lambda i: 1.0)


def node2vec_oracle(g, q, cfg):
    """Second-order transition weights against the previous vertex.

    Base factor per neighbor u: 1/a if u is the previous vertex, 1 if u is
    also a neighbor of it (binary search in the sorted adjacency list),
    1/b otherwise; scaled by the edge weight in weighted mode. The first
    step of a walk has no previous vertex and falls back to first-order
    selection.
    """
    if q.prev is None:
        return deepwalk_oracle(g, q, cfg.weighted)
    lo = int(g.offsets[q.cur])
    n = int(g.offsets[q.cur + 1]) - lo
    prev = q.prev
    plo, phi = int(g.offsets[prev]), int(g.offsets[prev + 1])
    prev_adj = g.targets[plo:phi]
    inv_a, inv_b = 1.0 / cfg.a, 1.0 / cfg.b

    def weight(i):
        e = lo + i - 1
        u = int(g.targets[e])
        if u == prev:
            base = inv_a
        else:
            pos = int(np.searchsorted(prev_adj, u))
            base = 1.0 if pos < len(prev_adj) and prev_adj[pos] == u else inv_b
        return base * float(g.weights[e]) if cfg.weighted else base

    return WeightOracle(n, weight)


def metapath_oracle(g, q, cfg):
    """Label-constrained transition weights for the next schema position.

    The next edge must carry ``schema[q.emitted]``; non-matching neighbors
    get weight zero, and if nothing matches the total is zero and the walk
    terminates with Selection(0).
    """
    step = q.emitted
    if step >= len(cfg.schema):
        raise ValidationError("schema exhausted; the walk should have stopped")
    want = cfg.schema[step]
    lo = int(g.offsets[q.cur])
    n = int(g.offsets[q.cur + 1]) - lo
    labels = g.edge_labels()

    def weight(i):
        e = lo + i - 1
        if int(labels[e]) != want:
            return 0.0
        return float(g.weights[e]) if cfg.weighted else 1.0

    return WeightOracle(n, weight)


def transition_oracle(g, q, cfg):
    """Dispatch to the app's oracle (ppr transitions like deepwalk)."""
    if cfg.app == "node2vec":
        return node2vec_oracle(g, q, cfg)
    if cfg.app == "metapath":
        return metapath_oracle(g, q, cfg)
    return deepwalk_oracle(g, q, cfg.weighted)


def ppr_step(q, cfg, rng):
    """Pre-transition stop draw; True means the walk halts at q.cur."""
    return rng.next_uniform() < cfg.stop_prob


def stop_condition(q, cfg, last):
    """True once the query is finished after observing selection ``last``."""
    if last.index == 0:
        return True
    if q.emitted >= cfg.length:
        return True
    if cfg.app == "metapath" and q.emitted >= len(cfg.schema):
        return True
    return False


def advance(g, q, cfg, selection):
    """Apply one accepted selection to the query state."""
    if selection.index == 0:
        raise ValidationError("cannot advance on an empty selection")
    e = int(g.offsets[q.cur]) + selection.index - 1
    q.prev = q.cur
    q.cur = int(g.targets[e])
    q.emitted += 1
    return q
