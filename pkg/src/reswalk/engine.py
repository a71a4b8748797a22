"""Sampler-centric walk engine: worker threads, task pools, batching.

Workers pull query start vertices from a shared global pool through an
atomic cursor, keep up to ``local_pool`` live queries each, and advance
them one step per pass in two stages: vertices with degree <= the
threshold go through the small lane group, the rest one-by-one through the
big one. A retired query is immediately replaced from the global pool, so
load stays balanced without any work stealing or inter-worker traffic.

Queries are processed in batches sized so two result buffers fit the
memory budget; while the consumer flushes batch b, batch b+1 is already
computing into the other buffer.

Auxiliary memory is O(workers * (k_big + local_pool)): nothing scales with
the graph's maximum degree or the number of queries, which is the whole
point of the reservoir-based samplers. Every auxiliary allocation is
routed through an AllocationMeter so tests can hold the line.
"""

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .apps import APP_IDS, AppConfig
from .errors import ConfigError, ValidationError
from .rng import stream_base

RESULT_SENTINEL = np.uint32(0xFFFFFFFF)


class AllocationMeter:
    """Byte/count accounting for engine-internal scratch (graph and result
    buffers are deliberately not counted)."""

    def __init__(self):
        self.total_bytes = 0
        self.allocations = 0
        self.by_tag = {}

    def register(self, tag, arr):
        self.total_bytes += arr.nbytes
        self.allocations += 1
        self.by_tag[tag] = self.by_tag.get(tag, 0) + arr.nbytes
        return arr


@dataclass
class EngineConfig:
    workers: int = 1
    k_small: int = 32
    k_big: int = 256
    local_pool: int = 64
    degree_threshold: int = 1024
    memory_budget: int | None = None   # bytes for the two result buffers
    graph_bytes: int | None = None     # subtracted from the budget
    vertex_bytes: int = 4
    replay: bool = False
    sampler: str = "auto"              # auto | zprs | dprs

    def validate(self):
        if self.workers < 1:
            raise ConfigError("need at least one worker")
        if self.local_pool < 1:
            raise ConfigError("local pool must hold at least one query")
        if self.degree_threshold < 1:
            raise ConfigError("degree threshold must be >= 1")
        if not 1 <= self.k_small <= self.k_big:
            raise ConfigError("lane widths must satisfy 1 <= k_small <= k_big")
        if self.k_big > 1000:
            raise ConfigError("k_big larger than the stream-id lane field")
        if self.sampler not in ("auto", "zprs", "dprs"):
            raise ConfigError(f"unknown sampler {self.sampler!r}")
        return self

    def resolve_sampler(self, app):
        """Second-order weights are expensive to evaluate, so node2vec
        defaults to the single-scan sampler; everything else re-reads
        weights twice in exchange for O(1) collectives."""
        if self.sampler == "dprs":
            return K.SAMPLER_DPRS
        if self.sampler == "zprs":
            return K.SAMPLER_ZPRS
        return K.SAMPLER_DPRS if app == "node2vec" else K.SAMPLER_ZPRS


def batch_size(cfg, l_max):
    """Queries per batch: floor((M - M_graph) / (2 * (l_max + 1) * bytes)).

    The 2 pays for the ping-pong pair of buffers; the +1 is the start
    vertex each query keeps in the global pool.
    """
    if cfg.memory_budget is None:
        raise ConfigError("no memory budget configured")
    m_graph = cfg.graph_bytes or 0
    if cfg.memory_budget <= m_graph:
        raise ConfigError(
            f"memory budget {cfg.memory_budget} does not exceed graph size {m_graph}")
    size = (cfg.memory_budget - m_graph) // (2 * (l_max + 1) * cfg.vertex_bytes)
    if size < 1:
        raise ConfigError("memory budget too small for a single query")
    return int(size)


class GlobalPool:
    """Start vertices plus an atomic cursor; each query id is handed out
    exactly once."""

    def __init__(self, starts, base_qid=0):
        self.starts = starts
        self.base_qid = base_qid
        self.cursor = 0
        self._lock = threading.Lock()

    def fetch(self, want):
        if want < 1:
            raise ValidationError("fetch wants at least one query")
        with self._lock:
            lo = self.cursor
            hi = min(lo + want, len(self.starts))
            self.cursor = hi
        return [(self.base_qid + i, int(self.starts[i])) for i in range(lo, hi)]

    def remaining(self):
        return len(self.starts) - self.cursor


class Worker:
    """One engine worker: a local pool of live queries plus lane scratch.

    All scratch is allocated here, once, sized by (local_pool, k_big) only.
    """

    def __init__(self, worker_id, graph, app_cfg, eng_cfg, seed, meter):
        self.worker_id = worker_id
        self.graph = graph
        self.app = app_cfg
        self.cfg = eng_cfg
        self.seed = seed
        cap = eng_cfg.local_pool
        kb = eng_cfg.k_big
        reg = meter.register
        self.qid = reg("pool", np.full(cap, -1, np.int64))
        self.cur = reg("pool", np.zeros(cap, np.int64))
        self.prev = reg("pool", np.full(cap, -1, np.int64))
        self.emitted = reg("pool", np.zeros(cap, np.int64))
        self.active = reg("pool", np.zeros(cap, np.bool_))
        self.finished = reg("pool", np.zeros(cap, np.bool_))
        self.result_base = reg("pool", np.zeros(cap, np.int64))
        self.stage_tag = reg("pool", np.zeros(cap, np.int64))
        self.lane_w = reg("lanes", np.zeros(kb, np.float64))
        self.lane_prefix = reg("lanes", np.zeros(kb, np.float64))
        self.lane_cand = reg("lanes", np.zeros(kb, np.int64))
        self.lane_base = reg("lanes", np.zeros(kb, np.uint64))
        free_ids = [(1 << 62) | (worker_id << 12) | lane for lane in range(kb + 1)]
        self.free_base = reg("lanes", np.array(
            [stream_base(seed, sid) for sid in free_ids], dtype=np.uint64))
        self.lane_ctr = reg("lanes", np.zeros(kb + 1, np.int64))
        self.stats = reg("stats", np.zeros(K.ST_COUNT, np.int64))
        self.completed = []
        self.n_active = 0
        schema = app_cfg.schema if app_cfg.app == "metapath" else ()
        self._schema = np.asarray(schema, dtype=np.int64)
        self._labels = graph.edge_labels()
        self._app_id = APP_IDS[app_cfg.app]
        self._sampler_id = eng_cfg.resolve_sampler(app_cfg.app)

    def _refill(self, gp, batch_base):
        want = self.cfg.local_pool - self.n_active
        if want <= 0:
            return
        grabbed = gp.fetch(want)
        if not grabbed:
            return
        slots = np.flatnonzero(~self.active)
        l_max = self.app.length
        for slot, (q, start) in zip(slots, grabbed):
            self.qid[slot] = q
            self.cur[slot] = start
            self.prev[slot] = -1
            self.emitted[slot] = 0
            self.result_base[slot] = (q - batch_base) * l_max
            self.active[slot] = True
            self.finished[slot] = False
        self.n_active += len(grabbed)

    def _retire(self, lengths, batch_base):
        done = np.flatnonzero(self.active & self.finished)
        for slot in done:
            q = int(self.qid[slot])
            lengths[q - batch_base] = self.emitted[slot]
            self.completed.append(q)
            self.active[slot] = False
        self.n_active -= len(done)

    def pass_once(self, gp, result, lengths, batch_base, on_pass=None):
        """One step for every live query, then retire-and-refill; returns
        True while the worker still holds work."""
        if self.n_active == 0:
            self._refill(gp, batch_base)
            if self.n_active == 0:
                return False
        g = self.graph
        app = self.app
        cfg = self.cfg
        K.step_pass(
            g.offsets, g.targets, g.weights, self._labels,
            self.qid, self.cur, self.prev, self.emitted,
            self.active, self.finished,
            result, self.result_base, app.length,
            self._app_id, app.weighted, app.stop_prob,
            1.0 / app.a, 1.0 / app.b, self._schema,
            self._sampler_id, cfg.k_small, cfg.k_big,
            cfg.degree_threshold,
            np.uint64(self.seed), cfg.replay,
            self.free_base, self.lane_ctr,
            self.lane_w, self.lane_prefix, self.lane_cand, self.lane_base,
            self.stage_tag, self.stats)
        if on_pass is not None:
            on_pass(self)
        self._retire(lengths, batch_base)
        self._refill(gp, batch_base)
        return self.n_active > 0

    def run_batch(self, gp, result, lengths, batch_base, on_pass=None):
        while self.pass_once(gp, result, lengths, batch_base, on_pass):
            pass


@dataclass
class BatchResult:
    """One batch's slice of the result pool (views into a shared buffer —
    consume before resuming the generator)."""

    batch_index: int
    base_qid: int
    count: int
    sequences: np.ndarray  # (count, l_max) uint32, sentinel-padded
    lengths: np.ndarray    # (count,) uint32


@dataclass
class RunStats:
    queries: int = 0
    batches: int = 0
    steps: int = 0
    edges_scanned: int = 0
    collectives: int = 0
    draws: int = 0
    small_tasks: int = 0
    large_tasks: int = 0
    elapsed_s: float = 0.0
    aux_bytes: int = 0
    aux_allocations: int = 0
    completed: int = 0
    per_worker_completed: list = field(default_factory=list)
    completed_query_ids: np.ndarray | None = None


def run_batches(g, starts, app_cfg, eng_cfg, seed=0, workers=None,
                meter=None, on_pass=None):
    """Generator over BatchResult, double-buffered.

    Batch b+1 starts computing as soon as batch b is handed out, and the
    buffer batch b lives in is only reused for b+2 after the consumer
    resumes the generator (the flush/compute rendezvous).
    """
    app_cfg.validate()
    eng_cfg.validate()
    starts = np.ascontiguousarray(starts, dtype=np.int64)
    if len(starts) and (starts.min() < 0 or starts.max() >= g.vertex_count):
        raise ValidationError("start vertex out of range")
    if app_cfg.length >= 1 << 20:
        raise ConfigError("walk length exceeds the replay stream-id field")
    n = len(starts)
    if eng_cfg.memory_budget is not None:
        size = batch_size(eng_cfg, app_cfg.length)
    else:
        size = max(n, 1)
    n_batches = (n + size - 1) // size if n else 0
    if meter is None:
        meter = AllocationMeter()
    if workers is None:
        workers = [Worker(i, g, app_cfg, eng_cfg, seed, meter)
                   for i in range(eng_cfg.workers)]
    l_max = app_cfg.length
    buffers = [
        (np.empty(size * l_max, np.uint32), np.empty(size, np.uint32)),
        (np.empty(size * l_max, np.uint32), np.empty(size, np.uint32)),
    ]

    def compute(b, buf):
        result, lengths = buf
        base = b * size
        count = min(size, n - base)
        result[:count * l_max] = RESULT_SENTINEL
        lengths[:count] = RESULT_SENTINEL
        gp = GlobalPool(starts[base:base + count], base_qid=base)
        with ThreadPoolExecutor(max_workers=len(workers)) as pool:
            futs = [pool.submit(w.run_batch, gp, result, lengths, base, on_pass)
                    for w in workers]
            for f in futs:
                f.result()
        return BatchResult(
            batch_index=b, base_qid=base, count=count,
            sequences=result[:count * l_max].reshape(count, l_max),
            lengths=lengths[:count])

    driver = ThreadPoolExecutor(max_workers=1)
    try:
        if n_batches:
            pending = driver.submit(compute, 0, buffers[0])
            for b in range(n_batches):
                res = pending.result()
                if b + 1 < n_batches:
                    pending = driver.submit(compute, b + 1, buffers[(b + 1) % 2])
                yield res
    finally:
        driver.shutdown(wait=True)


def run(g, starts, app_cfg, eng_cfg, seed=0, sink=None, keep_query_ids=False,
        on_pass=None):
    """Execute all queries; returns RunStats (and feeds each batch to
    ``sink`` while the next one computes)."""
    meter = AllocationMeter()
    app_cfg.validate()
    eng_cfg.validate()
    workers = [Worker(i, g, app_cfg, eng_cfg, seed, meter)
               for i in range(eng_cfg.workers)]
    t0 = time.perf_counter()
    batches = 0
    for batch in run_batches(g, starts, app_cfg, eng_cfg, seed,
                             workers=workers, meter=meter, on_pass=on_pass):
        batches += 1
        if sink is not None:
            sink(batch)
    elapsed = time.perf_counter() - t0
    totals = np.zeros(K.ST_COUNT, np.int64)
    for w in workers:
        totals += w.stats
    stats = RunStats(
        queries=len(starts),
        batches=batches,
        steps=int(totals[K.ST_STEPS]),
        edges_scanned=int(totals[K.ST_EDGES]),
        collectives=int(totals[K.ST_COLLECTIVES]),
        draws=int(totals[K.ST_DRAWS]),
        small_tasks=int(totals[K.ST_SMALL]),
        large_tasks=int(totals[K.ST_LARGE]),
        elapsed_s=elapsed,
        aux_bytes=meter.total_bytes,
        aux_allocations=meter.allocations,
        completed=sum(len(w.completed) for w in workers),
        per_worker_completed=[len(w.completed) for w in workers],
    )
    if keep_query_ids:
        ids = [np.asarray(w.completed, dtype=np.int64) for w in workers]
        stats.completed_query_ids = (
            np.concatenate(ids) if ids else np.empty(0, np.int64))
    return stats


def throughput_report(stats):
    """Edges/steps per second plus the collective counter; a sub-resolution
    elapsed time is clamped so the rates stay finite."""
    elapsed = max(stats.elapsed_s, 1e-9)
    return {
        "elapsed_s": stats.elapsed_s,
        "edges_per_sec": stats.edges_scanned / elapsed,
        "steps_per_sec": stats.steps / elapsed,
        "edges_scanned": stats.edges_scanned,
        "steps": stats.steps,
        "collectives": stats.collectives,
        "batches": stats.batches,
    }


RESULT_MAGIC = b"FWR1"


def write_result_file(path, g, starts, app_cfg, eng_cfg, seed=0):
    """Run the engine and stream batches straight into the result file:
    magic, u64 query count, u32 max length, then per query a u32 length
    followed by its fixed-stride u32 slab."""
    import struct

    l_max = app_cfg.length
    with open(path, "wb") as fh:
        fh.write(RESULT_MAGIC)
        fh.write(struct.pack("<QI", len(starts), l_max))

        def sink(batch):
            rows = np.empty((batch.count, 1 + l_max), np.uint32)
            rows[:, 0] = batch.lengths
            rows[:, 1:] = batch.sequences
            fh.write(rows.tobytes())

        stats = run(g, starts, app_cfg, eng_cfg, seed=seed, sink=sink)
    return stats


def read_result_file(path):
    """Inverse of write_result_file: returns (lengths, sequences)."""
    import struct

    from .errors import FormatError

    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 16 or blob[:4] != RESULT_MAGIC:
        raise FormatError(f"{path}: bad magic (not a walk result file)")
    count, l_max = struct.unpack_from("<QI", blob, 4)
    need = 16 + count * (1 + l_max) * 4
    if len(blob) != need:
        raise FormatError(f"{path}: truncated result file")
    rows = np.frombuffer(blob, dtype="<u4", offset=16).reshape(count, 1 + l_max)
    return rows[:, 0].copy(), rows[:, 1:].copy()
