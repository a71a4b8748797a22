"""Acceptance suite: one test per exit criterion, each printing a verdict.

Run as ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines. The statistical gates use 1e6 trials per cell with TVD <= 0.01 and
a 99.9th-percentile chi-square with up to three retry seeds.
"""

import time

import numpy as np
import pytest

from reswalk import _kernels as K
from reswalk.apps import AppConfig, WalkQuery, node2vec_oracle
from reswalk.bench import bench_cell, make_weights
from reswalk.engine import (EngineConfig, batch_size, run, run_batches,
                            write_result_file)
from reswalk.errors import ConfigError
from reswalk.graph import (EdgeList, build_csr, random_edge_list,
                           star_edge_list, synthesize_labels,
                           synthesize_weights)
from reswalk.rng import SequenceStream, make_stream
from reswalk.samplers import (LaneGroup, WeightOracle, lane_stream_id,
                              sequential_rs, zprs)
from reswalk.stats import (analytic_dist, discretized_draw_strings,
                           node2vec_bruteforce, rs_exhaustive_oracle, tvd)
from reswalk.trials import LANE_SAMPLERS, SAMPLERS, run_trials, verify_cell, weight_corpus

TRIALS = 1_000_000
KS = (1, 2, 3, 8, 32, 256)


def report(num, ok, detail):
    print(f"\n[criterion {num}] {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num}: {detail}"


def regular_graph(v, out_degree, seed, weights_seed=None):
    """Every vertex gets exactly ``out_degree`` random out-edges (no
    dangling vertices, so walks never stop early)."""
    rng = np.random.default_rng(seed)
    e = v * out_degree
    el = EdgeList(
        src=np.repeat(np.arange(v, dtype=np.uint32), out_degree),
        dst=rng.integers(0, v, e, dtype=np.uint32),
        weight=np.ones(e, np.float32),
        label=np.zeros(e, np.uint8),
    )
    g = build_csr(el, v)
    if weights_seed is not None:
        g = synthesize_weights(g, weights_seed, "uniform")
    return g


def test_c01_sampler_distribution_correctness():
    """Every sampling method matches p(i) = w(i)/sum(w) on a randomized
    corpus, across the lane-width grid, at 1e6 trials per cell."""
    t0 = time.perf_counter()
    corpus = weight_corpus(count=50, max_n=64, seed=12345)
    worst = (0.0, None)
    cells = 0
    failures = []
    for vi, w in enumerate(corpus):
        for sampler in SAMPLERS:
            ks = KS if sampler in LANE_SAMPLERS else (32,)
            for k in ks:
                rep = verify_cell(sampler, w, TRIALS, seed=1000 * vi + 7,
                                  k=k, retries=3)
                cells += 1
                if rep.tvd > 0.01 or not rep.passed:
                    failures.append((sampler, vi, k, rep.tvd, rep.chi2))
                if rep.tvd > worst[0]:
                    worst = (rep.tvd, (sampler, vi, k))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 600
    report(1, ok,
           f"{cells} cells x {TRIALS} trials, worst tvd={worst[0]:.5f} at "
           f"{worst[1]}, {len(failures)} failures, {elapsed:.0f}s (budget 600s)")


def test_c02_exhaustive_tiny_case_oracle():
    """4-bit draw enumeration agrees with analytic masses within 1/16, and
    the production sampler reproduces the enumeration exactly."""
    bad_mass = []
    bad_match = []
    vectors = []
    for n in (1, 2, 3):
        grids = np.stack(np.meshgrid(*([np.arange(4)] * n)), -1).reshape(-1, n)
        vectors.extend(v for v in grids.tolist() if sum(v) > 0)
    for w in vectors:
        w = [float(x) for x in w]
        n = len(w)
        mass = rs_exhaustive_oracle(w, 4)
        if np.abs(mass - analytic_dist(w)).max() > 1 / 16 + 1e-12:
            bad_mass.append(w)
        counts = np.zeros(n + 1)
        for draws in discretized_draw_strings(n, 4):
            sel = sequential_rs(WeightOracle.from_array(w),
                                SequenceStream(draws))
            counts[sel.index] += 1
        if not np.allclose(counts / counts.sum(), mass, rtol=0, atol=1e-12):
            bad_match.append(w)
    ok = not bad_mass and not bad_match
    report(2, ok,
           f"{len(vectors)} weight vectors enumerated; "
           f"{len(bad_mass)} mass deviations, {len(bad_match)} mismatches")


def test_c03_zigzag_equivalence():
    """With matched per-lane draws, the lane-strided sampler equals a
    sequential reservoir pass over the lane-concatenated permutation."""
    rng = np.random.default_rng(33)
    mismatches = 0
    for _ in range(100):
        n = int(rng.integers(1, 64))
        k = int(rng.integers(1, 16))
        w = rng.uniform(0, 5, n)
        w[rng.random(n) < 0.25] = 0.0
        seed = int(rng.integers(2**31))
        group = LaneGroup.from_seed(seed, k, trial=0)
        got = zprs(WeightOracle.from_array(w), group)

        perm = [j + c * k for j in range(1, k + 1)
                for c in range((n + k - 1) // k) if j + c * k <= n]
        draws = []
        for j in range(k):
            lane = make_stream(seed, lane_stream_id(0, j))
            count = sum(1 for idx in perm if (idx - 1) % k == j)
            draws.extend(lane.next_uniform() for _ in range(count))
        ref = sequential_rs(WeightOracle.from_array([w[i - 1] for i in perm]),
                            SequenceStream(draws))
        expect = perm[ref.index - 1] if ref.index else 0
        if got.index != expect:
            mismatches += 1
    report(3, mismatches == 0,
           f"100 random (w, k) replay cases, {mismatches} mismatches "
           "(exact equality required)")


def test_c04_collective_op_law():
    """Instrumented collective counts: 2*ceil(n/k) chunked, 2 lane-strided,
    on every task of the bench grid."""
    sizes = [1 << p for p in range(6, 21, 2)]
    violations = []
    for k in (32, 256):
        for n in sizes:
            w = make_weights(n, seed=3)
            trials = max(2, (1 << 18) // n)
            for sampler, want in (("dprs", 2 * ((n + k - 1) // k)), ("zprs", 2)):
                res = run_trials(sampler, w, trials, seed=5, k=k)
                if not np.all(res.collectives == want):
                    violations.append((sampler, k, n))
    report(4, not violations,
           f"grid k in (32, 256) x sizes 2^6..2^20: every task matched the "
           f"law; {len(violations)} violations")


def test_c05_memory_law():
    """Auxiliary allocation is independent of max degree and query count."""
    app = AppConfig(app="deepwalk", length=4)
    cfg = EngineConfig(workers=2)
    g_low = regular_graph(10_000, 10, seed=1)       # d_max = 10
    g_star = build_csr(star_edge_list(100_000), 100_001)  # d_max = 1e5
    r_low = run(g_low, np.arange(5000) % 10_000, app, cfg, seed=2)
    r_star = run(g_star, np.zeros(5000, np.int64), app, cfg, seed=2)
    r_more = run(g_low, np.arange(50_000) % 10_000, app, cfg, seed=2)
    ok = (r_low.aux_bytes == r_star.aux_bytes == r_more.aux_bytes
          and r_low.aux_allocations == r_star.aux_allocations
          == r_more.aux_allocations)
    report(5, ok,
           f"aux bytes {r_low.aux_bytes} / {r_star.aux_bytes} / "
           f"{r_more.aux_bytes} (d_max 10 vs 1e5, 5k vs 50k queries), "
           f"allocations {r_low.aux_allocations}")


def test_c06_batch_sizing_and_exactly_once():
    """Floor arithmetic on a 10-case table, ceiling batch split, and
    exactly-once completion for 1e6 queries."""
    t0 = time.perf_counter()
    table = [
        # (budget, graph_bytes, l_max, vertex_bytes, expected)
        (800, 0, 99, 4, 1),
        (8_000_000, 0, 79, 4, 12_500),
        (1000, 200, 9, 4, 10),
        (1024, 0, 7, 4, 16),
        (1025, 0, 7, 4, 16),
        (999, 0, 1, 4, 62),
        (1 << 20, 1 << 19, 79, 4, 819),
        (640, 0, 79, 4, 1),
        (64, 0, 1, 8, 2),
        (6400, 0, 4, 2, 320),
    ]
    bad = []
    for budget, gb, l_max, vb, want in table:
        cfg = EngineConfig(memory_budget=budget, graph_bytes=gb,
                           vertex_bytes=vb)
        if batch_size(cfg, l_max) != want:
            bad.append((budget, gb, l_max, vb))
    for budget, gb in ((100, 100), (50, 200)):
        try:
            batch_size(EngineConfig(memory_budget=budget, graph_bytes=gb), 9)
            bad.append(("no error", budget, gb))
        except ConfigError:
            pass

    g = regular_graph(10_000, 10, seed=4, weights_seed=5)
    n = 1_000_000
    app = AppConfig(app="deepwalk", length=4)
    budget = 2 * (4 + 1) * 4 * 300_000  # batch size 300k -> 4 batches
    cfg = EngineConfig(memory_budget=budget, graph_bytes=0)
    starts = np.arange(n) % 10_000
    stats = run(g, starts, app, cfg, seed=6, keep_query_ids=True)
    elapsed = time.perf_counter() - t0
    want_batches = (n + 300_000 - 1) // 300_000
    once = np.array_equal(np.sort(stats.completed_query_ids), np.arange(n))
    ok = (not bad and stats.batches == want_batches and once
          and elapsed < 120)
    report(6, ok,
           f"10-case table ({len(bad)} errors), {stats.batches} batches "
           f"(want {want_batches}), exactly-once={once}, "
           f"{elapsed:.0f}s (budget 120s)")


def test_c07_application_semantics():
    """(a) second-order step matches the brute-force distribution;
    (b) label-schema compliance; (c) geometric stop-length mean."""
    rng = np.random.default_rng(9)
    cfg = AppConfig(app="node2vec", a=2.0, b=0.5, weighted=True)
    worst_tvd = 0.0
    checked = 0
    while checked < 20:
        g = build_csr(random_edge_list(50, 500, int(rng.integers(1e9))), 50)
        g = synthesize_weights(g, int(rng.integers(1e9)), "uniform")
        v_prev = int(rng.integers(50))
        nbrs = g.neighbors(v_prev)
        if len(nbrs) == 0:
            continue
        v_cur = int(nbrs[int(rng.integers(len(nbrs)))])
        if g.degree(v_cur) == 0:
            continue
        q = WalkQuery(query_id=0, cur=v_cur, prev=v_prev, emitted=1)
        w = node2vec_oracle(g, q, cfg).to_array()
        picks = run_trials("dprs", w, TRIALS, seed=int(rng.integers(1e9)),
                           k=32).picks
        emp = np.bincount(picks, minlength=len(w) + 1) / TRIALS
        expected = node2vec_bruteforce(g, v_prev, v_cur, 2.0, 0.5,
                                       weighted=True)
        worst_tvd = max(worst_tvd, tvd(emp, expected))
        checked += 1
    a_ok = worst_tvd <= 0.01

    g = regular_graph(2000, 12, seed=11, weights_seed=12)
    g = synthesize_labels(g, 13, 5)
    app = AppConfig(app="metapath", schema=(0, 1, 2, 3, 4), length=80)
    starts = np.arange(2000)
    schema_bad = 0
    max_len = 0
    for batch in run_batches(g, starts, app, EngineConfig(replay=True),
                             seed=14):
        schema_bad += K.validate_walks(
            g.offsets, g.targets, g.edge_labels(), starts,
            batch.sequences.ravel().copy(), batch.lengths, 80,
            np.array([0, 1, 2, 3, 4], np.int64))
        max_len = max(max_len, int(batch.lengths.max()))
    b_ok = schema_bad == 0 and max_len <= 5

    g = regular_graph(10_000, 10, seed=15, weights_seed=16)
    napp = AppConfig(app="ppr", stop_prob=0.2, length=100)
    hub = g.max_degree_vertex()
    nq = 1_000_000
    total_len = 0
    cfgq = EngineConfig(memory_budget=2 * (100 + 1) * 4 * 250_000,
                        graph_bytes=0)
    for batch in run_batches(g, np.full(nq, hub), napp, cfgq, seed=17):
        total_len += int(batch.lengths.astype(np.int64).sum()) + batch.count
    mean_len = total_len / nq  # start vertex included
    c_ok = abs(mean_len - 5.0) / 5.0 < 0.02

    report(7, a_ok and b_ok and c_ok,
           f"(a) node2vec worst tvd={worst_tvd:.5f} over 20 graphs; "
           f"(b) schema violations={schema_bad}, max emitted={max_len}; "
           f"(c) ppr mean length={mean_len:.4f} vs 5.0")


def test_c08_scheduling_exactly_once_and_replay():
    """Exactly-once completion across the worker/pool grid; byte-identical
    replay output for a single worker."""
    g = regular_graph(3000, 8, seed=18, weights_seed=19)
    n = 20_000
    starts = np.arange(n) % 3000
    app = AppConfig(app="deepwalk", length=4)
    bad = []
    for workers in (1, 2, 8, 16):
        for local_pool in (1, 64, 512):
            cfg = EngineConfig(workers=workers, local_pool=local_pool)
            stats = run(g, starts, app, cfg, seed=20, keep_query_ids=True)
            if not np.array_equal(np.sort(stats.completed_query_ids),
                                  np.arange(n)):
                bad.append((workers, local_pool))
    import tempfile, pathlib
    with tempfile.TemporaryDirectory() as td:
        p1 = pathlib.Path(td) / "a.fwr"
        p2 = pathlib.Path(td) / "b.fwr"
        cfg = EngineConfig(workers=1, replay=True)
        write_result_file(p1, g, starts[:5000], app, cfg, seed=21)
        write_result_file(p2, g, starts[:5000], app, cfg, seed=21)
        identical = p1.read_bytes() == p2.read_bytes()
    report(8, not bad and identical,
           f"12 (workers, pool) settings exactly-once ({len(bad)} failures); "
           f"replay byte-identical={identical}")


def test_c09_rjs_skew_sensitivity():
    """Rejection sampling collapses under weight skew: sigma=3 must cost
    >= 3x its own sigma=1 time at size 2^16 (the cross-sampler 2x gap from
    the source design does not transfer to serialized lanes; measured and
    reported, not asserted)."""
    n = 1 << 16
    rows = {}
    for sigma in (1.0, 3.0):
        w = make_weights(n, kind="lognormal", sigma=sigma, seed=23)
        rows[("rjs", sigma)] = bench_cell("rjs", n, k=256,
                                          element_budget=1 << 26,
                                          weights=w, seed=23, repeats=5)
        rows[("zprs", sigma)] = bench_cell("zprs", n, k=256,
                                           element_budget=1 << 24,
                                           weights=w, seed=23, repeats=3)
    ratio = (rows[("rjs", 3.0)].ns_per_element /
             max(rows[("rjs", 1.0)].ns_per_element, 1e-12))
    vs_zprs = (rows[("rjs", 3.0)].ns_per_element /
               max(rows[("zprs", 3.0)].ns_per_element, 1e-12))
    ok = ratio >= 3.0
    report(9, ok,
           f"rjs sigma3/sigma1 = {ratio:.1f}x (>= 3 required); "
           f"rjs/zprs at sigma=3 = {vs_zprs:.2f}x (reported only)")


def test_c10_relative_sampler_ordering():
    """At sampling sizes >= 2^12 with 256 lanes, the two-collective sampler
    is no slower per element than the chunked one."""
    sizes = [1 << p for p in (12, 14, 16, 18, 20)]
    results = []
    bad = []
    for n in sizes:
        w = make_weights(n, seed=29)
        d = bench_cell("dprs", n, k=256, element_budget=1 << 23, weights=w,
                       seed=29, repeats=3)
        z = bench_cell("zprs", n, k=256, element_budget=1 << 23, weights=w,
                       seed=29, repeats=3)
        results.append((n, z.ns_per_element, d.ns_per_element))
        if z.ns_per_element > d.ns_per_element:
            bad.append(n)
    detail = ", ".join(f"2^{n.bit_length() - 1}: z={z:.2f} d={d:.2f}"
                       for n, z, d in results)
    report(10, not bad, f"ns/element {detail}; violations={bad}")


def test_c11_end_to_end_smoke():
    """1e5 deep walks of length 80 over a million-edge graph, under a
    minute, with every emitted edge checked against the graph."""
    t0 = time.perf_counter()
    g = regular_graph(100_000, 10, seed=31, weights_seed=32)
    n = 100_000
    starts = np.arange(n)
    app = AppConfig(app="deepwalk", length=80)
    cfg = EngineConfig(workers=2)
    bad = 0
    lengths_ok = True
    completed = 0
    for batch in run_batches(g, starts, app, cfg, seed=33):
        bad += K.validate_walks(g.offsets, g.targets, g.edge_labels(),
                                starts[batch.base_qid:
                                       batch.base_qid + batch.count],
                                batch.sequences.ravel().copy(),
                                batch.lengths, 80, np.empty(0, np.int64))
        lens = batch.lengths
        lengths_ok &= bool(np.all((lens >= 1) & (lens <= 80)))
        completed += batch.count
    elapsed = time.perf_counter() - t0
    ok = bad == 0 and lengths_ok and completed == n and elapsed < 60
    report(11, ok,
           f"{completed} walks, {bad} validity violations, lengths in "
           f"[1, 80]={lengths_ok}, {elapsed:.1f}s (budget 60s)")
