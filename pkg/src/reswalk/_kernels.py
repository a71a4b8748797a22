"""Compiled hot paths: trial-batched samplers and the engine step pass.

These re-implement the algorithms from ``samplers`` with the same
counter-based RNG and the same product-form acceptance tests, so a kernel
run and an object-layer run with matching stream ids are bit-identical
(pinned by tests). Stream-id layouts:

* trial kernels:      sid = (trial << 10) | lane
* engine, replay:     sid = TAG_REPLAY | (query_id << 30) | (step << 10) | lane
* engine, free-run:   sid = TAG_FREERUN | (worker_id << 12) | lane

with lane 1023 (or the extra free-run slot) reserved for the ppr stop draw.
"""

import numpy as np
from numba import njit

U30 = np.uint64(30)
U27 = np.uint64(27)
U31 = np.uint64(31)
U11 = np.uint64(11)
U10 = np.uint64(10)
U_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
U_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
U_MIX2 = np.uint64(0x94D049BB133111EB)
INV53 = 1.0 / (1 << 53)

TAG_REPLAY = np.uint64(1 << 63)
TAG_FREERUN = np.uint64(1 << 62)
STOP_LANE = 1023  # replay-mode lane slot for the ppr stop draw

# engine stats accumulator slots
ST_STEPS = 0
ST_EDGES = 1
ST_COLLECTIVES = 2
ST_DRAWS = 3
ST_SMALL = 4
ST_LARGE = 5
ST_COUNT = 6

APP_DEEPWALK = 0
APP_PPR = 1
APP_NODE2VEC = 2
APP_METAPATH = 3

SAMPLER_ZPRS = 0
SAMPLER_DPRS = 1


@njit(inline="always")
def _mix64(z):
    z = (z ^ (z >> U30)) * U_MIX1
    z = (z ^ (z >> U27)) * U_MIX2
    return z ^ (z >> U31)


@njit(inline="always")
def _stream_base(key, sid):
    h = _mix64(key + U_GOLDEN)
    return _mix64(h ^ (sid * U_MIX1))


@njit(inline="always")
def _u01(base, counter):
    z = _mix64(base + counter * U_GOLDEN)
    return np.float64(z >> U11) * INV53


@njit(cache=True)
def rng_block(key, sid, start, count):
    """Draws [start, start+count) of one stream; parity checks vs rng.py."""
    base = _stream_base(key, sid)
    out = np.empty(count, np.float64)
    for i in range(count):
        out[i] = _u01(base, np.uint64(start + i))
    return out


@njit(inline="always")
def _trial_base(key, trial, lane):
    return _stream_base(key, (np.uint64(trial) << U10) | np.uint64(lane))


@njit(cache=True, nogil=True)
def seq_rs_trials(w, key, trials):
    n = w.shape[0]
    out = np.empty(trials, np.uint32)
    for t in range(trials):
        base = _trial_base(key, t, 0)
        prefix = 0.0
        sel = 0
        for i in range(n):
            wi = w[i]
            prefix += wi
            r = _u01(base, np.uint64(i))
            if wi > 0.0 and r * prefix < wi:
                sel = i + 1
        out[t] = sel
    return out


@njit(cache=True, nogil=True)
def dprs_trials(w, k, key, trials):
    """Chunked parallel reservoir over lanes; returns (picks, collectives)."""
    n = w.shape[0]
    chunks = (n + k - 1) // k
    picks = np.empty(trials, np.uint32)
    coll = np.empty(trials, np.int64)
    bases = np.empty(k, np.uint64)
    prefix = np.empty(k, np.float64)
    cand = np.empty(k, np.int64)
    nlanes = min(k, n)
    for t in range(trials):
        for j in range(nlanes):
            bases[j] = _trial_base(key, t, j)
        for j in range(k):
            cand[j] = 0
        carry = 0.0
        sel = 0
        ops = 0
        for c in range(chunks):
            b0 = c * k
            m = min(k, n - b0)
            run = 0.0
            for j in range(m):
                run += w[b0 + j]
                prefix[j] = run
            ops += 1  # inclusive prefix sum
            for j in range(m):
                wi = w[b0 + j]
                r = _u01(bases[j], np.uint64(c))
                if wi > 0.0 and r * (prefix[j] + carry) < wi:
                    cand[j] = b0 + j + 1
            best = 0
            for j in range(k):
                if cand[j] > best:
                    best = cand[j]
            ops += 1  # max reduction
            sel = best
            carry += run
        picks[t] = sel
        coll[t] = ops
    return picks, coll


@njit(cache=True, nogil=True)
def zprs_trials(w, k, key, trials):
    """Lane-strided parallel reservoir; returns (picks, collectives)."""
    n = w.shape[0]
    chunks = (n + k - 1) // k
    picks = np.empty(trials, np.uint32)
    coll = np.empty(trials, np.int64)
    bases = np.empty(k, np.uint64)
    lane_sum = np.empty(k, np.float64)
    running = np.empty(k, np.float64)
    cand = np.empty(k, np.int64)
    nlanes = min(k, n)
    for t in range(trials):
        for j in range(nlanes):
            bases[j] = _trial_base(key, t, j)
        for j in range(k):
            lane_sum[j] = 0.0
            cand[j] = 0
        for c in range(chunks):
            b0 = c * k
            for j in range(min(k, n - b0)):
                lane_sum[j] += w[b0 + j]
        run = 0.0
        for j in range(k):  # exclusive prefix sum
            running[j] = run
            run += lane_sum[j]
        ops = 1
        for c in range(chunks):
            b0 = c * k
            for j in range(min(k, n - b0)):
                wi = w[b0 + j]
                running[j] += wi
                r = _u01(bases[j], np.uint64(c))
                if wi > 0.0 and r * running[j] < wi:
                    cand[j] = b0 + j + 1
        sel = 0
        for j in range(k - 1, -1, -1):  # last positive
            if cand[j] > 0:
                sel = cand[j]
                break
        ops += 1
        picks[t] = sel
        coll[t] = ops
    return picks, coll


@njit(cache=True, nogil=True)
def its_trials(w, key, trials):
    """Inverse transform; rebuilds the prefix buffer per trial like the
    per-call contract does."""
    n = w.shape[0]
    out = np.empty(trials, np.uint32)
    prefix = np.empty(n, np.float64)
    for t in range(trials):
        total = 0.0
        for i in range(n):
            total += w[i]
            prefix[i] = total
        r = _u01(_trial_base(key, t, 0), np.uint64(0))
        if n == 0 or total <= 0.0:
            out[t] = 0
            continue
        target = r * total
        lo = 0
        hi = n - 1
        while lo < hi:
            mid = (lo + hi) >> 1
            if prefix[mid] < target:
                lo = mid + 1
            else:
                hi = mid
        out[t] = lo + 1
    return out


@njit(cache=True, nogil=True)
def alias_trials(prob, alias, key, trials):
    n = prob.shape[0]
    out = np.empty(trials, np.uint32)
    for t in range(trials):
        base = _trial_base(key, t, 0)
        bucket = int(_u01(base, np.uint64(0)) * n)
        if bucket >= n:
            bucket = n - 1
        if _u01(base, np.uint64(1)) < prob[bucket]:
            out[t] = bucket + 1
        else:
            out[t] = alias[bucket]
    return out


@njit(cache=True, nogil=True)
def rjs_trials(w, w_max, key, trials, max_rounds):
    """Rejection rounds per trial; exhausted trials report pick 0 and
    rounds == max_rounds (callers pre-validate w <= w_max)."""
    n = w.shape[0]
    picks = np.empty(trials, np.uint32)
    rounds = np.empty(trials, np.int64)
    for t in range(trials):
        base = _trial_base(key, t, 0)
        sel = 0
        used = max_rounds
        if n > 0 and w_max > 0.0:
            ctr = np.uint64(0)
            for rd in range(max_rounds):
                i = int(_u01(base, ctr) * n)
                ctr += np.uint64(1)
                if i >= n:
                    i = n - 1
                height = _u01(base, ctr) * w_max
                ctr += np.uint64(1)
                if height < w[i]:
                    sel = i + 1
                    used = rd + 1
                    break
        else:
            used = 0
        picks[t] = sel
        rounds[t] = used
    return picks, rounds


@njit(cache=True, nogil=True)
def uniform_control_trials(n, key, trials):
    """Negative control: ignores weights entirely."""
    out = np.empty(trials, np.uint32)
    for t in range(trials):
        i = int(_u01(_trial_base(key, t, 0), np.uint64(0)) * n)
        if i >= n:
            i = n - 1
        out[t] = i + 1
    return out


@njit(inline="always")
def _edge_weight(app_id, weighted, e, targets, weights, labels,
                 prev_v, plo, phi, inv_a, inv_b, want_label):
    """Dynamic transition weight of the e-th edge for the active app."""
    if app_id == APP_METAPATH:
        if np.int64(labels[e]) != want_label:
            return 0.0
        return np.float64(weights[e]) if weighted else 1.0
    if app_id == APP_NODE2VEC and prev_v >= 0:
        u = np.int64(targets[e])
        if u == prev_v:
            base = inv_a
        else:
            lo = plo
            hi = phi
            found = False
            while lo < hi:
                mid = (lo + hi) >> 1
                tv = np.int64(targets[mid])
                if tv < u:
                    lo = mid + 1
                elif tv > u:
                    hi = mid
                else:
                    found = True
                    break
            base = 1.0 if found else inv_b
        return base * np.float64(weights[e]) if weighted else base
    return np.float64(weights[e]) if weighted else 1.0


@njit(inline="always")
def _lane_draw(replay, key, qid, step, j, chunk, free_base, lane_ctr):
    if replay:
        sid = (TAG_REPLAY | (np.uint64(qid) << U30) |
               (np.uint64(step) << U10) | np.uint64(j))
        return _u01(_stream_base(key, sid), np.uint64(chunk))
    return _u01(free_base[j], np.uint64(lane_ctr[j] + chunk))


@njit(cache=True, nogil=True)
def step_pass(offsets, targets, weights, labels,
              qid, cur, prev, emitted, active, finished,
              result, result_base, l_max,
              app_id, weighted, stop_prob, inv_a, inv_b, schema,
              sampler_id, k_small, k_big, d_t,
              key, replay, free_base, lane_ctr,
              lane_w, lane_prefix, lane_cand, lane_base,
              stage_tag, stats):
    """Advance every live query in a local pool by one step.

    Stage 1 handles tasks whose current degree is <= d_t with k_small
    lanes; stage 2 the rest with k_big lanes. Chosen vertices are appended
    to each query's result slice and stop conditions mark ``finished``;
    retirement/refill is the caller's job.
    """
    cap = qid.shape[0]
    schema_len = schema.shape[0]
    for s in range(cap):
        stage_tag[s] = 0
    for stage in range(2):
        k = k_small if stage == 0 else k_big
        for s in range(cap):
            # stage_tag doubles as a stepped-this-pass marker: a stage-1 step
            # may move the query onto a large vertex, which must wait for the
            # next pass rather than being stepped again by stage 2
            if not active[s] or finished[s] or stage_tag[s] != 0:
                continue
            v = cur[s]
            elo = offsets[v]
            deg = offsets[v + 1] - elo
            if (deg <= d_t) != (stage == 0):
                continue
            stage_tag[s] = k
            if stage == 0:
                stats[ST_SMALL] += 1
            else:
                stats[ST_LARGE] += 1
            stats[ST_STEPS] += 1
            q = qid[s]
            step = emitted[s]

            if app_id == APP_PPR:
                if replay:
                    sid = (TAG_REPLAY | (np.uint64(q) << U30) |
                           (np.uint64(step) << U10) | np.uint64(STOP_LANE))
                    r = _u01(_stream_base(key, sid), np.uint64(0))
                else:
                    r = _u01(free_base[k_big], np.uint64(lane_ctr[k_big]))
                    lane_ctr[k_big] += 1
                stats[ST_DRAWS] += 1
                if r < stop_prob:
                    finished[s] = True
                    continue

            if deg == 0:
                finished[s] = True
                continue
            if app_id == APP_METAPATH and step >= schema_len:
                finished[s] = True
                continue

            prev_v = prev[s]
            plo = np.int64(0)
            phi = np.int64(0)
            if app_id == APP_NODE2VEC and prev_v >= 0:
                plo = offsets[prev_v]
                phi = offsets[prev_v + 1]
            want_label = np.int64(schema[step]) if app_id == APP_METAPATH else np.int64(0)

            chunks = (deg + k - 1) // k
            nlanes = min(k, deg)
            if replay:
                for j in range(nlanes):
                    sid = (TAG_REPLAY | (np.uint64(q) << U30) |
                           (np.uint64(step) << U10) | np.uint64(j))
                    lane_base[j] = _stream_base(key, sid)
            sel = 0

            if sampler_id == SAMPLER_DPRS:
                for j in range(k):
                    lane_cand[j] = 0
                carry = 0.0
                for c in range(chunks):
                    b0 = c * k
                    m = min(k, deg - b0)
                    run = 0.0
                    for j in range(m):
                        wv = _edge_weight(app_id, weighted, elo + b0 + j,
                                          targets, weights, labels, prev_v,
                                          plo, phi, inv_a, inv_b, want_label)
                        run += wv
                        lane_w[j] = wv
                        lane_prefix[j] = run
                    stats[ST_COLLECTIVES] += 1
                    for j in range(m):
                        if replay:
                            r = _u01(lane_base[j], np.uint64(c))
                        else:
                            r = _u01(free_base[j], np.uint64(lane_ctr[j] + c))
                        wv = lane_w[j]
                        if wv > 0.0 and r * (lane_prefix[j] + carry) < wv:
                            lane_cand[j] = b0 + j + 1
                    best = 0
                    for j in range(k):
                        if lane_cand[j] > best:
                            best = lane_cand[j]
                    stats[ST_COLLECTIVES] += 1
                    sel = best
                    carry += run
                stats[ST_EDGES] += deg
            else:  # SAMPLER_ZPRS
                for j in range(k):
                    lane_w[j] = 0.0
                    lane_cand[j] = 0
                for c in range(chunks):
                    b0 = c * k
                    for j in range(min(k, deg - b0)):
                        lane_w[j] += _edge_weight(app_id, weighted, elo + b0 + j,
                                                  targets, weights, labels, prev_v,
                                                  plo, phi, inv_a, inv_b, want_label)
                run = 0.0
                for j in range(k):
                    lane_prefix[j] = run
                    run += lane_w[j]
                stats[ST_COLLECTIVES] += 1
                for c in range(chunks):
                    b0 = c * k
                    for j in range(min(k, deg - b0)):
                        wv = _edge_weight(app_id, weighted, elo + b0 + j,
                                          targets, weights, labels, prev_v,
                                          plo, phi, inv_a, inv_b, want_label)
                        lane_prefix[j] += wv
                        if replay:
                            r = _u01(lane_base[j], np.uint64(c))
                        else:
                            r = _u01(free_base[j], np.uint64(lane_ctr[j] + c))
                        if wv > 0.0 and r * lane_prefix[j] < wv:
                            lane_cand[j] = b0 + j + 1
                for j in range(k - 1, -1, -1):
                    if lane_cand[j] > 0:
                        sel = lane_cand[j]
                        break
                stats[ST_COLLECTIVES] += 1
                stats[ST_EDGES] += 2 * deg

            stats[ST_DRAWS] += chunks * k
            if not replay:
                for j in range(k):  # padding lanes advance too
                    lane_ctr[j] += chunks

            if sel == 0:
                finished[s] = True
                continue
            u = np.int64(targets[elo + sel - 1])
            result[result_base[s] + step] = u
            prev[s] = v
            cur[s] = u
            emitted[s] = step + 1
            if step + 1 >= l_max:
                finished[s] = True
            elif app_id == APP_METAPATH and step + 1 >= schema_len:
                finished[s] = True
    return 0


@njit(cache=True, nogil=True)
def validate_walks(offsets, targets, labels, starts, result, lengths,
                   l_max, want_schema):
    """Check every consecutive pair is an edge (and labels match the schema
    when one is given). Returns the number of violations."""
    bad = 0
    nq = starts.shape[0]
    schema_len = want_schema.shape[0]
    for i in range(nq):
        cur = np.int64(starts[i])
        ln = np.int64(lengths[i])
        if ln > l_max:
            bad += 1
            continue
        base = i * l_max
        for j in range(ln):
            nxt = np.int64(result[base + j])
            lo = offsets[cur]
            hi = offsets[cur + 1]
            found_edge = np.int64(-1)
            while lo < hi:
                mid = (lo + hi) >> 1
                tv = np.int64(targets[mid])
                if tv < nxt:
                    lo = mid + 1
                elif tv > nxt:
                    hi = mid
                else:
                    found_edge = mid
                    break
            if found_edge < 0:
                bad += 1
                break
            if schema_len > 0:
                if j >= schema_len:
                    bad += 1
                    break
                # parallel edges may differ in label: accept any matching one
                want = np.int64(want_schema[j])
                ok = False
                e = found_edge
                while e >= offsets[cur] and np.int64(targets[e]) == nxt:
                    if np.int64(labels[e]) == want:
                        ok = True
                        break
                    e -= 1
                e = found_edge + 1
                while not ok and e < offsets[cur + 1] and np.int64(targets[e]) == nxt:
                    if np.int64(labels[e]) == want:
                        ok = True
                        break
                    e += 1
                if not ok:
                    bad += 1
                    break
            cur = nxt
        for j in range(ln, l_max):
            if result[base + j] != np.uint32(0xFFFFFFFF):
                bad += 1
                break
    return bad
