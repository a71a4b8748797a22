from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reswalk.errors import ValidationError
from reswalk.graph import build_csr, parse_edge_list, random_edge_list
from reswalk.rng import SequenceStream
from reswalk.samplers import WeightOracle, sequential_rs
from reswalk.stats import (EmpiricalDist, analytic_dist, analytic_dist_exact,
                           chi_square, chi_square_threshold,
                           discretized_draw_strings, node2vec_bruteforce,
                           rs_exhaustive_oracle, tvd)


def test_analytic_uniform_pair():
    assert analytic_dist([1.0, 1.0]).tolist() == [0.0, 0.5, 0.5]


def test_analytic_zero_total():
    assert analytic_dist([0.0, 0.0]).tolist() == [1.0, 0.0, 0.0]


def test_analytic_normalization():
    assert np.allclose(analytic_dist([1.0, 2.0, 3.0]),
                       [0, 1 / 6, 2 / 6, 3 / 6])


def test_analytic_exact_sums_to_one():
    rng = np.random.default_rng(8)
    for _ in range(25):
        w = rng.integers(0, 9, int(rng.integers(1, 20)))
        if w.sum() == 0:
            w[0] = 1
        exact = analytic_dist_exact(list(w))
        assert sum(exact, Fraction(0)) == 1
        assert np.allclose(analytic_dist(w.astype(float)),
                           [float(f) for f in exact])


def test_tvd_identity_and_disjoint():
    assert tvd([1.0, 0.0], [1.0, 0.0]) == 0.0
    assert tvd([1.0, 0.0], [0.0, 1.0]) == 1.0
    assert tvd([0.5, 0.5], [0.75, 0.25]) == 0.25


def test_tvd_length_mismatch():
    with pytest.raises(ValidationError):
        tvd([1.0], [0.5, 0.5])


def test_tvd_requires_normalized():
    with pytest.raises(ValidationError):
        tvd([0.7, 0.7], [0.5, 0.5])


@st.composite
def prob_vectors(draw, size=4):
    raw = draw(st.lists(st.floats(0.01, 1.0), min_size=size, max_size=size))
    arr = np.array(raw)
    return arr / arr.sum()


@settings(max_examples=50, deadline=None)
@given(prob_vectors(), prob_vectors(), prob_vectors())
def test_tvd_symmetry_and_triangle(p, q, r):
    assert tvd(p, q) == pytest.approx(tvd(q, p))
    assert tvd(p, r) <= tvd(p, q) + tvd(q, r) + 1e-12


def test_chi_square_exact_match_is_zero():
    observed = EmpiricalDist(np.array([0, 25, 25, 50]), 100)
    stat, _ = chi_square(np.array([0, 0.25, 0.25, 0.5]), observed)
    assert stat == 0.0


def test_chi_square_arithmetic():
    # uniform over 4 bins, observed [30,20,25,25]: (25+25+0+0)/25 = 2
    observed = EmpiricalDist(np.array([30, 20, 25, 25]), 100)
    stat, dof = chi_square(np.full(4, 0.25), observed)
    assert stat == pytest.approx(2.0)
    assert dof == 3


def test_chi_square_impossible_outcome():
    observed = EmpiricalDist(np.array([0, 99, 0, 1]), 100)
    stat, dof = chi_square(np.array([0, 1.0, 0, 0]), observed)
    assert stat == float("inf")
    assert stat > chi_square_threshold(dof)


def test_chi_square_pools_small_bins():
    expected = np.array([0.0, 0.485, 0.485, 0.01, 0.01, 0.01])
    observed = EmpiricalDist(np.array([0, 97, 97, 2, 2, 2]), 200)
    stat, dof = chi_square(expected, observed)
    assert np.isfinite(stat)
    assert dof == 2  # two big bins + one pooled bin


def test_threshold_monotone_in_dof():
    assert chi_square_threshold(10) > chi_square_threshold(2)


# --- second-order transition oracle ------------------------------------------

def test_bruteforce_triangle():
    # v'=0, v=1 mutually adjacent with u=2: dist(v', u)=1 -> base 1
    g = build_csr(parse_edge_list("0 1\n1 0\n0 2\n2 0\n1 2\n2 1"), 3)
    dist = node2vec_bruteforce(g, 0, 1, a=2.0, b=0.5, weighted=False)
    # neighbors of 1 sorted: [0, 2]; bases [1/2 (prev), 1 (shared)]
    assert np.allclose(dist, [0, 1 / 3, 2 / 3])


def test_bruteforce_path_distance_two():
    # path 0 -> 1 -> 2 with 2 not adjacent to 0: base 1/b
    g = build_csr(parse_edge_list("0 1\n1 2"), 3)
    dist = node2vec_bruteforce(g, 0, 1, a=2.0, b=0.5, weighted=False)
    assert np.allclose(dist, [0, 1.0])  # only one candidate
    g2 = build_csr(parse_edge_list("0 1\n1 0\n1 2"), 3)
    dist2 = node2vec_bruteforce(g2, 0, 1, a=2.0, b=0.5, weighted=False)
    # neighbors of 1: [0 (prev, 1/2), 2 (unreachable from 0, 1/0.5=2)]
    assert np.allclose(dist2, [0, 0.2, 0.8])


def test_bruteforce_matches_fast_oracle_on_random_graphs():
    from reswalk.apps import AppConfig, WalkQuery, node2vec_oracle

    rng = np.random.default_rng(123)
    cfg = AppConfig(app="node2vec", a=2.0, b=0.5, weighted=True)
    checked = 0
    for trial in range(100):
        g = build_csr(random_edge_list(50, 400, int(rng.integers(1e9))), 50)
        v_prev = int(rng.integers(50))
        nbrs = g.neighbors(v_prev)
        if len(nbrs) == 0:
            continue
        v_cur = int(nbrs[rng.integers(len(nbrs))])
        if g.degree(v_cur) == 0:
            continue
        q = WalkQuery(query_id=0, cur=v_cur, prev=v_prev, emitted=1)
        fast = analytic_from_oracle(node2vec_oracle(g, q, cfg))
        slow = node2vec_bruteforce(g, v_prev, v_cur, 2.0, 0.5, weighted=True)
        assert np.array_equal(fast, slow)
        checked += 1
    assert checked > 60


def analytic_from_oracle(oracle):
    return analytic_dist(oracle.to_array())


# --- exhaustive tiny-case enumeration ----------------------------------------

def test_exhaustive_single_element():
    for bits in (1, 2, 4):
        assert rs_exhaustive_oracle([1.0], bits).tolist() == [0.0, 1.0]


def test_exhaustive_uniform_pair():
    mass = rs_exhaustive_oracle([1.0, 1.0], 4)
    assert abs(mass[2] - 0.5) <= 1 / 16


def test_exhaustive_three_to_one():
    mass = rs_exhaustive_oracle([3.0, 1.0], 4)
    assert abs(mass[1] - 0.75) <= 1 / 16
    assert abs(mass[2] - 0.25) <= 1 / 16


def test_exhaustive_convergence_halves_error():
    w = [1.0, 2.0, 3.0]
    target = analytic_dist(w)
    errs = {bits: np.abs(rs_exhaustive_oracle(w, bits) - target).max()
            for bits in (2, 3, 4)}
    assert errs[3] <= errs[2] / 2 + 1e-12
    assert errs[4] <= errs[3] / 2 + 1e-12


def test_exhaustive_bounds():
    with pytest.raises(ValidationError):
        rs_exhaustive_oracle([1.0] * 5, 2)
    with pytest.raises(ValidationError):
        rs_exhaustive_oracle([1.0], 5)


def test_sequential_rs_matches_enumeration_exactly():
    # same draw strings, same selections, case by case
    w = [2.0, 0.0, 3.0]
    counts = np.zeros(4)
    for draws in discretized_draw_strings(3, 3):
        sel = sequential_rs(WeightOracle.from_array(w), SequenceStream(draws))
        counts[sel.index] += 1
    assert np.allclose(counts / counts.sum(), rs_exhaustive_oracle(w, 3))
