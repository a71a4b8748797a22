#!/usr/bin/env python3
"""Tour of the six weighted sampling methods.

All of them draw index i with probability w(i)/sum(w); they differ in
memory footprint, collective-operation count, and how they behave under
weight skew. The two reservoir variants need no per-element scratch at
all, which is what lets thousands of walk queries run concurrently.
"""

import numpy as np

from reswalk.samplers import (LaneGroup, PrefixBuffer, WeightOracle,
                              alias_build, alias_sample, dprs, its, rjs,
                              sequential_rs, zprs)
from reswalk.rng import make_stream
from reswalk.stats import analytic_dist, tvd
from reswalk.trials import run_trials


def main():
    w = np.array([5.0, 1.0, 0.0, 3.0, 1.0])
    oracle = WeightOracle.from_array(w)
    print("weights:", w, "-> analytic distribution", analytic_dist(w)[1:])

    print("\nsingle draws from each method (seed 7):")
    print("  sequential reservoir:", sequential_rs(oracle, make_stream(7, 0)))
    group = LaneGroup.from_seed(7, 3)
    print("  chunked parallel    :", dprs(oracle, group),
          f"({group.collective_ops} collectives, 3 lanes)")
    group = LaneGroup.from_seed(7, 3)
    print("  lane-strided        :", zprs(oracle, group),
          f"({group.collective_ops} collectives, any length)")
    print("  inverse transform   :", its(oracle, make_stream(7, 0),
                                         PrefixBuffer(8)), "(O(n) scratch)")
    table = alias_build(oracle)
    print("  alias table         :", alias_sample(table, make_stream(7, 0)))
    print("  rejection           :", rjs(oracle, float(w.max()),
                                         make_stream(7, 0)))

    print("\n200k-trial empirical check (total variation distance):")
    expected = analytic_dist(w)
    for sampler in ("seq", "dprs", "zprs", "its", "alias", "rjs"):
        picks = run_trials(sampler, w, 200_000, seed=11, k=3).picks
        emp = np.bincount(picks, minlength=len(w) + 1) / 200_000
        print(f"  {sampler:5s} tvd = {tvd(emp, expected):.5f}")

    print("\ncollective-operation counts (the reason the lane-strided "
          "variant exists):")
    for n in (64, 1024, 65536):
        wn = np.random.default_rng(0).uniform(1, 5, n)
        for sampler in ("dprs", "zprs"):
            res = run_trials(sampler, wn, 4, seed=3, k=32)
            print(f"  {sampler} n={n:6d} k=32 -> "
                  f"{res.collectives_per_task:g} collectives/task")


if __name__ == "__main__":
    main()
