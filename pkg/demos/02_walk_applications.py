#!/usr/bin/env python3
"""The four walk applications on one synthetic graph.

Transition weights are computed fresh at every step (dynamic walks), so
second-order and label-constrained applications work without any
precomputed tables.
"""

import numpy as np

from reswalk.apps import AppConfig
from reswalk.engine import EngineConfig, run, run_batches, throughput_report
from reswalk.graph import (build_csr, random_edge_list, synthesize_labels,
                           synthesize_weights)


def show_walks(g, app, seed, count=3):
    starts = np.arange(count, dtype=np.int64)
    for batch in run_batches(g, starts, app, EngineConfig(replay=True), seed):
        for i in range(batch.count):
            ln = batch.lengths[i]
            seq = [int(starts[i])] + batch.sequences[i, :ln].tolist()
            print(f"    query {i}: len={ln + 1:3d}  {seq[:12]}"
                  f"{' ...' if ln > 11 else ''}")


def main():
    g = build_csr(random_edge_list(5000, 60_000, seed=1), 5000)
    g = synthesize_weights(g, 2, "uniform")    # weights in [1, 5)
    g = synthesize_labels(g, 3, 5)             # labels in [0, 4]
    print(f"graph: {g.vertex_count} vertices, {g.edge_count} edges, "
          f"d_max={g.max_degree()}")

    print("\ndeepwalk (first-order, weight-proportional, length 80):")
    show_walks(g, AppConfig(app="deepwalk", length=80), seed=4)

    print("\nppr (geometric stop, p=0.2 -> mean length 5):")
    app = AppConfig(app="ppr", stop_prob=0.2, length=100)
    starts = np.full(20_000, g.max_degree_vertex(), dtype=np.int64)
    total = 0
    for batch in run_batches(g, starts, app, EngineConfig(replay=True), 5):
        total += int(batch.lengths.astype(np.int64).sum()) + batch.count
    print(f"    mean walk length over 20k queries: {total / 20_000:.3f}")

    print("\nnode2vec (second-order, a=2.0, b=0.5):")
    show_walks(g, AppConfig(app="node2vec", a=2.0, b=0.5, length=80), seed=6)

    print("\nmetapath (schema (0,1,2,3,4) bounds walks to 6 vertices):")
    show_walks(g, AppConfig(app="metapath", schema=(0, 1, 2, 3, 4),
                            length=80), seed=7, count=5)

    print("\nthroughput for 20k deepwalk queries:")
    stats = run(g, np.arange(5000, dtype=np.int64).repeat(4),
                AppConfig(app="deepwalk", length=80), EngineConfig(), seed=8)
    rep = throughput_report(stats)
    print(f"    {rep['steps']} steps, {rep['edges_per_sec']:.2e} edges/s, "
          f"{rep['steps_per_sec']:.2e} steps/s")


if __name__ == "__main__":
    main()
