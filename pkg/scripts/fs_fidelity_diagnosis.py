"""Why the recursive FS graph loses minimax fidelity as n grows.

Compares the recursive generator (over a grid of decay ratios and base
thresholds) with a flat block motif: ceil(log2 n) contiguous blocks, every
node of block b linked to every node of block b+1, the last block fully
connected, self-edges elsewhere. Prints median normalized minimax fidelity
and the node that attains the minimum.
"""
import argparse
import statistics

import numpy as np

from ffgraph.generators import block_sizes, ceil_log2, default_indegree, gen_fs
from ffgraph.graph import build_graph
from ffgraph.metrics import fidelity_report


def flat_motif(n: int):
    sizes = block_sizes(n, max(1, ceil_log2(n)))
    starts = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    edges = [(i, i) for i in range(n)]
    for b in range(len(sizes) - 1):
        lo, mid, hi = starts[b], starts[b + 1], starts[b + 2]
        edges += [(a, c) for a in range(lo, mid) for c in range(mid, hi)]
    last = starts[-2]
    edges += [(a, c) for a in range(last, n) for c in range(a + 1, n)]
    return build_graph(n, edges)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="16,64,256,1024")
    ap.add_argument("--seeds", type=int, default=5)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    print("flat block motif")
    for n in sizes:
        rep = fidelity_report(flat_motif(n), early_stop="certified")
        print(f"  n={n:5d} normalized={rep.normalized_minimax:.4g} argmin={rep.argmin_node}")

    for ratio in (0.25, 0.5, 0.75, 0.9):
        for threshold in (4, 8, 16):
            for k in (1, 4):
                row = []
                for n in sizes:
                    d = max(1, default_indegree(n, ("k_logn", k)))
                    reps = [fidelity_report(gen_fs(n, d, ratio, threshold, seed=s), early_stop="certified")
                            for s in range(args.seeds)]
                    med = statistics.median(r.normalized_minimax for r in reps)
                    row.append(f"{n}:{med:.3g}@{reps[0].argmin_node}")
                print(f"fs r={ratio} threshold={threshold} k={k}: " + " ".join(row))


if __name__ == "__main__":
    main()
