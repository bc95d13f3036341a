"""Metric curves over doubling sizes for the default families.

Writes sweep.csv (one row per family, n, seed) and summary.csv (medians).
"""
import argparse
import logging

from ffgraph import runner


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/figure1")
    ap.add_argument("--max-n", type=int, default=1024)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO)

    sizes = []
    n = 16
    while n <= args.max_n:
        sizes.append(n)
        n *= 2
    spec = runner.SweepSpec(sizes=sizes, seeds_per_point=args.seeds, workers=args.workers)
    main_csv, summary_csv = runner.write_sweep(runner.sweep(spec), args.out)
    print(summary_csv.read_text())


if __name__ == "__main__":
    main()
