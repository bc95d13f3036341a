"""Adjacency-matrix images (binary PGM) for the default gallery."""
import argparse

from ffgraph import runner


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/gallery")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    for path in runner.gallery(runner.default_gallery(), args.out, seed=args.seed):
        print(path)


if __name__ == "__main__":
    main()
