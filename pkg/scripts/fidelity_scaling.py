"""Log-log fits of minimax fidelity against n for k log2 n in-degree budgets.

Sweeps FS, Poisson(0.2) and Erdos-Renyi at k = 1..4, plus the fully
connected and line references, then fits slope/intercept per schedule.
"""
import argparse
from pathlib import Path

from ffgraph import runner
from ffgraph.runner import FamilyTemplate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/scaling")
    ap.add_argument("--sizes", default="64,128,256,512,1024")
    ap.add_argument("--seeds", type=int, default=3)
    args = ap.parse_args()

    families = [FamilyTemplate("fully_connected"), FamilyTemplate("line")]
    for k in (1, 2, 3, 4):
        sched = f"k_logn({k})"
        families += [FamilyTemplate("fs", sched), FamilyTemplate("poisson", sched, (("p", 0.2),)),
                     FamilyTemplate("erdos_renyi", sched)]
    spec = runner.SweepSpec(sizes=[int(s) for s in args.sizes.split(",")], families=families,
                            seeds_per_point=args.seeds, metrics=("fidelity",))
    records = runner.sweep(spec)
    runner.write_sweep(records, args.out)
    fits = runner.fit_scaling(records, skip_insufficient=True)
    text = runner.fits_to_csv(fits)
    Path(args.out, "fits.csv").write_text(text)
    print(text)


if __name__ == "__main__":
    main()
