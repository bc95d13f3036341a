"""Command line entry point: ``ffgraph {report,sweep,fit,gallery,check}``.

Exit codes: 0 success, 2 validation or computation failure, 3 parse error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import runner
from .errors import FFGraphError, ParseError

EXIT_OK, EXIT_INVALID, EXIT_PARSE = 0, 2, 3

log = logging.getLogger("ffgraph")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def _shared(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its keys")
    p.add_argument("--seed", type=int, help="RNG seed (root seed for sweeps)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--convention", choices=["l1", "missmass"])
    p.add_argument("--epsilon", type=float)
    p.add_argument("--horizon-mult", type=float,
                   help="scale factor on the default horizons (8n mixing, 4n fidelity)")
    p.add_argument("-v", "--verbose", action="store_true")


def _generator_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family")
    p.add_argument("--n", type=int)
    p.add_argument("--kappa", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--budget", type=int)
    p.add_argument("--expander-degree", type=int)
    p.add_argument("--fs-decay-ratio", type=float)
    p.add_argument("--fs-base-threshold", type=int)
    p.add_argument("--no-self-edges", dest="self_edges", action="store_false", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ffgraph", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("report", help="metrics for a single generated graph")
    _shared(p)
    _generator_flags(p)
    p.add_argument("--fidelity-stop", choices=["certified", "heuristic"], default=None)
    p.add_argument("--trace-csv", action="store_true", help="also write the mixing trace as CSV (needs --out)")
    p.add_argument("--strict", action="store_true", help="exit 2 if the graph fails validation")

    p = sub.add_parser("sweep", help="metrics over doubling sizes for several families")
    _shared(p)
    p.add_argument("--sizes", help="comma separated node counts")
    p.add_argument("--seeds-per-point", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--timing", action="store_true", default=None, help="record wall_time_ms")

    p = sub.add_parser("fit", help="log-log scaling fits of minimax fidelity")
    _shared(p)
    p.add_argument("--records", required=True, help="sweep.csv produced by `sweep`")
    p.add_argument("--schedules", default="1,2,3,4", help="k values of k_logn schedules to fit")

    p = sub.add_parser("gallery", help="export adjacency matrices as PGM images")
    _shared(p)

    p = sub.add_parser("check", help="run the oracle checkers")
    _shared(p)
    return parser


def _generator_overrides(args) -> dict:
    keys = ["family", "n", "kappa", "p", "budget", "expander_degree", "fs_decay_ratio",
            "fs_base_threshold", "self_edges", "seed"]
    return {k: getattr(args, k) for k in keys}


def _emit(payload: str, out: str | None, name: str) -> None:
    if out:
        path = Path(out)
        path.mkdir(parents=True, exist_ok=True)
        (path / name).write_text(payload)
        log.info("wrote %s", path / name)
    else:
        sys.stdout.write(payload)


def _cmd_report(args) -> int:
    cfg = runner.parse_config(args.config, _generator_overrides(args), kind="generator")
    rep = runner.report(cfg, epsilon=args.epsilon if args.epsilon is not None else 0.25,
                        convention=args.convention or "missmass",
                        horizon_mult=args.horizon_mult or 1.0, fidelity_stop=args.fidelity_stop)
    for w in rep["warnings"]:
        log.warning(w)
    _emit(json.dumps(rep, indent=2) + "\n", args.out, "report.json")
    if args.trace_csv and args.out:
        trace = rep["mixing"]["trace"]
        from .metrics import _trace_csv
        (Path(args.out) / "mixing_trace.csv").write_text(_trace_csv(trace))
    if args.strict and not rep["validation"]["unique_sink"]:
        return EXIT_INVALID
    return EXIT_OK


def _cmd_sweep(args) -> int:
    overrides = {
        "root_seed": args.seed,
        "convention": args.convention,
        "epsilon": args.epsilon,
        "horizon_mult": args.horizon_mult,
        "seeds_per_point": args.seeds_per_point,
        "workers": args.workers,
        "timing": args.timing,
    }
    if args.sizes:
        try:
            overrides["sizes"] = [int(s) for s in args.sizes.split(",")]
        except ValueError:
            raise ParseError(f"bad --sizes {args.sizes!r}", key="sizes") from None
    spec = runner.parse_config(args.config, overrides, kind="sweep")
    records = runner.sweep(spec)
    out = args.out or "."
    main, summary = runner.write_sweep(records, out)
    log.info("wrote %s and %s", main, summary)
    return EXIT_OK


def _cmd_fit(args) -> int:
    records = runner.read_records(args.records)
    try:
        ks = [float(k) for k in args.schedules.split(",") if k]
    except ValueError:
        raise ParseError(f"bad --schedules {args.schedules!r}", key="schedules") from None
    fits = runner.fit_scaling(records, ks, skip_insufficient=True)
    _emit(runner.fits_to_csv(fits), args.out, "fits.csv")
    return EXIT_OK


def _cmd_gallery(args) -> int:
    entries = runner.default_gallery()
    if args.config:
        data = runner.load_json(args.config)
        if set(data) - {"gallery"}:
            raise ParseError("gallery config only accepts the key 'gallery'", key=sorted(set(data) - {"gallery"})[0])
        entries = data.get("gallery", entries)
    paths = runner.gallery(entries, args.out or "gallery", seed=args.seed or 0)
    for p in paths:
        log.info("wrote %s", p)
    return EXIT_OK


def _cmd_check(args) -> int:
    verdicts = runner.run_checks(seed=args.seed or 0)
    _emit(json.dumps(verdicts, indent=2) + "\n", args.out, "checks.json")
    failed = [v["check"] for v in verdicts if not v["pass"]]
    for name in failed:
        log.error("check failed: %s", name)
    return EXIT_INVALID if failed else EXIT_OK


COMMANDS = {"report": _cmd_report, "sweep": _cmd_sweep, "fit": _cmd_fit,
            "gallery": _cmd_gallery, "check": _cmd_check}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ParseError as exc:
        log.error("%s", exc)
        return EXIT_PARSE
    except FFGraphError as exc:
        log.error("%s", exc)
        return EXIT_INVALID
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
