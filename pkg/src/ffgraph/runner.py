"""Reports, size sweeps, scaling-law fits and adjacency galleries."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import metrics, oracles
from .errors import FFGraphError, InsufficientData, ParseError
from .generators import GeneratorConfig, default_indegree, format_schedule, generate, parse_schedule
from .graph import validate, write_pgm

log = logging.getLogger(__name__)

DEFAULT_SIZES = (16, 32, 64, 128, 256, 512, 1024)
DETERMINISTIC = {"fully_connected", "line", "locally_connected", "star"}
_DEGREE_FIELD = {
    "locally_connected": "kappa",
    "erdos_renyi": "budget",
    "poisson": "budget",
    "oriented_expander": "expander_degree",
    "fs": "expander_degree",
}


# -- templates and specs ------------------------------------------------------

@dataclass(frozen=True)
class FamilyTemplate:
    """A generator family for a sweep; ``schedule`` sets its degree knob per n."""

    family: str
    schedule: str | None = None
    params: tuple = ()          # sorted (key, value) pairs of fixed GeneratorConfig fields
    label: str | None = None

    @classmethod
    def from_dict(cls, data: dict, where: str = "families[]") -> "FamilyTemplate":
        data = dict(data)
        if "family" not in data:
            raise ParseError("missing family", key=f"{where}.family")
        family = data.pop("family")
        schedule = data.pop("schedule", None)
        label = data.pop("label", None)
        allowed = {f.name for f in fields(GeneratorConfig)} - {"family", "n", "seed"}
        for key in data:
            if key not in allowed:
                raise ParseError(f"unknown key {key!r}", key=f"{where}.{key}")
        if schedule is not None:
            try:
                schedule = format_schedule(schedule)
            except ParseError:
                raise ParseError(f"bad schedule {schedule!r}", key=f"{where}.schedule") from None
        tpl = cls(family, schedule, tuple(sorted(data.items())), label)
        try:
            tpl.config(16, 0)
        except ParseError as exc:
            raise ParseError(str(exc), key=f"{where}.{exc.key or 'family'}") from None
        return tpl

    def to_dict(self) -> dict:
        d = {"family": self.family}
        if self.schedule:
            d["schedule"] = self.schedule
        d.update(dict(self.params))
        if self.label:
            d["label"] = self.label
        return d

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        base = self.family
        p = dict(self.params)
        if "p" in p:
            base += f"(p={p['p']:g})"
        return f"{base}@{self.schedule}" if self.schedule else base

    def config(self, n: int, seed: int) -> GeneratorConfig:
        kw = dict(self.params)
        if self.schedule and self.family in _DEGREE_FIELD:
            kw[_DEGREE_FIELD[self.family]] = max(1, default_indegree(n, self.schedule))
        return GeneratorConfig(family=self.family, n=n, seed=seed, **kw)


def default_families() -> list[FamilyTemplate]:
    """Families of the overview figure, reconstructed from the generator descriptions."""
    return [
        FamilyTemplate("fully_connected"),
        FamilyTemplate("line"),
        FamilyTemplate("locally_connected", "k_logn(1)"),
        FamilyTemplate("erdos_renyi", "k_logn(1)"),
        FamilyTemplate("oriented_expander", "k_logn(1)"),
        FamilyTemplate("poisson", "k_logn(1)", (("p", 0.2),)),
        FamilyTemplate("poisson", "k_logn(1)", (("p", 0.8),)),
        FamilyTemplate("star"),
        FamilyTemplate("fs", "k_logn(4)"),
    ]


@dataclass
class SweepSpec:
    sizes: tuple = DEFAULT_SIZES
    families: list = field(default_factory=default_families)
    seeds_per_point: int = 5
    root_seed: int = 0
    metrics: tuple = ("mixing", "fidelity")
    convention: str = "missmass"
    epsilon: float = 0.25
    horizon_mult: float = 1.0
    fidelity_stop: str | None = "certified"
    workers: int = 1
    timing: bool = False

    def __post_init__(self):
        self.sizes = tuple(int(s) for s in self.sizes)
        if not self.sizes or any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise ParseError("sizes must be non-empty and strictly increasing", key="sizes")
        if self.seeds_per_point < 1:
            raise ParseError("seeds_per_point must be >= 1", key="seeds_per_point")
        if self.convention not in metrics.CONVENTIONS:
            raise ParseError(f"convention must be one of {metrics.CONVENTIONS}", key="convention")
        if self.fidelity_stop not in metrics.EARLY_STOPS:
            raise ParseError(f"fidelity_stop must be one of {metrics.EARLY_STOPS}", key="fidelity_stop")
        unknown = set(self.metrics) - {"mixing", "fidelity"}
        if unknown:
            raise ParseError(f"unknown metrics {sorted(unknown)}", key="metrics")
        self.families = [f if isinstance(f, FamilyTemplate) else FamilyTemplate.from_dict(f, f"families[{i}]")
                         for i, f in enumerate(self.families)]

    @classmethod
    def from_dict(cls, data: dict) -> "SweepSpec":
        known = {f.name for f in fields(cls)}
        for key in data:
            if key not in known:
                raise ParseError(f"unknown key {key!r}", key=key)
        data = dict(data)
        if "families" in data:
            if not isinstance(data["families"], list):
                raise ParseError("families must be a list", key="families")
            data["families"] = [FamilyTemplate.from_dict(f, f"families[{i}]") if isinstance(f, dict) else f
                                for i, f in enumerate(data["families"])]
        for key in ("sizes", "metrics"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(**data)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["families"] = [f.to_dict() for f in self.families]
        d["sizes"] = list(self.sizes)
        d["metrics"] = list(self.metrics)
        return d

    def seeds(self) -> list[int]:
        return [self.root_seed + s for s in range(self.seeds_per_point)]


# -- records ------------------------------------------------------------------

@dataclass
class SweepRecord:
    family: str
    seed: int
    n: int
    indegree_budget: int
    mixing_time: int
    mixing_convention: str
    minimax_fidelity: float
    normalized_minimax: float
    argmin_node: int
    argmax_t: int
    edge_count: int
    wall_time_ms: float | None = None


RECORD_FIELDS = [f.name for f in fields(SweepRecord)]


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECORD_FIELDS)
    for r in records:
        w.writerow([_fmt(getattr(r, k)) for k in RECORD_FIELDS])
    return buf.getvalue()


def read_records(path) -> list[SweepRecord]:
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RECORD_FIELDS:
            raise ParseError(f"unexpected CSV header {reader.fieldnames}", line=1)
        for lineno, row in enumerate(reader, start=2):
            try:
                out.append(SweepRecord(
                    family=row["family"], seed=int(row["seed"]), n=int(row["n"]),
                    indegree_budget=int(row["indegree_budget"]), mixing_time=int(row["mixing_time"]),
                    mixing_convention=row["mixing_convention"],
                    minimax_fidelity=float(row["minimax_fidelity"]),
                    normalized_minimax=float(row["normalized_minimax"]),
                    argmin_node=int(row["argmin_node"]), argmax_t=int(row["argmax_t"]),
                    edge_count=int(row["edge_count"]),
                    wall_time_ms=float(row["wall_time_ms"]) if row["wall_time_ms"] else None))
            except (TypeError, ValueError) as exc:
                raise ParseError(f"bad record: {exc}", line=lineno) from None
    return out


def _horizons(n: int, mult: float) -> tuple[int, int]:
    return max(1, int(math.ceil(8 * n * mult))), max(1, int(math.ceil(4 * n * mult)))


def evaluate(cfg: GeneratorConfig, label: str, spec: SweepSpec) -> SweepRecord:
    t0 = time.perf_counter()
    g = generate(cfg)
    mix_h, fid_h = _horizons(cfg.n, spec.horizon_mult)
    mixing, fid = -1, None
    if "mixing" in spec.metrics:
        rep = metrics.averaged_mixing_time(g, spec.epsilon, spec.convention, mix_h)
        mixing = -1 if rep.mixing_time is None else rep.mixing_time
    if "fidelity" in spec.metrics:
        fid = metrics.fidelity_report(g, fid_h, early_stop=spec.fidelity_stop)
    budget = cfg.degree_parameter()
    if budget is None:
        budget = int(g.in_degrees().max())
    elapsed = (time.perf_counter() - t0) * 1e3
    return SweepRecord(
        family=label, seed=int(cfg.seed), n=cfg.n, indegree_budget=int(budget),
        mixing_time=int(mixing), mixing_convention=spec.convention,
        minimax_fidelity=float(fid.minimax) if fid else float("nan"),
        normalized_minimax=float(fid.normalized_minimax) if fid else float("nan"),
        argmin_node=int(fid.argmin_node) if fid else -1,
        argmax_t=int(fid.argmax_t[fid.argmin_node]) if fid else -1,
        edge_count=g.num_edges,
        wall_time_ms=round(elapsed, 3) if spec.timing else None,
    )


def _job(args):
    tpl, n, seed, spec = args
    try:
        return evaluate(tpl.config(n, seed), tpl.name, spec)
    except FFGraphError as exc:
        log.error("%s n=%d seed=%d failed: %s", tpl.name, n, seed, exc)
        return None


def sweep(spec: SweepSpec) -> list[SweepRecord]:
    """One record per (family, n, seed), sorted by (family, n, seed).

    Deterministic families are evaluated once per size and the record is
    repeated for every seed.
    """
    jobs, repeat = [], []
    for tpl in spec.families:
        for n in spec.sizes:
            if tpl.family in DETERMINISTIC:
                jobs.append((tpl, n, spec.root_seed, spec))
                repeat.append(True)
            else:
                jobs.extend((tpl, n, s, spec) for s in spec.seeds())
                repeat.extend([False] * spec.seeds_per_point)
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(_job, jobs))
    else:
        results = [_job(j) for j in jobs]
    records = []
    for rec, rep in zip(results, repeat):
        if rec is None:
            continue
        if rep:
            records.extend(SweepRecord(**{**asdict(rec), "seed": s}) for s in spec.seeds())
        else:
            records.append(rec)
    records.sort(key=lambda r: (r.family, r.n, r.seed))
    return records


def _median(values) -> float:
    return float(np.median(np.asarray(values, dtype=float)))


def summarize(records) -> list[dict]:
    """Median over seeds per (family, n). NotMixed counts as +inf; an infinite
    median is written back as -1."""
    groups = {}
    for r in records:
        groups.setdefault((r.family, r.n), []).append(r)
    rows = []
    for (family, n), rs in sorted(groups.items()):
        mix = _median([math.inf if r.mixing_time < 0 else r.mixing_time for r in rs])
        rows.append({
            "family": family,
            "n": n,
            "seeds": len(rs),
            "indegree_budget": _median([r.indegree_budget for r in rs]),
            "median_mixing_time": -1.0 if math.isinf(mix) else mix,
            "median_minimax_fidelity": _median([r.minimax_fidelity for r in rs]),
            "median_normalized_minimax": _median([r.normalized_minimax for r in rs]),
            "median_edge_count": _median([r.edge_count for r in rs]),
        })
    return rows


def _dicts_to_csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(row[k]) for k in header])
    return buf.getvalue()


SUMMARY_FIELDS = ["family", "n", "seeds", "indegree_budget", "median_mixing_time",
                  "median_minimax_fidelity", "median_normalized_minimax", "median_edge_count"]


def write_sweep(records, out_dir) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    main, summary = out / "sweep.csv", out / "summary.csv"
    main.write_text(records_to_csv(records))
    summary.write_text(_dicts_to_csv(summarize(records), SUMMARY_FIELDS))
    return main, summary


# -- scaling fits -------------------------------------------------------------

@dataclass
class ScalingFit:
    family: str
    budget_schedule: str
    slope: float
    intercept: float
    r_squared: float


FIT_FIELDS = [f.name for f in fields(ScalingFit)]


def _schedule_of(label: str) -> str:
    return label.split("@", 1)[1] if "@" in label else ""


def fit_scaling(records, schedules=(1, 2, 3, 4), min_sizes: int = 3,
                skip_insufficient: bool = False) -> list[ScalingFit]:
    """OLS of log(median minimax fidelity) on log(n) per family.

    Families swept with a ``k_logn(k)`` schedule are kept only when ``k`` is
    in ``schedules``; families without a schedule are always fitted. Sizes
    whose median fidelity is not positive cannot be logged and are dropped.
    """
    wanted = None if schedules is None else {float(k) for k in schedules}
    by_family = {}
    for r in records:
        sched = _schedule_of(r.family)
        if sched and wanted is not None:
            kind, k = parse_schedule(sched)
            if kind == "k_logn" and k not in wanted:
                continue
        by_family.setdefault(r.family, {}).setdefault(r.n, []).append(r.minimax_fidelity)
    fits = []
    for family, per_n in sorted(by_family.items()):
        pts = [(n, _median(v)) for n, v in sorted(per_n.items())]
        pts = [(n, f) for n, f in pts if f > 0 and math.isfinite(f)]
        if len(pts) < min_sizes:
            if skip_insufficient:
                log.warning("skipping %s: %d usable sizes", family, len(pts))
                continue
            raise InsufficientData(f"{family}: {len(pts)} usable sizes, need {min_sizes}")
        x = np.log([p[0] for p in pts])
        y = np.log([p[1] for p in pts])
        slope, intercept = np.polyfit(x, y, 1)
        resid = y - (slope * x + intercept)
        ss_tot = float(((y - y.mean()) ** 2).sum())
        r2 = 1.0 - float((resid ** 2).sum()) / ss_tot if ss_tot > 0 else 1.0
        fits.append(ScalingFit(family, _schedule_of(family), float(slope), float(intercept), r2))
    return fits


def fits_to_csv(fits) -> str:
    return _dicts_to_csv([asdict(f) for f in fits], FIT_FIELDS)


# -- single report ------------------------------------------------------------

def report(config: GeneratorConfig, epsilon: float = 0.25, convention: str = "missmass",
           horizon_mult: float = 1.0, fidelity_stop: str | None = None) -> dict:
    """Validation, both metrics and the walk spectrum for one generated graph."""
    cfg = config.resolved()
    g = generate(cfg)
    mix_h, fid_h = _horizons(g.n, horizon_mult)
    val = validate(g)
    mixing = metrics.averaged_mixing_time(g, epsilon, convention, mix_h)
    fid = metrics.fidelity_report(g, fid_h, early_stop=fidelity_stop)
    warnings = []
    if not val.unique_sink:
        warnings.append(f"graph has {len(val.sinks)} sinks; stationary distribution is not unique")
    if not mixing.mixed:
        warnings.append(f"did not mix within {mix_h} steps; mixing_time reported as -1")
    spectrum = {}
    for v in metrics.walk_spectrum(g):
        spectrum[str(v)] = spectrum.get(str(v), 0) + 1
    return {
        "config": cfg.to_dict(),
        "n": g.n,
        "edge_count": g.num_edges,
        "validation": val.to_dict(),
        "mixing": mixing.to_dict(),
        "fidelity": fid.to_dict(),
        "walk_spectrum": spectrum,
        "warnings": warnings,
    }


# -- gallery ------------------------------------------------------------------

def default_gallery() -> list[dict]:
    logn, sqrt = "k_logn(1)", "sqrt_n"
    return [
        {"family": "oriented_expander", "n": 128, "schedule": logn},
        {"family": "erdos_renyi", "n": 128, "budget": 4, "label": "erdos_renyi_const"},
        {"family": "poisson", "n": 128, "p": 0.2, "budget": 4, "label": "poisson0.2_const"},
        {"family": "line", "n": 128},
        {"family": "poisson", "n": 128, "p": 0.2, "schedule": sqrt, "label": "poisson0.2_sqrt"},
        {"family": "erdos_renyi", "n": 128, "schedule": sqrt, "label": "erdos_renyi_sqrt"},
        {"family": "poisson", "n": 128, "p": 0.2, "schedule": logn, "label": "poisson0.2_logn"},
        {"family": "erdos_renyi", "n": 128, "schedule": logn, "label": "erdos_renyi_logn"},
        {"family": "fully_connected", "n": 128},
        {"family": "fs", "n": 256},
    ]


def gallery_config(entry: dict, seed: int = 0) -> tuple[GeneratorConfig, str]:
    entry = dict(entry)
    label = entry.pop("label", None)
    schedule = entry.pop("schedule", None)
    entry.setdefault("seed", seed)
    if "n" not in entry:
        raise ParseError("gallery entry needs n", key="n")
    if schedule is not None:
        fam = entry.get("family")
        if fam in _DEGREE_FIELD:
            entry[_DEGREE_FIELD[fam]] = max(1, default_indegree(int(entry["n"]), schedule))
    cfg = GeneratorConfig.from_dict(entry)
    return cfg, label or cfg.family


def gallery(configs, out_dir, seed: int = 0) -> list[Path]:
    """Write ``<name>_n<n>_seed<seed>.pgm`` per entry; name is the label or family."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for entry in configs:
        if isinstance(entry, GeneratorConfig):
            cfg, name = entry, entry.family
        else:
            cfg, name = gallery_config(entry, seed)
        path = out / f"{name}_n{cfg.n}_seed{cfg.seed}.pgm"
        write_pgm(generate(cfg), path)
        paths.append(path)
    return paths


# -- oracle checks ------------------------------------------------------------

def run_checks(seed: int = 0) -> list[dict]:
    """Run every oracle checker at desk scale; one verdict dict per check."""
    from .generators import gen_fully_connected, gen_line

    verdicts = []

    def add(name, ok, **detail):
        verdicts.append({"check": name, "pass": bool(ok), **detail})

    for n in range(4, 13):
        for fam, g in (("fully_connected", gen_fully_connected(n)), ("line", gen_line(n))):
            res = oracles.check_prop_4_2(g)
            add(f"prop_4_2/{fam}/n={n}", res.holds, **res.to_dict())

    cases = [("fully_connected", {}), ("fs", {}), ("poisson", {"p": 0.2})]
    for fam, extra in cases:
        for n in (16, 64):
            g = generate(GeneratorConfig(family=fam, n=n, seed=seed, **extra))
            try:
                res = oracles.check_prop_5_1(g, horizon=256)
                add(f"prop_5_1/{fam}/n={n}", res.decays, **res.to_dict())
            except FFGraphError as exc:
                add(f"prop_5_1/{fam}/n={n}", False, error=str(exc))
    res = oracles.check_prop_5_1(gen_line(3), horizon=64)
    add("prop_5_1/line/n=3", res.decays and res.bound_holds, **res.to_dict())

    worst = 0.0
    for n in range(3, 65):
        exact = oracles.closed_form_line_fidelity(n).exact_value
        got = metrics.fidelity_report(gen_line(n)).minimax
        worst = max(worst, abs(exact - got))
    add("line_fidelity_closed_form/n=3..64", worst <= 1e-10, max_abs_error=worst)

    for fam, extra in (("fully_connected", {}), ("line", {}), ("fs", {}), ("poisson", {"p": 0.2})):
        g = generate(GeneratorConfig(family=fam, n=32, seed=seed, **extra))
        t_max = 4 * g.n
        walk = metrics.tau_row_walk(g, t_max)
        diff = metrics.tau_row_diffusion(g, t_max)
        err = 0.0
        for t, (wt, dt) in enumerate(zip(oracles.dense_powers(g, "W", t_max), oracles.dense_powers(g, "D", t_max))):
            err = max(err, np.abs(wt[-1] - walk[t]).max(), np.abs(dt[-1] - diff[t]).max())
        add(f"dense_equivalence/{fam}/n=32", err <= 1e-10, max_abs_error=float(err))

        engine = metrics.averaged_mixing_time(g).mixing_time
        mc = oracles.monte_carlo_mixing(g, trials_per_start=2000, horizon=8 * g.n, seed=seed)
        est = mc.mixing_time()
        ok = engine is not None and est is not None and abs(engine - est) <= 1
        add(f"monte_carlo_mixing/{fam}/n=32", ok, engine=engine, monte_carlo=est)
    return verdicts


# -- configuration files ------------------------------------------------------

def load_json(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    if not isinstance(data, dict):
        raise ParseError("config root must be a JSON object")
    return data


def parse_config(path=None, overrides: dict | None = None, kind: str = "generator"):
    """Merge a JSON config file with flag overrides (flags win) and validate.

    ``kind`` is ``"generator"`` (returns GeneratorConfig) or ``"sweep"``
    (returns SweepSpec). Unknown keys raise :class:`ParseError`.
    """
    data = load_json(path) if path else {}
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    if kind == "generator":
        return GeneratorConfig.from_dict(data)
    if kind == "sweep":
        return SweepSpec.from_dict(data)
    raise ValueError(f"unknown config kind {kind!r}")
