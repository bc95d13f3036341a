import json
import math

import pytest

from ffgraph import cli, runner
from ffgraph.errors import InsufficientData, ParseError
from ffgraph.generators import GeneratorConfig
from ffgraph.runner import FamilyTemplate, SweepRecord, SweepSpec

SMALL = dict(sizes=(16, 32, 64), seeds_per_point=2)


def _spec(**kw):
    base = dict(SMALL)
    base.update(kw)
    return SweepSpec(**base)


def test_report_examples():
    rep = runner.report(GeneratorConfig("fully_connected", 16))
    assert rep["fidelity"]["normalized_minimax"] == pytest.approx(1.0)
    assert runner.report(GeneratorConfig("star", 16))["mixing"]["mixing_time"] == 2
    rep = runner.report(GeneratorConfig("poisson", 4, p=1.0, budget=1))
    assert rep["mixing"]["mixing_time"] == -1
    assert any("-1" in w for w in rep["warnings"])
    json.dumps(rep)


def test_family_template_names_and_configs():
    tpl = FamilyTemplate("poisson", "k_logn(1)", (("p", 0.2),))
    assert tpl.name == "poisson(p=0.2)@k_logn(1)"
    assert tpl.config(1024, 3).budget == 10
    assert FamilyTemplate("fs", "k_logn(4)").config(256, 0).expander_degree == 32
    assert FamilyTemplate.from_dict(tpl.to_dict()) == tpl


def test_family_template_errors():
    with pytest.raises(ParseError) as info:
        FamilyTemplate.from_dict({"family": "line", "bogus": 1}, where="families[2]")
    assert info.value.key == "families[2].bogus"


def test_sweep_covers_every_point_and_sorts():
    recs = runner.sweep(_spec())
    names = {t.name for t in runner.default_families()}
    got = {(r.family, r.n, r.seed) for r in recs}
    assert got == {(f, n, s) for f in names for n in SMALL["sizes"] for s in (0, 1)}
    keys = [(r.family, r.n, r.seed) for r in recs]
    assert keys == sorted(keys)
    for r in recs:
        assert r.wall_time_ms is None


def test_sweep_fc_and_line_columns():
    recs = runner.sweep(_spec(sizes=(16, 32, 64, 128), seeds_per_point=1,
                              families=[FamilyTemplate("fully_connected"), FamilyTemplate("line")]))
    line = [r.normalized_minimax for r in recs if r.family == "line"]
    assert all(b > a for a, b in zip(line, line[1:]))
    for r in recs:
        if r.family == "fully_connected":
            assert r.mixing_time <= 2 + 2 * math.log2(r.n)


def test_sweep_byte_identical(tmp_path):
    spec = _spec(sizes=(16, 32))
    a = runner.write_sweep(runner.sweep(spec), tmp_path / "a")
    b = runner.write_sweep(runner.sweep(spec), tmp_path / "b")
    for x, y in zip(a, b):
        assert x.read_bytes() == y.read_bytes()


def test_sweep_parallel_matches_serial():
    spec = _spec(sizes=(16, 32))
    par = _spec(sizes=(16, 32), workers=2)
    assert runner.records_to_csv(runner.sweep(spec)) == runner.records_to_csv(runner.sweep(par))


def test_summary_is_order_independent():
    recs = runner.sweep(_spec(sizes=(16, 32), seeds_per_point=3))
    assert runner.summarize(recs) == runner.summarize(list(reversed(recs)))


def test_summary_not_mixed_median():
    mk = lambda seed, t: SweepRecord("x", seed, 8, 1, t, "missmass", 0.1, 0.8, 0, 1, 10, None)
    rows = runner.summarize([mk(0, -1), mk(1, -1), mk(2, 4)])
    assert rows[0]["median_mixing_time"] == -1
    rows = runner.summarize([mk(0, -1), mk(1, 3), mk(2, 4)])
    assert rows[0]["median_mixing_time"] == 4


def test_records_csv_round_trip(tmp_path):
    recs = runner.sweep(_spec(sizes=(16, 32), seeds_per_point=1))
    path = tmp_path / "s.csv"
    path.write_text(runner.records_to_csv(recs))
    assert runner.read_records(path) == recs


def test_fit_scaling_exact_power_laws():
    spec = _spec(sizes=(64, 128, 256, 512), seeds_per_point=1,
                 families=[FamilyTemplate("fully_connected"), FamilyTemplate("line")])
    fits = {f.family: f for f in runner.fit_scaling(runner.sweep(spec), skip_insufficient=True)}
    assert fits["fully_connected"].slope == pytest.approx(-1.0, abs=1e-9)
    assert fits["line"].slope == pytest.approx(-0.5, abs=0.05)
    assert fits["fully_connected"].r_squared > 0.999


def test_fit_scaling_insufficient():
    recs = runner.sweep(_spec(sizes=(16, 32), seeds_per_point=1, families=[FamilyTemplate("line")]))
    with pytest.raises(InsufficientData):
        runner.fit_scaling(recs)
    assert runner.fit_scaling(recs, skip_insufficient=True) == []


def test_gallery_files(tmp_path):
    entries = [{"family": "fully_connected", "n": 8}, {"family": "fs", "n": 32, "label": "fsx"}]
    paths = runner.gallery(entries, tmp_path, seed=4)
    assert [p.name for p in paths] == ["fully_connected_n8_seed4.pgm", "fsx_n32_seed4.pgm"]
    again = runner.gallery(entries, tmp_path / "b", seed=4)
    assert [p.read_bytes() for p in paths] == [p.read_bytes() for p in again]


def test_parse_config_precedence(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"family": "line", "n": 64}))
    assert runner.parse_config(path).n == 64
    assert runner.parse_config(path, {"n": 32}).n == 32
    path.write_text(json.dumps({"family": "warp"}))
    with pytest.raises(ParseError) as info:
        runner.parse_config(path)
    assert info.value.key == "family"


def test_parse_sweep_config(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"sizes": [16, 32], "families": [{"family": "line"}], "nope": 1}))
    with pytest.raises(ParseError) as info:
        runner.parse_config(path, kind="sweep")
    assert info.value.key == "nope"
    path.write_text(json.dumps({"sizes": [32, 16]}))
    with pytest.raises(ParseError):
        runner.parse_config(path, kind="sweep")


def test_run_checks_all_pass():
    verdicts = runner.run_checks()
    assert verdicts and all(v["pass"] for v in verdicts), [v for v in verdicts if not v["pass"]]


# -- CLI -------------------------------------------------------------------------

def test_cli_report(tmp_path, capsys):
    assert cli.main(["report", "--family", "star", "--n", "16"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["mixing"]["mixing_time"] == 2
    assert cli.main(["report", "--family", "line", "--n", "8", "--out", str(tmp_path), "--trace-csv"]) == 0
    assert (tmp_path / "report.json").exists() and (tmp_path / "mixing_trace.csv").exists()


def test_cli_flag_over_config(tmp_path, capsys):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"family": "line", "n": 64}))
    assert cli.main(["report", "--config", str(path), "--n", "32"]) == 0
    assert json.loads(capsys.readouterr().out)["n"] == 32


def test_cli_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"family": "warp"}))
    assert cli.main(["report", "--config", str(bad)]) == 3
    bad.write_text("{not json")
    assert cli.main(["report", "--config", str(bad)]) == 3
    with pytest.raises(SystemExit) as info:
        cli.main(["report", "--convention", "l2"])
    assert info.value.code == 3
    assert cli.main(["report", "--family", "erdos_renyi", "--n", "64", "--budget", "2", "--strict"]) == 2
    assert cli.main(["report", "--family", "oriented_expander", "--n", "8", "--expander-degree", "0"]) == 2


def test_cli_sweep_fit_gallery_check(tmp_path):
    out = tmp_path / "sw"
    assert cli.main(["sweep", "--sizes", "16,32,64", "--seeds-per-point", "1", "--out", str(out)]) == 0
    assert (out / "sweep.csv").exists() and (out / "summary.csv").exists()
    assert cli.main(["fit", "--records", str(out / "sweep.csv"), "--out", str(out)]) == 0
    assert (out / "fits.csv").read_text().startswith("family,budget_schedule,slope")
    assert cli.main(["gallery", "--out", str(tmp_path / "g")]) == 0
    assert len(list((tmp_path / "g").glob("*.pgm"))) == len(runner.default_gallery())
    assert cli.main(["check", "--out", str(tmp_path / "c")]) == 0
    assert cli.main(["sweep", "--sizes", "16,x"]) == 3
