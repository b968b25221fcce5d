import csv
import json
from pathlib import Path

import pytest

from cubicderiv.cli import main
from cubicderiv.scenario import builtin_scenario, execute, resolve_config, strip_timestamp

GOLDEN = Path(__file__).parent / "golden"
CONFIGS = Path(__file__).parent.parent / "configs"


def load(path):
    return json.loads(Path(path).read_text())


def test_triangular_exact_matches_golden(tmp_path):
    assert main(["certify", "--scenario", "triangular-exact", "--out", str(tmp_path)]) == 0
    got = strip_timestamp(load(tmp_path / "triangular-exact.certify.json"))
    assert got == load(GOLDEN / "triangular-exact.certify.json")
    for cert in got["certificates"]:
        assert all(row["deviation"] == 0 for row in cert["table"])


def test_power_scenario_passes_with_positive_margins(tmp_path):
    assert main(["certify", "--config", str(CONFIGS / "power-r1-eps0.1.json"), "--out", str(tmp_path)]) == 0
    rep = load(tmp_path / "power-r1-eps0.1.certify.json")
    assert rep["status"] == "pass"
    assert all(c["min_margin"] > 0 for c in rep["certificates"])
    assert rep["config"]["perturbation"]["seed"] == 11
    with open(tmp_path / "power-r1-eps0.1.power-corollary.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["probe_id", "norm_a", "deviation", "bound", "margin"]


def test_exponent_three_is_a_config_error(tmp_path, capsys):
    raw = load(CONFIGS / "power-r1-eps0.1.json")
    raw["control"]["r"] = 3
    cfg = tmp_path / "r3.json"
    cfg.write_text(json.dumps(raw))
    assert main(["certify", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "control.r" in err and "diverges" in err


def test_missing_seed_names_the_path(tmp_path, capsys):
    raw = load(CONFIGS / "power-r1-eps0.1.json")
    del raw["probes"]["seed"]
    cfg = tmp_path / "noseed.json"
    cfg.write_text(json.dumps(raw))
    assert main(["recover", "--config", str(cfg)]) == 2
    assert "probes.seed" in capsys.readouterr().err


def test_engine_mismatch_is_a_config_error():
    raw = builtin_scenario("power-r4-eps0.1")
    raw["engine"] = "forward"
    with pytest.raises(Exception, match="engine"):
        resolve_config(raw)


def test_validate_perturbed_structure(tmp_path, capsys):
    assert main(["validate", "--config", str(CONFIGS / "bent-mat2.json"), "--out", str(tmp_path)]) == 1
    assert "associativity defect" in capsys.readouterr().err
    rep = load(tmp_path / "bent-mat2.validate.json")
    assert rep["validation"]["algebra"]["associativity_defect"] > 1e-10


def test_superstability_command(tmp_path, capsys):
    assert main(["superstability", "--config", str(CONFIGS / "scalar-superstability.json"),
                 "--out", str(tmp_path)]) == 1
    rep = load(tmp_path / "scalar-linear.superstability.json")
    assert abs(rep["certificates"][0]["witness"]["defect"] - 0.6) <= 1e-12
    assert main(["superstability", "--scenario", "superstable-exact", "--out", str(tmp_path)]) == 0
    assert "f itself is a cubic derivation" in capsys.readouterr().out


def test_recover_and_fixed_point(tmp_path):
    assert main(["recover", "--scenario", "power-r4-eps0.03", "--out", str(tmp_path)]) == 0
    rep = load(tmp_path / "power-r4-eps0.03.recover.json")
    assert rep["recovery"]["engine"] == "backward" and rep["recovery"]["verdicts"]["tails_sound"]
    assert main(["certify", "--config", str(CONFIGS / "fixed-point-r1.json"), "--out", str(tmp_path)]) == 0
    rep = load(tmp_path / "fixed-point-r1.certify.json")
    assert {c["family"] for c in rep["certificates"]} == {"stability", "fixed-point"}


def test_example_triangular(capsys, tmp_path):
    assert main(["example-triangular", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "reproduced" in out and "pairing oracle" in out


def test_format_selection(tmp_path):
    main(["certify", "--scenario", "triangular-exact", "--out", str(tmp_path), "--format", "csv"])
    assert sorted(p.suffix for p in tmp_path.iterdir()) == [".csv", ".csv"]
    assert main(["certify", "--scenario", "triangular-exact", "--format", "xml"]) == 2


def test_reports_are_byte_identical(tmp_path):
    for d in ("a", "b"):
        main(["certify", "--scenario", "power-r2-eps0.03", "--out", str(tmp_path / d)])
    for p in (tmp_path / "a").iterdir():
        a = [ln for ln in p.read_text().splitlines() if '"timestamp"' not in ln]
        b = [ln for ln in (tmp_path / "b" / p.name).read_text().splitlines() if '"timestamp"' not in ln]
        assert a == b


def test_sweep_grid(tmp_path, capsys):
    assert main(["sweep", "--out", str(tmp_path), "--format", "csv"]) == 0
    with open(tmp_path / "sweep.margins.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 15 and all(r["status"] == "pass" for r in rows)
    assert "15/15 scenarios pass" in capsys.readouterr().out


def test_execute_reports_hypothesis_failure():
    raw = builtin_scenario("scalar-linear")
    out = execute(resolve_config(raw), "certify")
    assert out.exit_code == 2 and out.report["error"]["path"] == "control"
