import json
import subprocess
import sys

import pytest

from sgcalc import cli
from sgcalc.errors import ConfigError

FAST = {"level": 2, "heat_level": 3, "gap_level": 3, "lemma_levels": [2],
        "cz_levels": [1, 2], "cz_radii": [0.125, 1.0], "t_grid": [1.0],
        "hormander_h": 1 / 32, "hormander_h_min": 1 / 64, "starts": 2,
        "reference_cone": {"c": 1.0, "d": 1.0, "gamma": 1.0, "sigma": 0.45}}


def write_config(path, **extra):
    path.write_text(json.dumps({**FAST, **extra}))
    return str(path)


def run(tmp_path, command, name="out", **extra):
    out = tmp_path / name
    cfg = write_config(tmp_path / f"{name}.json", **extra)
    code = cli.main([command, "--config", cfg, "--out", str(out)])
    return code, out


def test_defaults_validate():
    cfg = cli.load_config()
    assert cfg.gamma == pytest.approx(5**0.5)
    assert len(cfg.times()) == 9


@pytest.mark.parametrize("bad", [
    {"level": 9}, {"level": -1}, {"level": 2.5}, {"riesz": {"a": 1, "b": 1, "c": 0, "d": 1}},
    {"p_list": [1.0]}, {"s": 0}, {"boundary_condition": "robin"}, {"cutoff": {"sigma": -1}},
    {"t_grid": []}, {"seeds": [-1]}, {"mystery": 1}, {"hormander_h_min": 1.0},
])
def test_config_rejected(bad):
    with pytest.raises(ConfigError):
        cli.load_config(overrides=bad)


def test_bad_config_exit_code(tmp_path, capsys):
    code, _ = run(tmp_path, "gaps", level=99)
    assert code == cli.EXIT_CONFIG
    assert "config error" in capsys.readouterr().err
    (tmp_path / "broken.json").write_text("{not json")
    assert cli.main(["gaps", "--config", str(tmp_path / "broken.json")]) == cli.EXIT_CONFIG


def test_bad_command_exit_code():
    assert cli.main(["nonsense"]) == cli.EXIT_CONFIG
    assert cli.main(["--version"]) == cli.EXIT_OK


def test_level_flag_mapping():
    assert cli._level_override("gaps", 4) == {"gap_level": 4}
    assert cli._level_override("heat", 4) == {"heat_level": 4}
    assert cli._level_override("riesz", 4) == {"level": 4}
    assert cli._level_override("riesz", None) == {}


def test_gaps_summary_schema(tmp_path):
    code, out = run(tmp_path, "gaps")
    assert code == 0
    summary = json.loads((out / "summary_gaps.json").read_text())
    assert {"schema_version", "tool", "version", "command", "created", "config", "conventions",
            "decimation_constants", "results", "tables", "plots", "runtimes_s"} <= set(summary)
    assert summary["schema_version"] == cli.SCHEMA_VERSION
    dc = summary["decimation_constants"]
    assert dc["alpha"] == pytest.approx(2.0611, abs=5e-4)
    assert dc["alpha"] * dc["beta"] == pytest.approx(5.0, rel=1e-12)
    for name in summary["tables"].values():
        assert (out / name).exists()
    assert all("operation" in r and "parameters" in r for r in summary["results"])


def test_riesz_reruns_byte_identical(tmp_path):
    code1, a = run(tmp_path, "riesz", "a")
    code2, b = run(tmp_path, "riesz", "b")
    assert code1 == code2 == 0
    for csv in sorted(a.glob("*.csv")):
        assert csv.read_bytes() == (b / csv.name).read_bytes(), csv.name


def test_riesz_singular_rows(tmp_path):
    with pytest.warns(RuntimeWarning, match="ratio gap"):
        code, out = run(tmp_path, "riesz", riesz={"a": 1, "b": 1, "c": 1, "d": 1})
    assert code == 0
    lines = (out / "riesz_norms.csv").read_text().splitlines()
    header = lines[0].split(",")
    status = header.index("status")
    rows = [line.split(",") for line in lines[1:]]
    assert {r[status] for r in rows if r[1] in ("F1", "F2")} == {"singular"}
    assert {r[status] for r in rows if r[1] == "one"} == {"ok"}


def test_hormander_rows(tmp_path):
    code, out = run(tmp_path, "hormander", svg=True)
    assert code == 0
    summary = json.loads((out / "summary_hormander.json").read_text())
    rows = {(r["parameters"]["family"], r["parameters"]["symbol"]): r
            for r in summary["results"] if r["operation"] == "hormander_sup"}
    assert rows[("configured", "raw_F1")]["status"] == "singular"
    assert rows[("configured", "cutoff_F1")]["status"] == "under_resolved"
    cz = [r for r in summary["results"] if r["operation"] == "cz_truncation_integral"]
    assert len(cz) == 2 and all(r["sup"] is not None for r in cz)
    assert (out / "cz_truncation.svg").read_text().startswith("<svg")


def test_heat_command(tmp_path):
    code, out = run(tmp_path, "heat")
    assert code == 0
    summary = json.loads((out / "summary_heat.json").read_text())
    ops = {r["operation"] for r in summary["results"]}
    assert {"gaussian_fit", "doubling_check"} <= ops


def test_module_entry_point(tmp_path):
    cfg = write_config(tmp_path / "c.json")
    proc = subprocess.run([sys.executable, "-m", "sgcalc", "gaps", "--config", cfg,
                           "--out", str(tmp_path / "m")], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.strip().endswith("summary_gaps.json")
