import csv
import json
import xml.etree.ElementTree as ET

import pytest

from biharm import cli
from biharm.cli import ConfigError, RunConfig, format_config, main, parse_config


def write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_defaults_and_comments():
    cfg = parse_config("# a comment\n\ncase = polynomial   # trailing\nk=2\n")
    assert cfg.case == "polynomial" and cfg.k == 2
    assert cfg.n_min == RunConfig().n_min
    assert cfg.format == ("csv", "json", "svg")


def test_round_trip():
    cfg = parse_config("case = nonhomogeneous\ntol = 1e-12\nformat = svg, csv\nn_levels = 3\n")
    again = parse_config(format_config(cfg))
    assert again == cfg
    text = format_config(RunConfig())
    for key in ("command", "case", "k", "n_min", "n_levels", "method", "tol", "diagonal", "out", "format"):
        assert f"{key} = " in text


@pytest.mark.parametrize("text, key", [
    ("k = 3", "k"),
    ("k = two", "k"),
    ("n_min = 1", "n_min"),
    ("n_levels = 0", "n_levels"),
    ("n_levels = 9", "n_levels"),
    ("method = lu", "method"),
    ("tol = -1", "tol"),
    ("format = png", "format"),
    ("case = circle", "case"),
    ("diagonal = up", "diagonal"),
    ("colour = red", "colour"),
    ("justtext", "justtext"),
])
def test_invalid_key_named(text, key):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.key == key
    assert repr(key) in str(info.value)


def test_invalid_k_exit_code(tmp_path, capsys):
    assert main(["solve", "--config", write(tmp_path, "k = 3\n")]) == 2
    assert "'k'" in capsys.readouterr().err


def test_missing_config(tmp_path):
    assert main(["solve", "--config", str(tmp_path / "none.cfg")]) == 2


def test_usage_errors():
    assert main([]) == 2
    assert main(["explode", "--config", "x"]) == 2
    assert main(["solve"]) == 2


def test_solve_writes_fields(tmp_path, capsys):
    cfg = write(tmp_path, "case = homogeneous\nk = 1\nn_min = 8\n")
    out = tmp_path / "out"
    assert main(["solve", "--config", cfg, "--out", str(out)]) == 0
    for name in ("u", "phi", "p"):
        with open(out / f"{name}.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["x", "y", "value"]
        assert len(rows) == 82
    printed = capsys.readouterr().out
    residuals = [float(line.split(":")[1]) for line in printed.splitlines() if line.startswith("residual")]
    assert len(residuals) == 3 and max(residuals) < 1e-9


def test_solve_cg(tmp_path):
    cfg = write(tmp_path, "n_min = 4\nmethod = cg\ntol = 1e-12\nk = 2\n")
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "o")]) == 0


@pytest.mark.parametrize("case", ["homogeneous", "nonhomogeneous"])
def test_convergence_k1(tmp_path, case):
    cfg = write(tmp_path, f"case = {case}\nk = 1\nn_min = 8\nn_levels = 4\nout = {tmp_path / 'r'}\n")
    assert main(["convergence", "--config", cfg]) == 0
    data = json.loads((tmp_path / "r" / "convergence.json").read_text())
    assert abs(data["rows"][-1]["rate_energy"] - 1.0) <= 0.3
    assert data["rows"][-1]["rate_energy"] >= 0.85
    ET.fromstring((tmp_path / "r" / "convergence.svg").read_bytes())
    assert (tmp_path / "r" / "convergence.csv").exists()


def test_convergence_single_level(tmp_path):
    cfg = write(tmp_path, "n_levels = 1\nn_min = 4\n")
    out = tmp_path / "r"
    assert main(["convergence", "--config", cfg, "--out", str(out), "--format", "csv"]) == 0
    assert "rate_energy" not in (out / "convergence.csv").read_text().splitlines()[0]
    assert not (out / "convergence.json").exists()


def test_convergence_rate_miss_exit_1(tmp_path):
    # k=2 multipliers are first order only, so the k - 0.15 target is missed
    cfg = write(tmp_path, "k = 2\nn_min = 8\nn_levels = 3\n")
    assert main(["convergence", "--config", cfg, "--out", str(tmp_path / "r")]) == 1


def test_compare_bc(tmp_path):
    cfg = write(tmp_path, "case = nonhomogeneous\nn_min = 8\nn_levels = 4\n")
    out = tmp_path / "c"
    assert main(["compare-bc", "--config", cfg, "--out", str(out)]) == 0
    data = json.loads((out / "compare.json").read_text())
    last = data["rows"][-1]
    assert last["rate_weak"] >= last["rate_strong"] - 0.1
    assert all(r["dofs"] > 0 for r in data["rows"])
    root = ET.fromstring((out / "compare.svg").read_bytes())
    assert len(root.findall("{http://www.w3.org/2000/svg}polyline")) == 2


def test_format_override_validated(tmp_path):
    cfg = write(tmp_path, "n_min = 2\n")
    assert main(["solve", "--config", cfg, "--format", "pdf"]) == 2


def test_threads_env(monkeypatch):
    monkeypatch.setenv("BIHARM_THREADS", "3")
    assert cli._threads() == 3
    monkeypatch.setenv("BIHARM_THREADS", "junk")
    assert cli._threads() == 1
    monkeypatch.delenv("BIHARM_THREADS")
    assert cli._threads() == 1
