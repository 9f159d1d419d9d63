import csv
import io
import json
from importlib import resources

import jsonschema
import pytest

from wtrace.cli import main
from wtrace.dsl import reference_text


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture
def ref_file(tmp_path):
    path = tmp_path / "three_path.ifz"
    path.write_text(reference_text(), encoding="utf-8")
    return path


@pytest.fixture(scope="module")
def schema():
    text = resources.files("wtrace.data").joinpath("output.schema.json").read_text()
    return json.loads(text)


def test_simulate_preset(capsys):
    code, out, _ = run(capsys, "simulate", "--preset", "three-path", "--eps", "0.1")
    assert code == 0
    table = {r["exit"]: r for r in rows(out)}
    assert float(table["III"]["probability"]) == pytest.approx(0.1 + 0.7 / 9, abs=1e-15)
    assert float(table["III"]["conclusive_A"]) == pytest.approx(0.1 / 3, abs=1e-15)


def test_simulate_file_matches_preset(capsys, ref_file):
    _, from_file, _ = run(capsys, "simulate", "--file", str(ref_file), "--eps", "0.1", "--beta", "pi/2")
    _, preset, _ = run(capsys, "simulate", "--eps", "0.1", "--beta", "pi/2")
    assert rows(from_file) == rows(preset)


def test_malformed_file(capsys, tmp_path):
    bad = tmp_path / "bad.ifz"
    bad.write_text("modes 3\nsource 0\nbs 0 1 R=?\n")
    code, out, err = run(capsys, "simulate", "--file", str(bad))
    assert code == 1 and out == ""
    assert "line 3, col 10" in err


def test_eps_out_of_range(capsys):
    code, out, err = run(capsys, "simulate", "--eps", "0.5")
    assert code == 2 and out == ""
    assert "1/3" in err


def test_self_check(capsys, monkeypatch):
    code, out, _ = run(capsys, "simulate", "--check", "--alpha", "1", "--gamma=-pi/3",
                       "--R4", "0.7", "--eps", "0.2", "--format", "json")
    assert code == 0
    assert json.loads(out)["meta"]["check"] == "pass"
    monkeypatch.setenv("WTRACE_TOLERANCE", "-1")
    code, out, err = run(capsys, "simulate", "--check")
    assert code == 3 and out == "" and "self-check" in err


def test_weak_values_fig2(capsys):
    code, out, _ = run(capsys, "weak-values", "--R4", "1")
    assert code == 0
    got = {r["checkpoint"]: (float(r["re"]), float(r["im"])) for r in rows(out)}
    assert got["A"] == (0, 0) and got["B"] == (0, 0) and got["C"] == (1, 0)


def test_weak_values_sum(capsys):
    _, out, _ = run(capsys, "weak-values", "--R4", "1/3")
    got = [r for r in rows(out) if r["checkpoint"] != "overlap"]
    assert sum(float(r["re"]) for r in got) == pytest.approx(1, abs=1e-10)


def test_weak_values_orthogonal(capsys):
    code, out, err = run(capsys, "weak-values", "--R4", "0")
    assert code == 2 and out == "" and "OrthogonalSelection" in err


def test_sweep_csv(capsys):
    code, out, _ = run(capsys, "sweep", "--param", "gamma", "--grid", "0:2pi:64",
                       "--metric", "detection_probability", "--R4", "1/2")
    assert code == 0
    header = out.splitlines()[0].split(",")
    assert header[:2] == ["gamma", "detection_probability"]
    values = [float(r["detection_probability"]) for r in rows(out)]
    assert len(values) == 64 and max(values) - min(values) <= 1e-12


def test_sweep_unknown_metric(capsys):
    code, out, err = run(capsys, "sweep", "--param", "gamma", "--grid", "0,1", "--metric", "nope")
    assert code == 2 and out == ""
    assert "detection_probability" in err and "fringe_coefficient" in err


@pytest.mark.parametrize("argv", [
    ["sweep", "--param", "delta", "--grid", "0:2pi:16", "--metric", "detection_probability"],
    ["sweep", "--param", "R4", "--grid", "0,1/3,1/2,1", "--metric", "fringe_coefficient"],
    ["simulate", "--eps", "0.05"],
    ["weak-values", "--R4", "0.4", "--alpha", "1"],
    ["scenario", "retrocausation", "--eps", "1e-4"],
    ["scenario", "figure-weights", "--R4", "1"],
])
def test_json_matches_schema(capsys, schema, argv):
    code, out, _ = run(capsys, *argv, "--format", "json")
    assert code == 0
    jsonschema.validate(json.loads(out), schema)


def test_scenarios(capsys):
    code, out, _ = run(capsys, "scenario", "retrocausation", "--eps", "1e-6")
    assert code == 0
    table = rows(out)
    assert [r["R4"] for r in table] == ["1/3", "1"]
    assert all(r["method"] == "accounting" for r in table)
    code, out, _ = run(capsys, "scenario", "figure-weights", "--R4", "1")
    weights = {r["link"]: float(r["backward"]) for r in rows(out)}
    assert weights["BS2-A"] == 0 and weights["BS2-B"] == 0
    code, out, err = run(capsys, "scenario", "fig3")
    assert code == 2 and out == ""


def test_parse_subcommand(capsys, ref_file, tmp_path):
    code, out, _ = run(capsys, "parse", "--file", str(ref_file))
    assert code == 0 and out.startswith("modes 3\n") and "#" not in out
    target = tmp_path / "canon.ifz"
    code, out, _ = run(capsys, "parse", "--file", str(ref_file), "--out", str(target))
    assert code == 0 and out == ""
    assert target.read_text().startswith("modes 3\n")


def test_usage_errors(capsys, ref_file):
    code, out, _ = run(capsys, "simulate", "--alpha", "banana")
    assert code == 2 and out == ""
    code, out, _ = run(capsys, "simulate", "--file", str(ref_file), "--preset", "three-path")
    assert code == 2 and out == ""
    code, out, _ = run(capsys, "simulate", "--file", "/nonexistent.ifz")
    assert code == 2 and out == ""


def test_incoherence_sweep(capsys):
    code, out, _ = run(capsys, "sweep", "--param", "beta", "--grid", "0,pi/2",
                       "--metric", "incoherence_variation", "--R4", "0.5")
    assert code == 0
    v = [float(r["incoherence_variation"]) for r in rows(out)]
    assert v[0] <= 1e-12 and v[1] > 0.1
