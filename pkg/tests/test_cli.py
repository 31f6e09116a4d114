import csv
import io
import json

import numpy as np
import pytest

from conewave.cli import child_rng, main


@pytest.fixture
def mats(tmp_path):
    out = {}
    for name, d in {"reg": [[3]], "bi": [[0, 3], [2, 0]], "bad": [[0, 3], [0, 3]]}.items():
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps({"k": len(d), "d": d}))
        out[name] = str(p)
    return out


def test_validate(mats, tmp_path, capsys):
    assert main(["validate", "--degree-matrix", mats["bi"]]) == 0
    assert json.loads(capsys.readouterr().out)["valid"]
    out = tmp_path / "v.json"
    assert main(["validate", "--degree-matrix", mats["bad"], "--out", str(out)]) == 2
    rep = json.loads(out.read_text())
    assert rep["violations"][0]["condition"] == 1


def test_missing_file(capsys):
    assert main(["validate", "--degree-matrix", "/nonexistent.json"]) == 2


def test_density_csv(mats, capsys):
    assert main(["density", "--degree-matrix", mats["reg"], "--lambda-min", "-1", "--lambda-max", "1", "--step", "0.5"]) == 0
    cap = capsys.readouterr()
    rows = list(csv.DictReader(io.StringIO(cap.out)))
    assert [float(r["lambda"]) for r in rows] == [-1, -0.5, 0, 0.5, 1]
    assert abs(float(rows[2]["im_m"]) - np.sqrt(2) / 3) < 1e-10
    assert json.loads(cap.err)["suspects"] == []


def test_density_json(mats, tmp_path):
    out = tmp_path / "d.json"
    assert main(["density", "--degree-matrix", mats["bi"], "--format", "json", "--step", "0.5", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["suspects"] == [0.0]


def test_compare(mats, tmp_path):
    out = tmp_path / "c.json"
    dump = tmp_path / "dump"
    args = ["compare", "--degree-matrix", mats["bi"], "--lambda", "1", "--n", "200", "--roots", "60", "--eps", "0.1"]
    assert main(args + ["--out", str(out), "--dump", str(dump)]) == 0
    data = json.loads(out.read_text())
    assert 0 <= data["xi"]["value"] <= 1
    assert (dump / "labeling.csv").exists()


def test_compare_infeasible(mats):
    assert main(["compare", "--degree-matrix", mats["bi"], "--lambda", "1", "--n", "7"]) == 2


def test_compare_exceptional_energy(mats):
    assert main(["compare", "--degree-matrix", mats["bi"], "--lambda", "0", "--n", "200", "--eps", "0.2"]) == 2


def test_entropy_sweep(mats, capsys):
    assert main(["entropy", "--degree-matrix", mats["reg"], "--lambda", "1", "--k", "1", "--eta", "0.1", "--eta", "0.01"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert len(rows) == 4 and rows[0].keys() == {"eta", "k", "delta"}


def test_child_rng_reproducible():
    a = child_rng(1, "graph").standard_normal(3)
    assert np.array_equal(a, child_rng(1, "graph").standard_normal(3))
    assert not np.array_equal(a, child_rng(1, "roots").standard_normal(3))
