import json
import subprocess
import sys

import pytest

from nambu_graphs.catalogue import read_catalogue, sunflower, write_catalogue
from nambu_graphs.cli import main
from nambu_graphs.dimshift import kontsevich_expand
from nambu_graphs.experiments import ExperimentReport, load_pinned


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_eval_no10_reports_zero(capsys):
    code, out, _ = run(capsys, "eval", "no10")
    assert code == 0 and out.strip() == "ZERO polynomial"


def test_eval_json_schema(capsys):
    code, out, _ = run(capsys, "eval", "bracket", "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert set(doc) == {"d", "m", "n", "terms"}
    assert len(doc["terms"]) == 6
    assert set(doc["terms"][0]) == {"coeff", "rho", "casimirs", "sinks"}


def test_invalid_encoding_exit_code(capsys):
    code, _, err = run(capsys, "eval", "(0,9,4;1,6,5;4,5,6)")
    assert code == 2 and "out of range" in err
    code, _, err = run(capsys, "vanishes", "(0,1,0)")
    assert code == 2 and "missing own Casimir" in err


def test_one_based_builtin_equivalent(capsys):
    _, a, _ = run(capsys, "vanishes", "(1,2,3,5;3,4,5,6)", "--d", "4", "--m", "0", "--one-based")
    _, b, _ = run(capsys, "vanishes", "h9")
    assert a.strip() == b.strip() == "true"


def test_descend_and_embed(capsys):
    code, out, _ = run(capsys, "descend", "no10", "--count-mode", "raw", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["count"] == 8 and doc["vanishing"] == 2
    assert sorted(r["tag"] for r in doc["descendants"] if r["vanishing"]) == ["c", "e"]
    _, out, _ = run(capsys, "embed", "a1")
    assert out.strip() == "(0,2,4,7;1,3,5,8;1,2,6,9)"


def test_aut_modes(capsys):
    _, out, _ = run(capsys, "aut", "no10", "--format", "json")
    assert json.loads(out)["order"] == 2
    _, out, _ = run(capsys, "aut", "no10", "--casimirs", "bound", "--format", "json")
    assert json.loads(out)["order"] == 1


def test_expand_writes_catalogue(tmp_path, capsys):
    path = tmp_path / "sun3.json"
    code, out, _ = run(capsys, "expand", "sunflower", "--d", "3", "--vanishing", "--out", str(path))
    assert code == 0 and "48 micro-graphs, 13 vanishing" in out
    manifest, gs = read_catalogue(path)
    assert manifest["count"] == 48 and manifest["countMode"] == "canonical" and manifest["d"] == 3
    assert len(manifest["vanishing"]) == 13 and len(gs) == 48


def test_catalogue_round_trip(tmp_path):
    gs = kontsevich_expand(sunflower(), 3)
    write_catalogue(tmp_path / "c.json", gs, "sunflower", "canonical", [])
    _, back = read_catalogue(tmp_path / "c.json")
    assert back == gs


def test_probe_command(capsys):
    code, out, _ = run(capsys, "probe", "a1", "--trials", "2", "--seed", "7")
    assert code == 0 and out.strip().endswith("AGREE")


def test_report_json_is_deterministic():
    rep = ExperimentReport("x", counts={"b": 1, "a": 2}, timings={"t": 0.5})
    rep.check("c", 1, 1)
    assert "timings" not in rep.to_json()
    assert json.loads(rep.to_json(include_timings=True))["timings"] == {"t": 0.5}
    assert rep.to_json() == ExperimentReport("x", counts={"a": 2, "b": 1}, checks=rep.checks).to_json()


def test_pinned_values_have_sources():
    for key, pin in load_pinned().items():
        assert set(pin) == {"value", "source"} and pin["source"]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "nambu_graphs", "embed", "no10"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "(0,1,4,7;1,6,5,8;4,5,6,9)"


@pytest.mark.parametrize("cmd", ["eval", "aut"])
def test_rejects_kontsevich_input(capsys, cmd):
    code, _, _ = run(capsys, cmd, "sunflower")
    assert code == 2
