import json
import math
import subprocess
import sys

import pytest

from hypdet.cli import main
from hypdet.constants import constant_E


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def spectrum_file(tmp_path_factory, bolza8):
    from hypdet.spectrum import save_spectrum

    p = tmp_path_factory.mktemp("spec") / "bolza8.txt"
    save_spectrum(bolza8, p)
    return str(p)


def test_constants(capsys):
    code, out, err = run(capsys, "constants", "--digits", "6")
    assert code == 0 and err == ""
    values = dict(line.split("=") for line in out.split())
    assert values["E"] == f"{constant_E():.6f}" == "0.053810"
    code, out, _ = run(capsys, "constants", "--format", "json")
    assert json.loads(out)["schema_version"] == 1


def test_usage_errors(capsys):
    code, out, err = run(capsys, "bogus")
    assert code == 2 and out == "" and "usage" in err
    code, out, err = run(capsys, "det", "--volume", "1", "--eta", "1")
    assert code == 2 and out == ""
    assert json.loads(err.strip().splitlines()[-1])["error"] == "usage"
    code, _, _ = run(capsys, "constants", "--threads", "-1")
    assert code == 2
    code, _, _ = run(capsys, "cover", "vz", "--L", "7")
    assert code == 2


def test_domain_errors(capsys, spectrum_file):
    code, out, err = run(capsys, "det", "--spectrum", "/nonexistent", "--volume", "1", "--eta", "1")
    assert code == 1 and out == ""
    assert json.loads(err)["error"] == "DomainError"
    code, _, err = run(capsys, "spectrum", "--spectrum", spectrum_file, "--L", "9")
    assert code == 1 and len(err.strip().splitlines()) == 1


def test_enumerate_and_spectrum(capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code, out, _ = run(capsys, "enumerate", "--L", "6", "--out", "s6.txt")
    assert code == 0 and json.loads(out)["classes"] == 48
    assert sorted(p.name for p in tmp_path.iterdir()) == ["s6.txt"]
    code, out, _ = run(capsys, "spectrum", "--spectrum", "s6.txt", "--L", "3.5,6")
    lines = out.splitlines()
    assert lines[0] == "L,N,N0,systole"
    assert lines[1].split(",")[:3] == ["3.5", "24", "24"]


def test_heat(capsys, spectrum_file):
    code, out, _ = run(capsys, "heat", "--spectrum", spectrum_file, "--t", "0.5", "2", "--format", "json")
    rows = json.loads(out)["rows"]
    assert code == 0 and [r["t"] for r in rows] == [0.5, 2.0]


def test_det_single_line_json(capsys, spectrum_file):
    code, out, err = run(capsys, "det", "--spectrum", spectrum_file, "--volume", repr(4 * math.pi), "--eta", "1")
    assert code == 0 and err == ""
    assert out.count("\n") == 1
    d = json.loads(out)
    assert d["schema_version"] == 1 and d["error"] < 0.5


def test_cover_commands(capsys, tmp_path, spectrum_file):
    code, out, _ = run(capsys, "cover", "sample", "--n", "3", "--seed", "4")
    hom = tmp_path / "h.json"
    hom.write_text(out)
    assert json.loads(out)["sampler_tag"] == "exhaustive"
    code, out, _ = run(capsys, "cover", "vz", "--spectrum", spectrum_file, "--hom", str(hom), "--L", "7")
    d = json.loads(out)
    assert code == 0 and abs(d["difference"]) < 1e-9
    code, out, _ = run(capsys, "cover", "lift", "--spectrum", spectrum_file, "--hom", str(hom), "--L", "7",
                       "--out", str(tmp_path / "c.txt"))
    assert code == 0 and (tmp_path / "c.txt").exists()
    code, out, _ = run(capsys, "cover", "fix-stats", "--n", "3", "--q", "2", "--samples", "200")
    assert code == 0 and json.loads(out)["divisor_target"] == 2
    code, _, _ = run(capsys, "cover", "fix-stats", "--word", "zz")
    assert code == 2


def test_bm_commands(capsys):
    code, out, _ = run(capsys, "bm", "census", "--n", "20", "--seed", "1")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "word,trace,length,count" and len(lines) == 11
    code, out, _ = run(capsys, "bm", "sample", "--n", "5", "--seed", "2")
    assert json.loads(out)["states"] == 60
    code, out, _ = run(capsys, "bm", "stats", "--n", "20", "--samples", "5")
    assert out.splitlines()[0] == "word,trace,length,mean,variance"


def test_experiment_run(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_grid": [1], "num_samples": 1, "L": 6.0}))
    out_dir = tmp_path / "out"
    code, out, _ = run(capsys, "experiment", "run", "--config", str(cfg), "--out", str(out_dir))
    assert code == 0
    assert sorted(p.name for p in out_dir.iterdir()) == ["manifest.json", "records.jsonl", "summary.csv"]
    cfg.write_text(json.dumps({"nonsense": 1}))
    code, _, _ = run(capsys, "experiment", "run", "--config", str(cfg), "--out", str(out_dir))
    assert code == 1


def test_entry_point_exit_codes():
    r = subprocess.run([sys.executable, "-m", "hypdet.cli", "bogus"], capture_output=True, text=True)
    assert r.returncode == 2 and r.stdout == ""
    r = subprocess.run([sys.executable, "-m", "hypdet.cli", "constants", "--digits", "6"], capture_output=True, text=True)
    assert r.returncode == 0 and "E=0.0538" in r.stdout
