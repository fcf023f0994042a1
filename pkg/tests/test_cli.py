import json
import subprocess
import sys

import pytest

from planarspec import __version__
from planarspec.cli import EXIT_CERT, EXIT_ERROR, EXIT_OK, main
from planarspec.fixtures import wheel
from planarspec.graph import RotationGraph


def _gen(tmp_path, name, *args):
    path = tmp_path / name
    assert main(["generate", *args, "-o", str(path)]) == EXIT_OK
    return path


def test_generate_roundtrip(tmp_path):
    path = _gen(tmp_path, "b.json", "tess", "--p", "3", "--q", "7", "--radius", "3")
    g = RotationGraph.from_json(path.read_text())
    assert g.n == 1 + 7 + 21 + 56


def test_generate_deterministic(tmp_path):
    a = _gen(tmp_path, "a.json", "growing", "--profile", "affine:6,1", "--radius", "4")
    b = _gen(tmp_path, "b.json", "growing", "--profile", "affine:6,1", "--radius", "4")
    assert a.read_bytes() == b.read_bytes()


def test_analyze(tmp_path):
    path = _gen(tmp_path, "b.json", "tess", "--radius", "5")
    out = tmp_path / "an"
    assert main(["analyze", str(path), "--hypothesis", "deg7", "-o", str(out)]) == EXIT_OK
    rep = json.loads((out / "analysis.json").read_text())
    assert rep["certificate"]["holds"] and rep["version"] == __version__
    assert (out / "curvature.csv").read_text().startswith("vertex,distance,degree,kappa")
    assert (out / "spheres.csv").read_text().startswith("r,S_r")


def test_surgery_commands(tmp_path):
    path = _gen(tmp_path, "b.json", "tess", "--radius", "6")
    for name in ("triangulate", "spanning-tree", "collapse", "complete"):
        out = tmp_path / name
        assert main(["surgery", name, str(path), "-o", str(out)]) == EXIT_OK
        assert json.loads((out / "summary.json").read_text())["config"]["name"] == name
        RotationGraph.from_json((out / "graph.json").read_text())


def test_copy_paste_prints_two(tmp_path, capsys):
    path = tmp_path / "w5.json"
    d = wheel(5).to_dict()
    d["marks"] = [1, 2, 4]
    path.write_text(json.dumps(d))
    assert main(["surgery", "copy-paste", str(path), "-o", str(tmp_path / "cp")]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "2"


def test_spectrum(tmp_path):
    path = _gen(tmp_path, "b.json", "tess", "--radius", "5")
    out = tmp_path / "sp"
    code = main(["spectrum", str(path), "--m", "10", "--hypothesis", "deg7", "--samples", "100",
                 "--compact", "--decay", "-o", str(out)])
    assert code == EXIT_OK
    cert = json.loads((out / "certificates.json").read_text())
    assert cert["C"] == 4 and cert["compact_support"] == []
    assert (out / "decay.csv").exists()
    assert len((out / "spectrum.csv").read_text().splitlines()) == 12


def test_spectrum_certificate_failure(tmp_path):
    path = _gen(tmp_path, "c.json", "counterexample", "--radius", "4")
    out = tmp_path / "sp"
    assert main(["spectrum", str(path), "--m", "5", "--C", "0", "--compact", "-o", str(out)]) == EXIT_CERT
    cert = json.loads((out / "certificates.json").read_text())
    assert any(f["exact_eigenvalue"] == "7" for f in cert["compact_support"])


def test_render(tmp_path):
    path = _gen(tmp_path, "c.json", "counterexample", "--radius", "3")
    svg = tmp_path / "c.svg"
    assert main(["render", str(path), "--highlight", "eigenfunction:7", "-o", str(svg)]) == EXIT_OK
    text = svg.read_text()
    assert f"planarspec {__version__}" in text and "#d62728" in text


def test_errors(tmp_path, capsys):
    assert main(["analyze", str(tmp_path / "missing.json")]) == EXIT_ERROR
    with pytest.raises(SystemExit) as exc:
        main(["generate", "nonsense"])
    assert exc.value.code == EXIT_ERROR
    path = _gen(tmp_path, "b.json", "tess", "--radius", "2")
    assert main(["surgery", "collapse", str(path), "-o", str(tmp_path / "x")]) == EXIT_ERROR
    assert "SphereTooSmall" in capsys.readouterr().err


def test_module_entry(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "planarspec.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and __version__ in proc.stdout
