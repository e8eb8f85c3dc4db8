import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from geotri import cli, files, tutte
from geotri import triangulation as tri


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert cli.main(["base", "--out", str(d / "base")]) == 0
    assert cli.main(["balance", "--out", str(d / "bal")]) == 0
    assert cli.main(["perturb", str(d / "bal" / "mapping.json"), "--seed", "1", "--out", str(d / "p1")]) == 0
    assert cli.main(["perturb", str(d / "bal" / "mapping.json"), "--seed", "2", "--out", str(d / "p2")]) == 0
    return d


def test_surface(capsys):
    code, out, _ = run(capsys, "surface")
    assert code == cli.OK
    assert out.startswith("R=2.4485")
    assert out.count(" ok") == 4


def test_surface_impossible_tolerance(capsys):
    code, _, err = run(capsys, "surface", "--tol", "1e-30")
    assert code == cli.DIAGNOSTIC
    assert "relation" in err


def test_base_file(workdir):
    phi = files.read_mapping(workdir / "base" / "mapping.json")
    assert phi.surface.n_vertices == 46 and len(phi.surface.faces) == 96


def test_balance_outputs_and_determinism(capsys, tmp_path, workdir):
    code, out, _ = run(capsys, "balance", "--out", tmp_path)
    assert code == 0 and out.startswith("converged")
    for name in ("mapping.json", "iterations.csv"):
        assert (tmp_path / name).read_bytes() == (workdir / "bal" / name).read_bytes()
    rows = (tmp_path / "iterations.csv").read_text().splitlines()
    assert rows[0] == "iteration,residual,tau"
    assert float(rows[-1].split(",")[1]) < 1e-10


def test_balance_with_weight_file(capsys, tmp_path, workdir):
    S = files.read_mapping(workdir / "base" / "mapping.json").surface
    w = tutte.random_weights(S, np.random.default_rng(9))
    files.write_json(tmp_path / "w.json", "weights", files.weights_to_doc(S, w))
    code, _, _ = run(capsys, "balance", "--weights", tmp_path / "w.json", "--init", workdir / "p1" / "mapping.json", "--out", tmp_path)
    assert code == 0
    assert files.read_mapping(tmp_path / "mapping.json").surface.n_vertices == 46


def test_balance_random_weights_seeded(capsys, tmp_path):
    for sub in ("a", "b"):
        assert run(capsys, "balance", "--random-weights", "--seed", 5, "--out", tmp_path / sub)[0] == 0
    assert (tmp_path / "a" / "mapping.json").read_bytes() == (tmp_path / "b" / "mapping.json").read_bytes()


@pytest.mark.parametrize("content", ["{oops", '{"0->6": -1}', '{"0->6": 1.0}', "[]"])
def test_balance_bad_weights(capsys, tmp_path, content):
    (tmp_path / "w.json").write_text(content)
    code, _, err = run(capsys, "balance", "--weights", tmp_path / "w.json", "--out", tmp_path)
    assert code == cli.BAD_INPUT
    assert err.startswith("error:")
    assert not (tmp_path / "mapping.json").exists()


def test_balance_not_converged(capsys, tmp_path):
    code, _, _ = run(capsys, "balance", "--max-iters", 2, "--out", tmp_path)
    assert code == cli.NO_CONVERGENCE


def test_bad_mapping_file(capsys, tmp_path, workdir):
    doc = json.loads((workdir / "base" / "mapping.json").read_text())
    doc["deck"]["0->6"] = "a"
    (tmp_path / "m.json").write_text(json.dumps(doc))
    assert run(capsys, "roundtrip", tmp_path / "m.json", "--out", tmp_path)[0] == cli.BAD_INPUT


def test_roundtrip(capsys, tmp_path, workdir):
    code, out, _ = run(capsys, "roundtrip", workdir / "p1" / "mapping.json", "--init", workdir / "bal" / "mapping.json", "--out", tmp_path)
    assert code == 0
    d = json.loads((tmp_path / "roundtrip.json").read_text())["distance"]
    assert d < 1e-7
    assert out.startswith("distance=")


def test_morph(capsys, tmp_path, workdir):
    a, b = workdir / "p1" / "mapping.json", workdir / "p2" / "mapping.json"
    code, out, _ = run(capsys, "morph", a, b, "--samples", 6, "--out", tmp_path)
    assert code == 0 and "all_embedded=True" in out
    doc = json.loads((tmp_path / "morph.json").read_text())
    assert len(doc["samples"]) == 6 and all(s["embedded"] for s in doc["samples"])


def test_morph_with_itself(capsys, tmp_path, workdir):
    a = workdir / "p1" / "mapping.json"
    assert run(capsys, "morph", a, a, "--samples", 3, "--out", tmp_path)[0] == 0


def test_morph_needs_matching_deck_words(capsys, tmp_path, workdir):
    # deck words are compared literally, so a relifted copy is refused
    phi = tri.relift(files.read_mapping(workdir / "p1" / "mapping.json"), 0, "a")
    files.write_json(tmp_path / "r.json", "mapping", files.mapping_to_doc(phi))
    code, _, err = run(capsys, "morph", workdir / "p1" / "mapping.json", tmp_path / "r.json", "--samples", 3, "--out", tmp_path)
    assert code == cli.BAD_INPUT
    assert "homotopy class" in err


def test_degenerate(capsys, tmp_path, workdir):
    code, out, _ = run(capsys, "degenerate", workdir / "bal" / "mapping.json", "--vertex", 9, "--steps", 8, "--out", tmp_path)
    assert code == 0 and "first t" in out
    doc = json.loads((tmp_path / "degeneration.json").read_text())
    th = [w["theta_min"] for w in doc["waypoints"]]
    assert len(th) == 9 and all(t > 0 for t in th[:-1]) and th[-1] < 1e-3
    assert doc["seed"] == 0


def test_degenerate_bad_vertex(capsys, tmp_path, workdir):
    assert run(capsys, "degenerate", workdir / "bal" / "mapping.json", "--vertex", 99, "--out", tmp_path)[0] == cli.BAD_INPUT


def test_weightlimit(capsys, tmp_path):
    code, out, _ = run(capsys, "weightlimit", "--levels", 4, "--out", tmp_path)
    assert code == 0 and "strictly_decreasing=True" in out
    rows = (tmp_path / "weightlimit.csv").read_text().splitlines()
    assert len(rows) == 5
    assert len(json.loads((tmp_path / "weightlimit.json").read_text())["rows"]) == 4


def test_weightlimit_bad_face(capsys, tmp_path):
    assert run(capsys, "weightlimit", "--face", "1,2,3", "--levels", 2, "--out", tmp_path)[0] == cli.BAD_INPUT
    assert run(capsys, "weightlimit", "--face", "x", "--levels", 2, "--out", tmp_path)[0] == cli.BAD_INPUT


def test_render(capsys, tmp_path, workdir):
    svg = tmp_path / "m.svg"
    assert run(capsys, "render", workdir / "bal" / "mapping.json", svg, "--ghosts")[0] == 0
    text = svg.read_text()
    root = ET.fromstring(text.split("\n", 1)[1])
    edges = [p for p in root.iter("{http://www.w3.org/2000/svg}path") if p.get("class") == "edge"]
    assert len(edges) == 144
    svg2 = tmp_path / "m2.svg"
    run(capsys, "render", workdir / "bal" / "mapping.json", svg2, "--ghosts")
    assert svg2.read_bytes() == svg.read_bytes()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "geotri", "surface"], capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert proc.stdout.startswith("R=2.4485")
