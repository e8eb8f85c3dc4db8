import json
import re
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from geotri import files
from geotri import hypgeom as hg
from geotri import kernel as kn
from geotri import render
from geotri import tutte


def test_mapping_roundtrip_is_exact(base, tmp_path):
    path = tmp_path / "m.json"
    files.write_json(path, "mapping", files.mapping_to_doc(base, seed=4))
    again = files.read_mapping(path, base.group)
    assert np.array_equal(again.lifts, base.lifts)
    assert again.deck == base.deck
    assert np.array_equal(again.surface.faces, base.surface.faces)
    assert json.loads(path.read_text())["seed"] == 4


def test_dumps_is_deterministic(base):
    a = files.dumps(files.mapping_to_doc(base, seed=0))
    b = files.dumps(files.mapping_to_doc(base, seed=0))
    assert a == b and a.endswith("\n")


def _doc(base):
    return json.loads(files.dumps(files.mapping_to_doc(base)))


@pytest.mark.parametrize(
    "breakage",
    [
        lambda d: d.pop("deck"),
        lambda d: d["lifts"].pop(),
        lambda d: d["lifts"][0].append(1.0),
        lambda d: d["lifts"].__setitem__(0, [0.5, 0.0, 0.0]),
        lambda d: d["deck"].__setitem__("0->6", "xyz"),
        lambda d: d["deck"].__setitem__("0->6", "a"),
        lambda d: d["deck"].pop("0->6"),
        lambda d: d["complex"]["faces"].pop(),
        lambda d: d["complex"]["edges"].pop(),
        lambda d: d["complex"]["faces"][0].__setitem__(0, 999),
    ],
)
def test_mapping_reader_rejects(base, breakage):
    d = _doc(base)
    breakage(d)
    with pytest.raises(files.SchemaError):
        files.mapping_from_doc(d, base.group)


def test_weights_roundtrip(complex_, tmp_path):
    w = tutte.random_weights(complex_, np.random.default_rng(0))
    path = tmp_path / "w.json"
    files.write_json(path, "weights", files.weights_to_doc(complex_, w))
    assert np.array_equal(files.read_weights(path, complex_), w)


@pytest.mark.parametrize("bad", [0.0, -1.0, "x"])
def test_weights_reject_bad_values(complex_, bad):
    doc = files.weights_to_doc(complex_, np.ones(len(complex_.directed_edges)))
    doc["0->6"] = bad
    with pytest.raises(files.SchemaError):
        files.weights_from_doc(doc, complex_)


def test_weights_reject_missing_or_extra(complex_):
    doc = files.weights_to_doc(complex_, np.ones(len(complex_.directed_edges)))
    extra = dict(doc, **{"0->1": 1.0})
    doc.pop("0->6")
    for d in (doc, extra):
        with pytest.raises(files.SchemaError):
            files.weights_from_doc(d, complex_)


def test_read_json_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(files.SchemaError):
        files.read_json(bad)
    with pytest.raises(files.SchemaError):
        files.read_json(tmp_path / "missing.json")


def test_write_json_validates(tmp_path):
    with pytest.raises(files.SchemaError):
        files.write_json(tmp_path / "r.json", "roundtrip", {"distance": -1.0})
    assert not (tmp_path / "r.json").exists()


def test_degeneration_doc_validates(uniform_solution):
    doc = files.degeneration_to_doc(kn.degenerate(uniform_solution, 9, 4), seed=1)
    files.validate("degeneration", json.loads(files.dumps(doc)))
    assert doc["waypoints"][-1]["pair_weight"] is None


def test_schema_docs_match(tmp_path):
    from pathlib import Path

    docs = Path(__file__).resolve().parents[1] / "docs" / "schemas"
    for kind, schema in files.SCHEMAS.items():
        assert json.loads((docs / f"{kind}.json").read_text()) == schema


def _parse_arc(d):
    m = re.fullmatch(r"M (\S+) (\S+) A (\S+) \S+ 0 0 ([01]) (\S+) (\S+)", d)
    x1, y1, r, sweep, x2, y2 = (float(v) for v in m.groups())
    return np.array([x1, y1]), r, int(sweep), np.array([x2, y2])


def test_arc_geometry(monkeypatch):
    # print more digits so the parsed arc can be checked tightly
    monkeypatch.setattr(render, "_FMT", "{:.15f}")
    rng = np.random.default_rng(0)
    for _ in range(200):
        p, q = hg.random_point(rng, 2.0), hg.random_point(rng, 2.0)
        z1, r, sweep, z2 = _parse_arc(render._arc(p, q))
        tol = 1e-9 * max(1.0, r * r)
        # the circle is orthogonal to the unit circle: 2 z.c = |z|^2 + 1 at both ends
        A = 2 * np.stack([z1, z2])
        c = np.linalg.solve(A, [z1 @ z1 + 1, z2 @ z2 + 1])
        assert abs(np.hypot(*(z1 - c)) - r) < tol
        assert abs(c @ c - r * r - 1) < tol * max(1.0, r)
        # the hyperbolic midpoint is on the circle, on the side the sweep flag selects
        mx, my = render._xy(hg.midpoint(p, q))
        m = np.array([mx, my])
        assert abs(np.hypot(*(m - c)) - r) < tol
        turn = (np.arctan2(*(m - c)[::-1]) - np.arctan2(*(z1 - c)[::-1])) % (2 * np.pi)
        assert (turn < np.pi) == (sweep == 1)


def test_arc_through_origin_is_straight():
    assert " L " in render._arc(hg.polar(1.0, 0.3), hg.polar(2.0, 0.3 + np.pi))


def test_clip_to_domain(base, domain):
    targets = base.targets()
    idx = base.surface.dedge_index
    for i, j in base.surface.edges:
        b = targets[idx[(int(i), int(j))]]
        pieces = render.clip_to_domain(base.group, domain, base.lifts[i], b)
        total = sum(hg.dist(p, q) for p, q in pieces)
        assert abs(total - hg.dist(base.lifts[i], b)) < 1e-9
        for p, q in pieces:
            assert domain.contains(p, 1e-9) and domain.contains(q, 1e-9)


def test_render_svg(base, domain):
    text = render.render_svg(base, domain, seed=3, ghosts=True)
    root = ET.fromstring(text.split("\n", 1)[1])
    ns = "{http://www.w3.org/2000/svg}"
    paths = root.findall(f"{ns}path")
    edges = [p for p in paths if p.get("class") == "edge"]
    assert len(edges) == len(base.surface.edges) == 144
    assert len({p.get("data-edge") for p in edges}) == 144
    assert sum(p.get("class") == "ghost" for p in paths) == 144
    assert len(root.findall(f"{ns}circle")) == 1 + base.surface.n_vertices
    assert "<!-- seed=3 -->" in text
    assert render.render_svg(base, domain, seed=3) == render.render_svg(base, domain, seed=3)
