"""JSON artifacts: schemas, readers and writers.

Floats are written with ``repr`` (shortest exact round-trip form), so
re-reading a file reproduces every value bit for bit and repeated runs give
byte-identical files.
"""

import json

import jsonschema
import numpy as np

from . import surface as sf
from . import triangulation as tri

WORD = {"type": "string", "pattern": "^[aAbBcCdD]*$"}
POINT = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}
DEDGE_KEY = "^[0-9]+->[0-9]+$"

SCHEMAS = {
    "mapping": {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "geodesic mapping",
        "type": "object",
        "required": ["complex", "lifts", "deck"],
        "properties": {
            "seed": {"type": "integer"},
            "complex": {
                "type": "object",
                "required": ["vertices", "edges", "faces"],
                "properties": {
                    "vertices": {"type": "integer", "minimum": 3},
                    "edges": {
                        "type": "array",
                        "items": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 2, "maxItems": 2},
                    },
                    "faces": {
                        "type": "array",
                        "items": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 3, "maxItems": 3},
                    },
                },
            },
            "lifts": {"type": "array", "items": POINT},
            "deck": {"type": "object", "patternProperties": {DEDGE_KEY: WORD}, "additionalProperties": False},
        },
    },
    "weights": {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "directed edge weights",
        "type": "object",
        "patternProperties": {DEDGE_KEY: {"type": "number", "exclusiveMinimum": 0}},
        "additionalProperties": False,
    },
    "degeneration": {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "one-vertex degeneration path",
        "type": "object",
        "required": ["vertex", "waypoints"],
        "properties": {
            "seed": {"type": "integer"},
            "vertex": {"type": "integer", "minimum": 0},
            "karcher": POINT,
            "target": POINT,
            "waypoints": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["t", "lift", "theta_min"],
                    "properties": {
                        "t": {"type": "number", "minimum": 0, "maximum": 1},
                        "lift": POINT,
                        "theta_min": {"type": "number", "minimum": 0},
                        "pair_weight": {"type": ["number", "null"]},
                    },
                },
            },
        },
    },
    "weightlimit": {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "minimum angle against concentrated weights",
        "type": "object",
        "required": ["face", "rows"],
        "properties": {
            "seed": {"type": "integer"},
            "face": {"type": "array", "items": {"type": "integer"}, "minItems": 3, "maxItems": 3},
            "rows": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["k", "delta", "theta_min", "converged"],
                    "properties": {
                        "k": {"type": "integer"},
                        "delta": {"type": "number"},
                        "theta_min": {"type": "number"},
                        "converged": {"type": "boolean"},
                    },
                },
            },
        },
    },
    "morph": {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "weight-space morph samples",
        "type": "object",
        "required": ["samples"],
        "properties": {
            "seed": {"type": "integer"},
            "samples": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["t", "theta_min", "embedded", "lifts"],
                    "properties": {
                        "t": {"type": "number"},
                        "theta_min": {"type": "number"},
                        "embedded": {"type": "boolean"},
                        "lifts": {"type": "array", "items": POINT},
                    },
                },
            },
        },
    },
    "roundtrip": {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "mean value roundtrip",
        "type": "object",
        "required": ["distance"],
        "properties": {"seed": {"type": "integer"}, "distance": {"type": "number", "minimum": 0}},
    },
}


class SchemaError(ValueError):
    pass


def validate(kind, doc):
    try:
        jsonschema.validate(doc, SCHEMAS[kind])
    except jsonschema.ValidationError as exc:
        raise SchemaError(f"invalid {kind} file: {exc.message}") from None


def dumps(doc):
    return json.dumps(_plain(doc), indent=1) + "\n"


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


def read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from None


def write_json(path, kind, doc):
    doc = _plain(doc)
    validate(kind, doc)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(doc))


def dedge_key(i, j):
    return f"{int(i)}->{int(j)}"


def mapping_to_doc(phi, seed=None):
    S = phi.surface
    doc = {}
    if seed is not None:
        doc["seed"] = int(seed)
    doc["complex"] = {"vertices": S.n_vertices, "edges": S.edges.tolist(), "faces": S.faces.tolist()}
    doc["lifts"] = [[float(c) for c in p] for p in phi.lifts]
    doc["deck"] = {dedge_key(i, j): w for (i, j), w in zip(S.directed_edges, phi.deck)}
    return doc


def mapping_from_doc(doc, group=None):
    validate("mapping", doc)
    if group is None:
        group, _ = sf.build_genus2()
    cx = doc["complex"]
    faces = np.array(cx["faces"], dtype=int)
    if faces.size == 0 or faces.max() >= cx["vertices"]:
        raise SchemaError("face refers to a missing vertex")
    S = tri.SimplicialSurface(n_vertices=int(cx["vertices"]), faces=faces)
    try:
        S.check()
    except ValueError as exc:
        raise SchemaError(f"not a closed simplicial surface: {exc}") from None
    if sorted(map(tuple, cx["edges"])) != sorted(map(tuple, S.edges.tolist())):
        raise SchemaError("edge list does not match the faces")
    if len(doc["lifts"]) != S.n_vertices:
        raise SchemaError("one lift per vertex required")
    try:
        words = tuple(sf.reduce_word(doc["deck"][dedge_key(i, j)]) for i, j in S.directed_edges)
    except KeyError as exc:
        raise SchemaError(f"missing deck word for {exc.args[0]}") from None
    lifts = np.array(doc["lifts"], dtype=float)
    if not np.all(np.isfinite(lifts)) or np.any(lifts[:, 0] < 1):
        raise SchemaError("lifts must lie on the upper hyperboloid sheet")
    phi = tri.GeodesicMapping(S, group, lifts, words)
    rev, closure = tri.deck_residuals(phi)
    if rev > 1e-8 or closure > 1e-7:
        raise SchemaError("deck words violate reversal or face closure")
    return phi


def read_mapping(path, group=None):
    return mapping_from_doc(read_json(path), group)


def weights_to_doc(surface, w):
    return {dedge_key(i, j): float(x) for (i, j), x in zip(surface.directed_edges, w)}


def weights_from_doc(doc, surface):
    validate("weights", doc)
    keys = [dedge_key(i, j) for i, j in surface.directed_edges]
    if set(doc) != set(keys):
        raise SchemaError("weights must cover exactly the directed edges of the complex")
    return np.array([doc[k] for k in keys], dtype=float)


def read_weights(path, surface):
    return weights_from_doc(read_json(path), surface)


def degeneration_to_doc(path, seed=None):
    doc = {}
    if seed is not None:
        doc["seed"] = int(seed)
    doc["vertex"] = int(path.vertex)
    doc["karcher"] = path.karcher
    doc["target"] = path.target
    doc["waypoints"] = [
        {"t": w.t, "lift": w.lift, "theta_min": max(w.theta_min, 0.0), "pair_weight": w.pair_weight}
        for w in path.waypoints
    ]
    return doc
