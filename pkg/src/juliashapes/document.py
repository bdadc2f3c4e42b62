"""Shape documents: the JSON ingestion format for target shapes.

    {"name": "two disks",
     "curves": [{"type": "circle", "center": [0, 0], "radius": 0.8},
                {"type": "ellipse", "center": [3, 0], "semi_axes": [1, 0.5], "rotation": 0.3},
                {"type": "fourier", "center": [0, 5], "coefficients": [[0.1, 0], [0, 0], [1, 0]]},
                {"type": "rounded_polygon", "vertices": [[0, 0], [1, 0], [0, 1]], "rounding": 0.1}]}

Complex numbers are [re, im] pairs; fourier coefficients run k = -K..K.
"""
from __future__ import annotations

import json

import jsonschema

from . import geometry
from .errors import JuliaShapesError

_PAIR = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}


def _curve(kind, props, required):
    return {
        "type": "object",
        "properties": {"type": {"const": kind}, **props},
        "required": ["type", *required],
        "additionalProperties": False,
    }


SHAPE_SCHEMA = {
    "type": "object",
    "properties": {
        "name": {"type": "string"},
        "curves": {
            "type": "array",
            "minItems": 1,
            "items": {
                "oneOf": [
                    _curve("circle", {"center": _PAIR, "radius": _POSITIVE}, ["center", "radius"]),
                    _curve(
                        "ellipse",
                        {
                            "center": _PAIR,
                            "semi_axes": {"type": "array", "items": _POSITIVE, "minItems": 2, "maxItems": 2},
                            "rotation": {"type": "number"},
                        },
                        ["center", "semi_axes"],
                    ),
                    _curve(
                        "fourier",
                        {"center": _PAIR, "coefficients": {"type": "array", "items": _PAIR, "minItems": 1}},
                        ["center", "coefficients"],
                    ),
                    _curve(
                        "rounded_polygon",
                        {"vertices": {"type": "array", "items": _PAIR, "minItems": 3}, "rounding": _POSITIVE},
                        ["vertices", "rounding"],
                    ),
                ]
            },
        },
    },
    "required": ["curves"],
    "additionalProperties": False,
}


class DocumentError(JuliaShapesError):
    """The document is not parseable JSON or does not match the schema."""


def _complex(pair):
    return complex(pair[0], pair[1])


def curve_from_dict(d: dict) -> geometry.CurveSpec:
    kind = d["type"]
    if kind == "circle":
        return geometry.circle(_complex(d["center"]), d["radius"])
    if kind == "ellipse":
        return geometry.ellipse(_complex(d["center"]), d["semi_axes"], d.get("rotation", 0.0))
    if kind == "fourier":
        return geometry.fourier(_complex(d["center"]), [_complex(c) for c in d["coefficients"]])
    return geometry.rounded_polygon([_complex(v) for v in d["vertices"]], d["rounding"])


def shape_from_dict(doc: dict) -> geometry.ShapeSet:
    try:
        jsonschema.validate(doc, SHAPE_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise DocumentError(f"shape document invalid at {where}: {exc.message}") from None
    curves = [curve_from_dict(c) for c in doc["curves"]]
    return geometry.ShapeSet(curves, 0j, doc.get("name", ""))


def parse_shape(text: str, source: str = "<string>") -> geometry.ShapeSet:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        lines = text.splitlines()
        context = lines[exc.lineno - 1] if 0 < exc.lineno <= len(lines) else ""
        raise DocumentError(
            f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}\n    {context}\n    {' ' * (exc.colno - 1)}^"
        ) from None
    return shape_from_dict(doc)


def load_shape(path) -> geometry.ShapeSet:
    with open(path) as fh:
        text = fh.read()
    return parse_shape(text, str(path))


def dump_shape(shape: geometry.ShapeSet) -> str:
    return json.dumps(shape.to_dict(), indent=2, sort_keys=True) + "\n"
