"""Python access to the geometry kernel: parse, evaluate, probe, render."""

import json

from ._core import (
    Circle,
    Construction,
    EvaluationError,
    Line,
    ParseError,
    Point,
    parse,
    probe_json,
    render_svg,
    serialize,
    validate,
)

__all__ = [
    "Circle",
    "Construction",
    "EvaluationError",
    "Line",
    "ParseError",
    "Point",
    "parse",
    "probe",
    "render_svg",
    "serialize",
    "validate",
]


def probe(construction, samples=1000, seed=0):
    """Soundness report as a dict; same fields as `wgl validate`."""
    return json.loads(probe_json(construction, samples, seed))
