"""Build starting curves from specification strings.

Accepts the tangle-closure notation plus two constructor extensions used
by the CLI and the steering service: "T(a,b)" for torus knots and
"circle(n)" for a round baseline.
"""

from __future__ import annotations

import re

from .curves import EmbedParams, KnotCurve, circle_curve, resample_uniform, torus_knot_curve
from .diagram import embed_closure
from .notation import parse_tangle

_TORUS = re.compile(r"^\s*T\(\s*(\d+)\s*,\s*(\d+)\s*\)\s*$")
_CIRCLE = re.compile(r"^\s*circle\(\s*(\d+)\s*\)\s*$")


def build_curve_from_spec(spec: str, beads: int | None = None) -> KnotCurve:
    """Curve for a torus/circle constructor or an embedded tangle closure.

    The result has equal edge lengths and total length 1.
    """
    m = _TORUS.match(spec)
    if m:
        n = beads or 200
        return resample_uniform(torus_knot_curve(int(m.group(1)), int(m.group(2)), n), n)
    m = _CIRCLE.match(spec)
    if m:
        n = beads or int(m.group(1))
        return resample_uniform(circle_curve(int(m.group(1)), 1.0), n).normalized()
    params = EmbedParams(beads=beads or 0)
    return embed_closure(parse_tangle(spec), params)
