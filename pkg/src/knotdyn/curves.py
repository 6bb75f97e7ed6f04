"""Beaded closed curves in 3-space and their constructors.

All curves are cyclic bead sequences.  Constructors that realize a
symbolic specification (torus knots, tangle diagrams) normalize total
length to 1 so energies are comparable across runs; `circle_curve` keeps
its explicit radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DegenerateCurveError, ParameterRangeError


@dataclass(frozen=True)
class EmbedParams:
    """Knobs for diagram embedding; `tube_scale` is a UI hint only."""

    beads: int = 0  # 0 = choose automatically
    strand_gap: float = 0.25
    cell_size: float = 1.0
    tube_scale: float = 0.0

    def __post_init__(self):
        if self.beads and self.beads < 12:
            raise ParameterRangeError("beads must be >= 12")
        if self.strand_gap <= 0 or self.cell_size <= 0:
            raise ParameterRangeError("strand_gap and cell_size must be positive")
        if self.strand_gap >= self.cell_size / 2:
            raise ParameterRangeError("strand_gap must be below cell_size / 2")
        if self.tube_scale < 0:
            raise ParameterRangeError("tube_scale must be >= 0")


class KnotCurve:
    """Cyclic sequence of >= 3 bead positions forming an embedded polygon."""

    __slots__ = ("points",)

    def __init__(self, points, validate: bool = True):
        pts = np.ascontiguousarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) < 3:
            raise DegenerateCurveError("curve needs >= 3 points in 3-space")
        self.points = pts
        if validate:
            self.validate()

    def __len__(self):
        return len(self.points)

    def edge_lengths(self) -> np.ndarray:
        return np.linalg.norm(np.roll(self.points, -1, axis=0) - self.points, axis=1)

    def total_length(self) -> float:
        return float(self.edge_lengths().sum())

    def min_gap(self) -> float:
        """Minimum distance between non-adjacent segments."""
        return kernels.min_segment_gap(self.points)

    def is_embedded(self) -> bool:
        if np.any(self.edge_lengths() == 0.0):
            return False
        return self.min_gap() > 0.0

    def validate(self):
        if np.any(self.edge_lengths() == 0.0):
            raise DegenerateCurveError("consecutive beads coincide")
        if self.min_gap() <= 0.0:
            raise DegenerateCurveError("non-adjacent segments touch: not embedded")

    def scaled(self, factor: float) -> "KnotCurve":
        return KnotCurve(self.points * factor, validate=False)

    def normalized(self, total: float = 1.0) -> "KnotCurve":
        return self.scaled(total / self.total_length())


def circle_curve(n: int, radius: float) -> KnotCurve:
    """Regular planar n-gon inscribed in a circle of the given radius."""
    if n < 3:
        raise ParameterRangeError("circle needs n >= 3")
    if radius <= 0:
        raise ParameterRangeError("radius must be positive")
    t = 2.0 * np.pi * np.arange(n) / n
    pts = np.column_stack([radius * np.cos(t), radius * np.sin(t), np.zeros(n)])
    return KnotCurve(pts, validate=False)


def torus_knot_curve(
    a: int,
    b: int,
    beads: int = 200,
    major_radius: float = 2.0,
    tube_radius: float = 0.75,
) -> KnotCurve:
    """Closed (a, b) torus knot: a meridian windings, b longitude windings.

    Sampled uniformly in parameter, then scaled to total length 1.
    """
    if a < 1 or b < 1:
        raise ParameterRangeError("torus knot indices must be positive")
    if math.gcd(a, b) != 1:
        raise ParameterRangeError("torus knot indices must be relatively prime")
    if not 0 < tube_radius < major_radius:
        raise ParameterRangeError("need 0 < tube_radius < major_radius")
    if beads < 12:
        raise ParameterRangeError("beads must be >= 12")
    t = 2.0 * np.pi * np.arange(beads) / beads
    w = major_radius + tube_radius * np.cos(a * t)
    pts = np.column_stack(
        [w * np.cos(b * t), w * np.sin(b * t), tube_radius * np.sin(a * t)]
    )
    return KnotCurve(pts).normalized()


def _fine_carrier(points: np.ndarray, use_spline: bool) -> np.ndarray:
    """Dense closed polyline approximating the curve through the beads."""
    n = len(points)
    closed = np.vstack([points, points[:1]])
    seg = np.linalg.norm(np.diff(closed, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    if not use_spline:
        return closed
    from scipy.interpolate import CubicSpline

    spline = CubicSpline(s, closed, bc_type="periodic")
    dense_per_seg = 24
    samples = []
    for i in range(n):
        ts = np.linspace(s[i], s[i + 1], dense_per_seg, endpoint=False)
        samples.append(spline(ts))
    samples.append(closed[-1:])
    return np.vstack(samples)


def _walk_equal_chords(carrier: np.ndarray, n: int, chord: float):
    """Walk the closed carrier polyline in equal chord steps.

    Each step exits the sphere of radius `chord` around the current point
    at the first forward crossing.  Returns (the n placed points, the
    unwrapped arc position after n steps): the chord is correct exactly
    when that position equals the carrier length.
    """
    seg = np.diff(carrier, axis=0)
    seglen = np.linalg.norm(seg, axis=1)
    m = len(seglen)
    total = float(seglen.sum())
    cum = np.concatenate([[0.0], np.cumsum(seglen)])

    pts = np.empty((n, 3))
    pts[0] = carrier[0]
    cur = carrier[0]
    k = 0
    wraps = 0
    guard = 0
    for i in range(1, n + 1):
        # first carrier vertex at distance >= chord ends the crossing segment
        while np.linalg.norm(carrier[k + 1] - cur) < chord:
            k += 1
            if k == m:
                k = 0
                wraps += 1
            guard += 1
            if guard > (n + 10) * m:
                raise DegenerateCurveError("chord walk failed to advance")
        # exit point on segment k: |A + t d - cur| = chord, forward root
        A = carrier[k]
        d = seg[k]
        f = A - cur
        aa = float(d @ d)
        bb = 2.0 * float(f @ d)
        cc = float(f @ f) - chord * chord
        disc = max(bb * bb - 4 * aa * cc, 0.0)
        t = (-bb + math.sqrt(disc)) / (2 * aa)
        t = min(max(t, 0.0), 1.0)
        cur = A + t * d
        if i < n:
            pts[i] = cur
        s_end = cum[k] + t * seglen[k] + wraps * total
    return pts, s_end


def resample_uniform(curve: KnotCurve, n: int, use_spline: bool = True) -> KnotCurve:
    """Resample to n beads with equal edge lengths along the curve.

    The carrier is a periodic cubic spline through the beads (or the
    polyline itself with use_spline=False); the common chord length is
    solved so the walk closes up exactly after n steps.
    """
    if n < 3:
        raise ParameterRangeError("resampling needs n >= 3")
    pts = curve.points
    if len(pts) == n:
        lengths = curve.edge_lengths()
        mean = lengths.mean()
        if np.max(np.abs(lengths - mean)) <= 1e-12 * mean:
            return KnotCurve(pts.copy(), validate=False)
    carrier = _fine_carrier(pts, use_spline)
    seglen = np.linalg.norm(np.diff(carrier, axis=0), axis=1)
    keep = seglen > 1e-15
    if not np.all(keep):
        carrier = np.vstack([carrier[:-1][keep], carrier[-1:]])
    total = float(np.linalg.norm(np.diff(carrier, axis=0), axis=1).sum())

    hi = total / n
    lo = hi
    for _ in range(60):
        lo *= 0.5
        _, s_end = _walk_equal_chords(carrier, n, lo)
        if s_end < total:
            break
    else:
        raise DegenerateCurveError("equal-chord resampling failed to bracket")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        _, s_end = _walk_equal_chords(carrier, n, mid)
        if s_end < total:
            lo = mid
        else:
            hi = mid
    # finish on the undershoot side so the closing chord never backtracks
    out, _ = _walk_equal_chords(carrier, n, lo)
    # chords cut slightly inside the carrier; rescale about the centroid so
    # the total length survives exactly
    out_len = float(np.linalg.norm(np.diff(np.vstack([out, out[:1]]), axis=0), axis=1).sum())
    in_len = curve.total_length()
    centroid = out.mean(axis=0)
    out = centroid + (out - centroid) * (in_len / out_len)
    return KnotCurve(out, validate=False)
