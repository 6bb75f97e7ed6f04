"""Flat twist-form diagrams for tangle closures, and projection audits.

A continued-fraction tangle (a1, ..., an) is drawn by starting from the
horizontal or vertical trivial tangle and applying twist regions
innermost-first: term a_i acts on the two right leads (odd i) or the two
bottom leads (even i).  Each crossing occupies a unit cell whose two
strands lift to z = +-strand_gap at the centre; lead routing between
regions runs through virgin corridors right of or below everything built
so far, so the construction is embedded by design (and re-checked
numerically).  Sums place the operand diagrams side by side, and the
numerator closure joins top leads and bottom leads by semicircular arcs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .curves import EmbedParams, KnotCurve, resample_uniform
from .errors import (
    BeadBudgetError,
    NonGenericProjectionError,
    UnsupportedExpressionError,
)
from .tangles import (
    CF,
    CFTerms,
    Family,
    IntegerTangle,
    Mirror,
    Numerator,
    Sum,
    VerticalTangle,
    expand_family,
)

# For positive horizontal terms the strand running lower-left to upper-right
# passes over.  The vertical convention is the one that makes all-positive
# term lists alternating diagrams (calibrated against diagram determinants).
_H_ASCENDING_OVER = 1.0
_V_LEFT_DESCENDING_OVER = -1.0


Point = tuple[float, float, float]


class _Builder:
    """Incremental twist-form tangle diagram in cell units."""

    def __init__(self, gap: float):
        self.gap = gap
        self.pieces: list[list[Point]] = []
        self.crossings = 0
        self.nw = (0.0, 1.0)
        self.ne = (1.0, 1.0)
        self.sw = (0.0, 0.0)
        self.se = (1.0, 0.0)
        self.xmin, self.xmax = 0.0, 1.0
        self.ymin, self.ymax = 0.0, 1.0

    # -- plumbing ----------------------------------------------------------

    def _touch(self, x: float, y: float):
        self.xmin = min(self.xmin, x)
        self.xmax = max(self.xmax, x)
        self.ymin = min(self.ymin, y)
        self.ymax = max(self.ymax, y)

    def piece(self, pts: list[Point]):
        cleaned = [pts[0]]
        for p in pts[1:]:
            if p != cleaned[-1]:
                cleaned.append(p)
        if len(cleaned) < 2:
            return
        for x, y, _ in cleaned:
            self._touch(x, y)
        self.pieces.append(cleaned)

    def route(self, xy: list[tuple[float, float]]):
        self.piece([(x, y, 0.0) for x, y in xy])

    # -- bases ---------------------------------------------------------------

    @classmethod
    def base_zero(cls, gap: float) -> "_Builder":
        b = cls(gap)
        b.piece([(0.0, 1.0, 0.0), (1.0, 1.0, 0.0)])
        b.piece([(0.0, 0.0, 0.0), (1.0, 0.0, 0.0)])
        return b

    @classmethod
    def base_infinity(cls, gap: float) -> "_Builder":
        b = cls(gap)
        b.piece([(0.0, 1.0, 0.0), (0.0, 0.0, 0.0)])
        b.piece([(1.0, 1.0, 0.0), (1.0, 0.0, 0.0)])
        return b

    # -- twist regions -------------------------------------------------------

    def twist_horizontal(self, count: int, positive: bool):
        if count == 0:
            return
        nx, ny = self.ne
        sx, sy = self.se
        if not (nx == self.xmax and sx == self.xmax and ny - sy == 1.0):
            x_frontier = self.xmax
            x_out = x_frontier + 2.0
            yc = 0.5 * (ny + sy)
            self.route([(nx, ny), (x_frontier + 1.0, ny), (x_out, yc + 0.5)])
            self.route([(sx, sy), (x_frontier + 1.0, sy), (x_out, yc - 0.5)])
            self.ne = (x_out, yc + 0.5)
            self.se = (x_out, yc - 0.5)
            nx, ny = self.ne
            sx, sy = self.se
        yc = 0.5 * (ny + sy)
        z_asc = self.gap * (_H_ASCENDING_OVER if positive else -_H_ASCENDING_OVER)
        for k in range(count):
            x0 = nx + k
            xm = x0 + 0.5
            self.piece([(x0, ny, 0.0), (xm, yc, -z_asc), (x0 + 1.0, sy, 0.0)])
            self.piece([(x0, sy, 0.0), (xm, yc, z_asc), (x0 + 1.0, ny, 0.0)])
        self.ne = (nx + count, ny)
        self.se = (nx + count, sy)
        self.crossings += count

    def twist_vertical(self, count: int, positive: bool):
        if count == 0:
            return
        wx, wy = self.sw
        sx, sy = self.se
        if not (wy == self.ymin and sy == self.ymin and sx - wx == 1.0):
            y_frontier = self.ymin
            x_frontier = self.xmax
            y_out = y_frontier - 2.0
            self.route([(wx, wy), (wx, y_out)])
            self.route(
                [
                    (sx, sy),
                    (x_frontier + 1.0, y_frontier - 1.0),
                    (wx + 1.0, y_frontier - 1.0),
                    (wx + 1.0, y_out),
                ]
            )
            self.sw = (wx, y_out)
            self.se = (wx + 1.0, y_out)
            wx, wy = self.sw
            sx, sy = self.se
        xc = 0.5 * (wx + sx)
        z_ld = self.gap * (
            _V_LEFT_DESCENDING_OVER if positive else -_V_LEFT_DESCENDING_OVER
        )
        for k in range(count):
            y0 = wy - k
            ym = y0 - 0.5
            self.piece([(wx, y0, 0.0), (xc, ym, z_ld), (sx, y0 - 1.0, 0.0)])
            self.piece([(sx, y0, 0.0), (xc, ym, -z_ld), (wx, y0 - 1.0, 0.0)])
        self.sw = (wx, wy - count)
        self.se = (sx, wy - count)
        self.crossings += count


def _build_tangle(terms: CFTerms, gap: float) -> _Builder:
    """Twist-form diagram of the continued-fraction tangle `terms`."""
    n = len(terms)
    if n == 0:
        return _Builder.base_zero(gap)
    b = _Builder.base_zero(gap) if n % 2 == 1 else _Builder.base_infinity(gap)
    for i in range(n, 0, -1):  # innermost region first
        a = terms[i - 1]
        if i % 2 == 1:
            b.twist_horizontal(abs(a), a > 0)
        else:
            b.twist_vertical(abs(a), a > 0)
    return b


def _shift_builder(b: _Builder, dx: float):
    for piece in b.pieces:
        for idx, (x, y, z) in enumerate(piece):
            piece[idx] = (x + dx, y, z)
    for name in ("nw", "ne", "sw", "se"):
        x, y = getattr(b, name)
        setattr(b, name, (x + dx, y))
    b.xmin += dx
    b.xmax += dx


def _join_sum(left: _Builder, right: _Builder) -> _Builder:
    """Place `right` beside `left` and wire NE-NW and SE-SW leads."""
    # standardize right's bottom-left lead up its own left flank first
    wx, wy = right.sw
    y_under = right.ymin - 1.0
    right.route([(wx, wy), (wx, y_under), (-1.0, y_under), (-1.0, 0.0)])
    right.sw = (-1.0, 0.0)
    shift = left.xmax + 4.0 - right.xmin
    _shift_builder(right, shift)

    merged = _Builder(left.gap)
    merged.pieces = left.pieces + right.pieces
    merged.crossings = left.crossings + right.crossings
    merged.xmin = min(left.xmin, right.xmin)
    merged.xmax = max(left.xmax, right.xmax)
    merged.ymin = min(left.ymin, right.ymin)
    merged.ymax = max(left.ymax, right.ymax)

    nx, ny = left.ne
    merged.route([(nx, ny), (left.xmax + 1.0, ny), (left.xmax + 1.0, 1.0), right.nw])
    sx, sy = left.se
    merged.route([(sx, sy), (left.xmax + 2.0, sy), (left.xmax + 2.0, 0.0), right.sw])

    merged.nw = left.nw
    merged.sw = left.sw
    merged.ne = right.ne
    merged.se = right.se
    return merged


def _arc(p: tuple[float, float], q: tuple[float, float], upward: bool) -> list[Point]:
    """Semicircle in the z = 0 plane over the chord p-q."""
    cx, cy = 0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])
    r = 0.5 * math.hypot(q[0] - p[0], q[1] - p[1])
    count = max(8, int(math.pi * r / 0.5))
    pts: list[Point] = [(p[0], p[1], 0.0)]
    # the chord is horizontal in every use; sweep through the half circle
    # whose midpoint lies above (upward) or below the chord
    start = math.atan2(p[1] - cy, p[0] - cx)
    left_to_right = p[0] < q[0]
    sweep = -math.pi if upward == left_to_right else math.pi
    for k in range(1, count):
        ang = start + sweep * k / count
        pts.append((cx + r * math.cos(ang), cy + r * math.sin(ang), 0.0))
    pts.append((q[0], q[1], 0.0))
    return pts


def _close_numerator(b: _Builder) -> list[np.ndarray]:
    """Append closure arcs; returns all pieces as arrays."""
    x_frontier = b.xmax
    nx, ny = b.ne
    top_right = (x_frontier + 1.0, 1.0)
    b.route([(nx, ny), (x_frontier + 1.0, ny), top_right])

    sx, sy = b.se
    bottom_level = b.ymin - 1.0
    bottom_right = (x_frontier + 2.0, bottom_level)
    b.route([(sx, sy), (x_frontier + 2.0, sy), bottom_right])

    wx, wy = b.sw
    bottom_left = (wx, bottom_level)
    b.route([(wx, wy), bottom_left])

    b.piece(_arc(b.nw, top_right, upward=True))
    b.piece(_arc(bottom_left, bottom_right, upward=False))
    return [np.asarray(p) for p in b.pieces]


def _stitch(pieces: list[np.ndarray]) -> np.ndarray:
    """Walk the pieces into a single closed loop, or fail for links."""
    def key(pt):
        return (round(pt[0], 6), round(pt[1], 6), round(pt[2], 6))

    ends: dict = {}
    for idx, piece in enumerate(pieces):
        for end in (0, 1):
            k = key(piece[0 if end == 0 else -1])
            ends.setdefault(k, []).append((idx, end))
    for k, lst in ends.items():
        if len(lst) != 2:
            raise UnsupportedExpressionError(
                f"diagram connectivity broken at {k}: {len(lst)} strand ends"
            )

    used = [False] * len(pieces)
    loop: list[np.ndarray] = []
    idx, forward = 0, True
    while True:
        used[idx] = True
        pts = pieces[idx] if forward else pieces[idx][::-1]
        loop.append(pts[:-1])
        tail = key(pts[-1])
        nxt = [(i, e) for (i, e) in ends[tail] if i != idx]
        if not nxt:  # closed back onto the starting piece
            break
        idx, end = nxt[0]
        if used[idx]:
            break
        forward = end == 0
    if not all(used):
        raise UnsupportedExpressionError(
            "closure has two components; only knots are embedded"
        )
    out = np.vstack(loop)
    keep = np.linalg.norm(np.diff(np.vstack([out, out[:1]]), axis=0), axis=1) > 1e-12
    return out[keep]


def _closure_operands(expr) -> list[CFTerms]:
    if isinstance(expr, Family):
        expr = expand_family(expr)
    if not isinstance(expr, Numerator):
        raise UnsupportedExpressionError(
            "only numerator closures and families can be embedded"
        )

    def to_terms(t) -> CFTerms:
        if isinstance(t, CF):
            return t.terms if t.terms else (0,)
        if isinstance(t, IntegerTangle):
            return (t.n,)
        if isinstance(t, VerticalTangle):
            return (0, t.n)
        if isinstance(t, Mirror):
            return tuple(-x for x in to_terms(t.inner))
        raise UnsupportedExpressionError(
            f"operand {t!r} is not a continued-fraction tangle"
        )

    inner = expr.tangle
    if isinstance(inner, Sum):
        if isinstance(inner.left, Sum) or isinstance(inner.right, Sum):
            raise UnsupportedExpressionError("sums of three or more tangles")
        return [to_terms(inner.left), to_terms(inner.right)]
    return [to_terms(inner)]


def twist_diagram(operands: list[CFTerms], gap: float) -> tuple[np.ndarray, int]:
    """Raw closed diagram polyline (cell units) and its crossing count."""
    builders = [_build_tangle(t, gap) for t in operands]
    combined = builders[0]
    for extra in builders[1:]:
        combined = _join_sum(combined, extra)
    pieces = _close_numerator(combined)
    return _stitch(pieces), combined.crossings


def embed_closure(expr, params: EmbedParams = EmbedParams()) -> KnotCurve:
    """Beaded embedding of a tangle closure, normalized to total length 1.

    The bead count defaults to max(8 x crossings, 100) raised as needed to
    resolve every crossing of the flat diagram; the result is audited
    (embedded, projected crossing count equals the sum of |a_i|).
    """
    operands = _closure_operands(expr)
    raw, crossings = twist_diagram(operands, params.strand_gap / params.cell_size)
    raw_len = float(
        np.linalg.norm(np.diff(np.vstack([raw, raw[:1]]), axis=0), axis=1).sum()
    )
    auto = params.beads == 0
    if auto:
        # 8 beads per crossing, raised so bead spacing resolves the flat
        # diagram's corners (the audit below re-checks fidelity)
        beads = max(8 * crossings, 100, math.ceil(1.5 * raw_len))
    else:
        beads = params.beads
        if beads < 4 * crossings:
            raise BeadBudgetError(
                f"{beads} beads cannot resolve {crossings} crossings "
                f"(need at least {4 * crossings})"
            )
    raw_curve = KnotCurve(raw * params.cell_size, validate=False)
    if kernels.min_segment_gap(raw_curve.points) <= 0.0:
        raise UnsupportedExpressionError("internal diagram construction collision")

    last_error = None
    for _ in range(4):
        curve = resample_uniform(raw_curve, beads, use_spline=False).normalized()
        try:
            curve.validate()
            report = diagram_audit(curve)
            if report.count == crossings:
                return curve
            last_error = BeadBudgetError(
                f"resampled diagram shows {report.count} crossings, expected {crossings}"
            )
        except Exception as err:  # audit or validation failure: densify
            last_error = err
        if not auto:
            break
        beads = math.ceil(beads * 1.5)
    raise BeadBudgetError(
        f"could not faithfully resample diagram at requested bead budget: {last_error}"
    )


# --------------------------------------------------------------------------
# Projection audit


@dataclass(frozen=True)
class Crossing:
    seg_a: int
    seg_b: int
    t_a: float
    t_b: float
    a_over: bool
    sign: int

    @property
    def pos_a(self) -> float:
        return self.seg_a + self.t_a

    @property
    def pos_b(self) -> float:
        return self.seg_b + self.t_b


@dataclass(frozen=True)
class CrossingReport:
    count: int
    crossings: list[Crossing]
    direction: tuple[float, float, float]


class _NonGeneric(Exception):
    pass


def _find_crossings(x, y, z) -> list[Crossing]:
    n = len(x)
    x1, y1, z1 = np.roll(x, -1), np.roll(y, -1), np.roll(z, -1)
    rx, ry = x1 - x, y1 - y
    scale = max(float(np.ptp(x)), float(np.ptp(y)), 1e-30)
    eps_t = 1e-6
    eps_par = 1e-14 * scale * scale
    eps_z = 1e-10 * scale
    out: list[Crossing] = []
    i_all, j_all = np.triu_indices(n, k=2)
    keep = ~((i_all == 0) & (j_all == n - 1))
    i_all, j_all = i_all[keep], j_all[keep]
    block = 200_000
    for s in range(0, len(i_all), block):
        i = i_all[s : s + block]
        j = j_all[s : s + block]
        denom = rx[i] * ry[j] - ry[i] * rx[j]
        qpx = x[j] - x[i]
        qpy = y[j] - y[i]
        par = np.abs(denom) <= eps_par
        safe = np.where(par, 1.0, denom)
        t = (qpx * ry[j] - qpy * rx[j]) / safe
        u = (qpx * ry[i] - qpy * rx[i]) / safe
        loose = (~par) & (t > -eps_t) & (t < 1 + eps_t) & (u > -eps_t) & (u < 1 + eps_t)
        strict = (t > eps_t) & (t < 1 - eps_t) & (u > eps_t) & (u < 1 - eps_t)
        if np.any(loose & ~strict):
            raise _NonGeneric("crossing too close to a bead")
        if np.any(par):
            # parallel pairs are fine unless the segments almost touch
            from .kernels._ref import _segment_pairs_distance

            ii, jj = i[par], j[par]
            a0 = np.column_stack([x[ii], y[ii], np.zeros(len(ii))])
            a1 = np.column_stack([x1[ii], y1[ii], np.zeros(len(ii))])
            b0 = np.column_stack([x[jj], y[jj], np.zeros(len(jj))])
            b1 = np.column_stack([x1[jj], y1[jj], np.zeros(len(jj))])
            if np.any(_segment_pairs_distance(a0, a1, b0, b1) < 1e-9 * scale):
                raise _NonGeneric("overlapping parallel segments")
        hits = np.nonzero(loose & strict)[0]
        for h in hits:
            ii, jj = int(i[h]), int(j[h])
            ta, tb = float(t[h]), float(u[h])
            za = z[ii] + ta * (z1[ii] - z[ii])
            zb = z[jj] + tb * (z1[jj] - z[jj])
            if abs(za - zb) < eps_z:
                raise _NonGeneric("depth tie at crossing")
            cross_z = rx[ii] * ry[jj] - ry[ii] * rx[jj]
            a_over = za > zb
            sign = int(np.sign(cross_z)) * (1 if a_over else -1)
            out.append(Crossing(ii, jj, ta, tb, a_over, sign))
    out.sort(key=lambda c: (c.pos_a, c.pos_b))
    return out


def diagram_audit(
    curve: KnotCurve, direction=(0.0, 0.0, 1.0), max_attempts: int = 100
) -> CrossingReport:
    """Count transverse crossings of the projection along `direction`.

    Retries slightly perturbed directions when the projection is not
    generic (tangency, a crossing at a bead, or a depth tie).
    """
    d0 = np.asarray(direction, dtype=np.float64)
    norm = np.linalg.norm(d0)
    if norm == 0:
        raise NonGenericProjectionError("zero projection direction")
    d0 = d0 / norm
    rng = np.random.default_rng(20240801)
    pts = curve.points
    for attempt in range(max_attempts):
        if attempt == 0:
            d = d0
        else:
            wobble = rng.normal(size=3)
            wobble -= wobble @ d0 * d0
            wn = np.linalg.norm(wobble)
            if wn == 0:
                continue
            angle = 1e-4 * attempt
            d = math.cos(angle) * d0 + math.sin(angle) * wobble / wn
        u = np.array([1.0, 0.0, 0.0]) if abs(d[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        u = u - (u @ d) * d
        u /= np.linalg.norm(u)
        v = np.cross(d, u)
        try:
            crossings = _find_crossings(pts @ u, pts @ v, pts @ d)
        except _NonGeneric:
            continue
        return CrossingReport(len(crossings), crossings, tuple(d))
    raise NonGenericProjectionError(
        f"no generic projection after {max_attempts} attempts"
    )
