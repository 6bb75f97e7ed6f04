"""NumPy reference implementation of the hot kernels.

Pairwise loops are blocked to keep memory at O(block * n).  Semantics
match the compiled backend; see the package docstring for the
determinism contract.
"""

from __future__ import annotations

import numpy as np

from ..errors import CoincidentPointsError

_BLOCK = 256


def _as_points(pos) -> np.ndarray:
    return np.ascontiguousarray(pos, dtype=np.float64)


def simon_energy(pos, include_adjacent: bool = True) -> float:
    """Sum of 1/|p_i - p_j| over unordered distinct bead pairs."""
    p = _as_points(pos)
    n = len(p)
    total = 0.0
    for s in range(0, n, _BLOCK):
        e = min(s + _BLOCK, n)
        diff = p[s:e, None, :] - p[None, :, :]
        d = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        rows = np.arange(s, e)[:, None]
        cols = np.arange(n)[None, :]
        mask = cols > rows
        if not include_adjacent:
            mask &= cols != rows + 1
            if s == 0:
                mask[0, n - 1] = False
        if np.any(d[mask] == 0.0):
            raise CoincidentPointsError("coincident beads in energy sum")
        total += float(np.sum(1.0 / d[mask]))
    return total


def repulsion_forces(pos, exponent: float = 5.0, strength: float = 1.0) -> np.ndarray:
    """Per-bead force from r^(-exponent) repulsion over non-adjacent pairs."""
    p = _as_points(pos)
    n = len(p)
    forces = np.zeros_like(p)
    idx = np.arange(n)
    for s in range(0, n, _BLOCK):
        e = min(s + _BLOCK, n)
        diff = p[s:e, None, :] - p[None, :, :]
        r2 = np.einsum("ijk,ijk->ij", diff, diff)
        rows = idx[s:e, None]
        cols = idx[None, :]
        sep = np.abs(cols - rows)
        nonadj = np.minimum(sep, n - sep) >= 2
        if np.any(r2[nonadj] == 0.0):
            raise CoincidentPointsError("coincident beads in force sum")
        r2_safe = np.where(nonadj, r2, 1.0)
        if exponent == 5.0:
            coef = strength / (r2_safe * r2_safe * r2_safe)
        else:
            coef = strength * r2_safe ** (-0.5 * (exponent + 1.0))
        forces[s:e] = np.einsum("ij,ijk->ik", np.where(nonadj, coef, 0.0), diff)
    return forces


def repulsion_potential(pos, exponent: float = 5.0, strength: float = 1.0) -> float:
    """Potential whose negative gradient is `repulsion_forces`.

    U = sum over non-adjacent pairs of strength / ((e-1) r^(e-1)).
    """
    p = _as_points(pos)
    n = len(p)
    total = 0.0
    em1 = exponent - 1.0
    for s in range(0, n, _BLOCK):
        e = min(s + _BLOCK, n)
        diff = p[s:e, None, :] - p[None, :, :]
        r2 = np.einsum("ijk,ijk->ij", diff, diff)
        rows = np.arange(s, e)[:, None]
        cols = np.arange(n)[None, :]
        sep = cols - rows
        mask = (cols > rows) & (sep >= 2) & ~((rows == 0) & (cols == n - 1))
        vals = r2[mask]
        if np.any(vals == 0.0):
            raise CoincidentPointsError("coincident beads in potential sum")
        if exponent == 5.0:
            total += float(np.sum(strength / (em1 * vals * vals)))
        else:
            total += float(np.sum(strength / (em1 * vals ** (0.5 * em1))))
    return total


def spring_forces(pos, k: float, rest: float) -> np.ndarray:
    """Hooke forces on each cyclic edge toward length `rest`."""
    p = _as_points(pos)
    edges = np.roll(p, -1, axis=0) - p
    length = np.linalg.norm(edges, axis=1)
    if np.any(length == 0.0):
        raise CoincidentPointsError("zero-length edge in spring sum")
    coef = k * (length - rest) / length
    pull = coef[:, None] * edges
    return pull - np.roll(pull, 1, axis=0)


def spring_potential(pos, k: float, rest: float) -> float:
    p = _as_points(pos)
    length = np.linalg.norm(np.roll(p, -1, axis=0) - p, axis=1)
    return float(0.5 * k * np.sum((length - rest) ** 2))


def _segment_pairs_distance(p1, q1, p2, q2):
    """Vectorized minimum distance between segment batches [p1,q1], [p2,q2]."""
    d1 = q1 - p1
    d2 = q2 - p2
    r = p1 - p2
    a = np.einsum("ij,ij->i", d1, d1)
    e = np.einsum("ij,ij->i", d2, d2)
    b = np.einsum("ij,ij->i", d1, d2)
    c = np.einsum("ij,ij->i", d1, r)
    f = np.einsum("ij,ij->i", d2, r)
    denom = a * e - b * b
    s = np.where(denom > 1e-30, np.clip((b * f - c * e) / np.where(denom > 1e-30, denom, 1.0), 0.0, 1.0), 0.0)
    t = np.where(e > 1e-30, (b * s + f) / np.where(e > 1e-30, e, 1.0), 0.0)
    tc = np.clip(t, 0.0, 1.0)
    s = np.where(a > 1e-30, np.clip((b * tc - c) / np.where(a > 1e-30, a, 1.0), 0.0, 1.0), 0.0)
    closest = p1 + s[:, None] * d1 - (p2 + tc[:, None] * d2)
    return np.sqrt(np.einsum("ij,ij->i", closest, closest))


def _nonadjacent_segment_pairs(n):
    """Index arrays (i, j) over unordered non-adjacent cyclic segment pairs."""
    i, j = np.triu_indices(n, k=2)
    keep = ~((i == 0) & (j == n - 1))
    return i[keep], j[keep]


def min_segment_gap(pos) -> float:
    """Minimum distance between non-adjacent segments of the closed curve."""
    p = _as_points(pos)
    n = len(p)
    i, j = _nonadjacent_segment_pairs(n)
    if len(i) == 0:
        return float("inf")
    nxt = np.roll(np.arange(n), -1)
    best = np.inf
    for s in range(0, len(i), _BLOCK * _BLOCK):
        ii = i[s : s + _BLOCK * _BLOCK]
        jj = j[s : s + _BLOCK * _BLOCK]
        d = _segment_pairs_distance(p[ii], p[nxt[ii]], p[jj], p[nxt[jj]])
        best = min(best, float(d.min()))
    return best


def segment_clearances(pos) -> np.ndarray:
    """Per-segment minimum distance to any non-adjacent segment."""
    p = _as_points(pos)
    n = len(p)
    i, j = _nonadjacent_segment_pairs(n)
    clear = np.full(n, np.inf)
    if len(i) == 0:
        return clear
    nxt = np.roll(np.arange(n), -1)
    for s in range(0, len(i), _BLOCK * _BLOCK):
        ii = i[s : s + _BLOCK * _BLOCK]
        jj = j[s : s + _BLOCK * _BLOCK]
        d = _segment_pairs_distance(p[ii], p[nxt[ii]], p[jj], p[nxt[jj]])
        np.minimum.at(clear, ii, d)
        np.minimum.at(clear, jj, d)
    return clear


def _segment_distance_single(p1, q1, p2, q2) -> float:
    return float(
        _segment_pairs_distance(
            p1[None, :], q1[None, :], p2[None, :], q2[None, :]
        )[0]
    )


def _swept_pair(b, a, i, j, n, vel, eps_hit=1e-12, min_width=1e-7) -> bool:
    """Conservative crossing test for one moving segment pair on t in [0,1]."""
    i1, j1 = (i + 1) % n, (j + 1) % n

    def dist_at(t):
        bt = 1.0 - t
        return _segment_distance_single(
            bt * b[i] + t * a[i],
            bt * b[i1] + t * a[i1],
            bt * b[j] + t * a[j],
            bt * b[j1] + t * a[j1],
        )

    stack = [(0.0, 1.0)]
    while stack:
        t0, t1 = stack.pop()
        tm = 0.5 * (t0 + t1)
        dm = dist_at(tm)
        if dm <= eps_hit:
            return True
        if dm > vel * 0.5 * (t1 - t0):
            continue
        if t1 - t0 < min_width:
            return True  # unresolved at the budget: conservatively a hit
        stack.append((t0, tm))
        stack.append((tm, t1))
    return False


def swept_crossing(before, after) -> bool:
    """True if any non-adjacent segment pair of the linear interpolation
    between the two curves comes into contact at some t in [0, 1]."""
    b = _as_points(before)
    a = _as_points(after)
    n = len(b)
    if a.shape != b.shape:
        raise ValueError("curves must have equal bead counts")
    disp = np.linalg.norm(a - b, axis=1)
    nxt = np.roll(np.arange(n), -1)
    segvel = np.maximum(disp, disp[nxt])
    i, j = _nonadjacent_segment_pairs(n)
    if len(i) == 0:
        return False
    d0 = _segment_pairs_distance(b[i], b[nxt[i]], b[j], b[nxt[j]])
    vel = segvel[i] + segvel[j]
    for ii, jj, vv in zip(i[d0 <= vel], j[d0 <= vel], vel[d0 <= vel]):
        if _swept_pair(b, a, int(ii), int(jj), n, float(vv)):
            return True
    return False
