# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementation of the hot kernels.

Same contracts as `knotdyn.kernels._ref`; plain sequential loops give a
fixed accumulation order, so repeated calls are bitwise reproducible.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY as C_INF
from libc.math cimport fabs, pow, sqrt

from ..errors import CoincidentPointsError

cnp.import_array()


cdef inline bint _nonadjacent(Py_ssize_t i, Py_ssize_t j, Py_ssize_t n) nogil:
    cdef Py_ssize_t sep = j - i if j > i else i - j
    if n - sep < sep:
        sep = n - sep
    return sep >= 2


def simon_energy(pos, bint include_adjacent=True):
    cdef double[:, ::1] p = np.ascontiguousarray(pos, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0]
    cdef Py_ssize_t i, j
    cdef double dx, dy, dz, r, total = 0.0
    cdef bint bad = False
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                if not include_adjacent:
                    if j == i + 1 or (i == 0 and j == n - 1):
                        continue
                dx = p[i, 0] - p[j, 0]
                dy = p[i, 1] - p[j, 1]
                dz = p[i, 2] - p[j, 2]
                r = sqrt(dx * dx + dy * dy + dz * dz)
                if r == 0.0:
                    bad = True
                    break
                total += 1.0 / r
            if bad:
                break
    if bad:
        raise CoincidentPointsError("coincident beads in energy sum")
    return total


def repulsion_forces(pos, double exponent=5.0, double strength=1.0):
    cdef double[:, ::1] p = np.ascontiguousarray(pos, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0]
    out = np.zeros((n, 3), dtype=np.float64)
    cdef double[:, ::1] f = out
    cdef Py_ssize_t i, j
    cdef double dx, dy, dz, r2, c
    cdef double half_m = 0.5 * (exponent + 1.0)
    cdef bint fast6 = exponent == 5.0  # r^-6 needs no pow call
    cdef bint bad = False
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                if not _nonadjacent(i, j, n):
                    continue
                dx = p[i, 0] - p[j, 0]
                dy = p[i, 1] - p[j, 1]
                dz = p[i, 2] - p[j, 2]
                r2 = dx * dx + dy * dy + dz * dz
                if r2 == 0.0:
                    bad = True
                    break
                if fast6:
                    c = strength / (r2 * r2 * r2)
                else:
                    c = strength * pow(r2, -half_m)
                f[i, 0] += c * dx
                f[i, 1] += c * dy
                f[i, 2] += c * dz
                f[j, 0] -= c * dx
                f[j, 1] -= c * dy
                f[j, 2] -= c * dz
            if bad:
                break
    if bad:
        raise CoincidentPointsError("coincident beads in force sum")
    return out


def repulsion_potential(pos, double exponent=5.0, double strength=1.0):
    cdef double[:, ::1] p = np.ascontiguousarray(pos, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0]
    cdef Py_ssize_t i, j
    cdef double dx, dy, dz, r2, total = 0.0
    cdef double em1 = exponent - 1.0
    cdef double half_em1 = 0.5 * em1
    cdef bint fast4 = exponent == 5.0
    cdef bint bad = False
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                if not _nonadjacent(i, j, n):
                    continue
                dx = p[i, 0] - p[j, 0]
                dy = p[i, 1] - p[j, 1]
                dz = p[i, 2] - p[j, 2]
                r2 = dx * dx + dy * dy + dz * dz
                if r2 == 0.0:
                    bad = True
                    break
                if fast4:
                    total += strength / (em1 * r2 * r2)
                else:
                    total += strength / (em1 * pow(r2, half_em1))
            if bad:
                break
    if bad:
        raise CoincidentPointsError("coincident beads in potential sum")
    return total


def spring_forces(pos, double k, double rest):
    cdef double[:, ::1] p = np.ascontiguousarray(pos, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0]
    out = np.zeros((n, 3), dtype=np.float64)
    cdef double[:, ::1] f = out
    cdef Py_ssize_t i, j
    cdef double dx, dy, dz, r, c
    cdef bint bad = False
    for i in range(n):
        j = (i + 1) % n
        dx = p[j, 0] - p[i, 0]
        dy = p[j, 1] - p[i, 1]
        dz = p[j, 2] - p[i, 2]
        r = sqrt(dx * dx + dy * dy + dz * dz)
        if r == 0.0:
            bad = True
            break
        c = k * (r - rest) / r
        f[i, 0] += c * dx
        f[i, 1] += c * dy
        f[i, 2] += c * dz
        f[j, 0] -= c * dx
        f[j, 1] -= c * dy
        f[j, 2] -= c * dz
    if bad:
        raise CoincidentPointsError("zero-length edge in spring sum")
    return out


def spring_potential(pos, double k, double rest):
    cdef double[:, ::1] p = np.ascontiguousarray(pos, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0]
    cdef Py_ssize_t i, j
    cdef double dx, dy, dz, r, total = 0.0
    for i in range(n):
        j = (i + 1) % n
        dx = p[j, 0] - p[i, 0]
        dy = p[j, 1] - p[i, 1]
        dz = p[j, 2] - p[i, 2]
        r = sqrt(dx * dx + dy * dy + dz * dz)
        total += 0.5 * k * (r - rest) * (r - rest)
    return total


cdef double _seg_dist(const double* p1, const double* q1,
                      const double* p2, const double* q2) nogil:
    """Minimum distance between segments [p1,q1] and [p2,q2]."""
    cdef double d1x = q1[0] - p1[0], d1y = q1[1] - p1[1], d1z = q1[2] - p1[2]
    cdef double d2x = q2[0] - p2[0], d2y = q2[1] - p2[1], d2z = q2[2] - p2[2]
    cdef double rx = p1[0] - p2[0], ry = p1[1] - p2[1], rz = p1[2] - p2[2]
    cdef double a = d1x * d1x + d1y * d1y + d1z * d1z
    cdef double e = d2x * d2x + d2y * d2y + d2z * d2z
    cdef double b = d1x * d2x + d1y * d2y + d1z * d2z
    cdef double c = d1x * rx + d1y * ry + d1z * rz
    cdef double f = d2x * rx + d2y * ry + d2z * rz
    cdef double denom = a * e - b * b
    cdef double s = 0.0, t = 0.0
    if denom > 1e-30:
        s = (b * f - c * e) / denom
        if s < 0.0:
            s = 0.0
        elif s > 1.0:
            s = 1.0
    if e > 1e-30:
        t = (b * s + f) / e
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    if a > 1e-30:
        s = (b * t - c) / a
        if s < 0.0:
            s = 0.0
        elif s > 1.0:
            s = 1.0
    else:
        s = 0.0
    cdef double gx = p1[0] + s * d1x - (p2[0] + t * d2x)
    cdef double gy = p1[1] + s * d1y - (p2[1] + t * d2y)
    cdef double gz = p1[2] + s * d1z - (p2[2] + t * d2z)
    return sqrt(gx * gx + gy * gy + gz * gz)


def min_segment_gap(pos):
    cdef double[:, ::1] p = np.ascontiguousarray(pos, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0]
    mids_arr = np.empty((n, 3), dtype=np.float64)
    half_arr = np.empty(n, dtype=np.float64)
    cdef double[:, ::1] mids = mids_arr
    cdef double[::1] half = half_arr
    cdef Py_ssize_t i, j, i1, j1
    cdef double best = C_INF, d, mx, my, mz, reach
    with nogil:
        for i in range(n):
            i1 = (i + 1) % n
            mids[i, 0] = 0.5 * (p[i, 0] + p[i1, 0])
            mids[i, 1] = 0.5 * (p[i, 1] + p[i1, 1])
            mids[i, 2] = 0.5 * (p[i, 2] + p[i1, 2])
            mx = p[i1, 0] - p[i, 0]
            my = p[i1, 1] - p[i, 1]
            mz = p[i1, 2] - p[i, 2]
            half[i] = 0.5 * sqrt(mx * mx + my * my + mz * mz)
        for i in range(n):
            i1 = (i + 1) % n
            for j in range(i + 2, n):
                if i == 0 and j == n - 1:
                    continue
                # midpoint bound: skip pairs that cannot beat the best
                mx = mids[i, 0] - mids[j, 0]
                my = mids[i, 1] - mids[j, 1]
                mz = mids[i, 2] - mids[j, 2]
                reach = best + half[i] + half[j]
                if mx * mx + my * my + mz * mz >= reach * reach:
                    continue
                j1 = (j + 1) % n
                d = _seg_dist(&p[i, 0], &p[i1, 0], &p[j, 0], &p[j1, 0])
                if d < best:
                    best = d
    return best


def segment_clearances(pos):
    """Per-segment minimum distance to any non-adjacent segment."""
    cdef double[:, ::1] p = np.ascontiguousarray(pos, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0]
    mids_arr = np.empty((n, 3), dtype=np.float64)
    half_arr = np.empty(n, dtype=np.float64)
    out_arr = np.full(n, np.inf, dtype=np.float64)
    cdef double[:, ::1] mids = mids_arr
    cdef double[::1] half = half_arr
    cdef double[::1] clear = out_arr
    cdef Py_ssize_t i, j, i1, j1
    cdef double d, mx, my, mz, reach, cap
    with nogil:
        for i in range(n):
            i1 = (i + 1) % n
            mids[i, 0] = 0.5 * (p[i, 0] + p[i1, 0])
            mids[i, 1] = 0.5 * (p[i, 1] + p[i1, 1])
            mids[i, 2] = 0.5 * (p[i, 2] + p[i1, 2])
            mx = p[i1, 0] - p[i, 0]
            my = p[i1, 1] - p[i, 1]
            mz = p[i1, 2] - p[i, 2]
            half[i] = 0.5 * sqrt(mx * mx + my * my + mz * mz)
        for i in range(n):
            i1 = (i + 1) % n
            for j in range(i + 2, n):
                if i == 0 and j == n - 1:
                    continue
                mx = mids[i, 0] - mids[j, 0]
                my = mids[i, 1] - mids[j, 1]
                mz = mids[i, 2] - mids[j, 2]
                cap = clear[i] if clear[i] > clear[j] else clear[j]
                reach = cap + half[i] + half[j]
                if mx * mx + my * my + mz * mz >= reach * reach:
                    continue
                j1 = (j + 1) % n
                d = _seg_dist(&p[i, 0], &p[i1, 0], &p[j, 0], &p[j1, 0])
                if d < clear[i]:
                    clear[i] = d
                if d < clear[j]:
                    clear[j] = d
    return out_arr


cdef void _lerp(const double* b, const double* a, double t, double* out) nogil:
    out[0] = (1.0 - t) * b[0] + t * a[0]
    out[1] = (1.0 - t) * b[1] + t * a[1]
    out[2] = (1.0 - t) * b[2] + t * a[2]


cdef double _moving_dist(const double[:, ::1] b, const double[:, ::1] a,
                         Py_ssize_t i, Py_ssize_t i1,
                         Py_ssize_t j, Py_ssize_t j1, double t) nogil:
    cdef double pi[3]
    cdef double qi[3]
    cdef double pj[3]
    cdef double qj[3]
    _lerp(&b[i, 0], &a[i, 0], t, pi)
    _lerp(&b[i1, 0], &a[i1, 0], t, qi)
    _lerp(&b[j, 0], &a[j, 0], t, pj)
    _lerp(&b[j1, 0], &a[j1, 0], t, qj)
    return _seg_dist(pi, qi, pj, qj)


cdef bint _swept_pair(const double[:, ::1] b, const double[:, ::1] a,
                      Py_ssize_t i, Py_ssize_t j, Py_ssize_t n,
                      double vel) nogil:
    """Subdivision search for contact of a moving segment pair; conservative."""
    cdef double t0s[128]
    cdef double t1s[128]
    cdef int top = 0
    cdef double t0, t1, tm, dm
    cdef Py_ssize_t i1 = (i + 1) % n, j1 = (j + 1) % n
    t0s[0] = 0.0
    t1s[0] = 1.0
    top = 1
    while top > 0:
        top -= 1
        t0 = t0s[top]
        t1 = t1s[top]
        tm = 0.5 * (t0 + t1)
        dm = _moving_dist(b, a, i, i1, j, j1, tm)
        if dm <= 1e-12:
            return True
        if dm > vel * 0.5 * (t1 - t0):
            continue
        if t1 - t0 < 1e-7:
            return True  # unresolved: conservatively a hit
        if top + 2 > 128:
            return True
        t0s[top] = t0
        t1s[top] = tm
        top += 1
        t0s[top] = tm
        t1s[top] = t1
        top += 1
    return False


def swept_crossing(before, after):
    cdef double[:, ::1] b = np.ascontiguousarray(before, dtype=np.float64)
    cdef double[:, ::1] a = np.ascontiguousarray(after, dtype=np.float64)
    cdef Py_ssize_t n = b.shape[0]
    if a.shape[0] != n:
        raise ValueError("curves must have equal bead counts")
    disp_arr = np.linalg.norm(np.asarray(a) - np.asarray(b), axis=1)
    segvel_arr = np.maximum(disp_arr, np.roll(disp_arr, -1))
    cdef double[::1] segvel = np.ascontiguousarray(segvel_arr)
    mids_arr = 0.5 * (np.asarray(b) + np.roll(np.asarray(b), -1, axis=0))
    half_arr = 0.5 * np.linalg.norm(np.roll(np.asarray(b), -1, axis=0) - np.asarray(b), axis=1)
    cdef double[:, ::1] mids = np.ascontiguousarray(mids_arr)
    cdef double[::1] half = np.ascontiguousarray(half_arr)
    cdef Py_ssize_t i, j, i1, j1
    cdef double d0, vel, mx, my, mz, reach
    cdef bint hit = False
    with nogil:
        for i in range(n):
            i1 = (i + 1) % n
            for j in range(i + 2, n):
                if i == 0 and j == n - 1:
                    continue
                vel = segvel[i] + segvel[j]
                if vel == 0.0:
                    continue
                # midpoint bound on the static distance at t = 0
                mx = mids[i, 0] - mids[j, 0]
                my = mids[i, 1] - mids[j, 1]
                mz = mids[i, 2] - mids[j, 2]
                reach = vel + half[i] + half[j]
                if mx * mx + my * my + mz * mz > reach * reach:
                    continue
                j1 = (j + 1) % n
                d0 = _seg_dist(&b[i, 0], &b[i1, 0], &b[j, 0], &b[j1, 0])
                if d0 > vel:
                    continue
                if _swept_pair(b, a, i, j, n, vel):
                    hit = True
                    break
            if hit:
                break
    return bool(hit)


# ---------------------------------------------------------------------------
# Constraint algebra: cyclic tridiagonal solves without LAPACK overhead

from libc.stdlib cimport free, malloc


cdef int _solve_cyclic(double* lower, double* diag, double* upper,
                       double corner, double* rhs, double* x,
                       Py_ssize_t n, double* work) nogil:
    """Solve the cyclic tridiagonal system via Sherman-Morrison + Thomas.

    lower[i] = A[i, i-1], diag[i] = A[i, i], upper[i] = A[i, i+1],
    corner = A[0, n-1] = A[n-1, 0].  work needs 4n doubles.
    Returns 0 on success, 1 on a zero pivot.
    """
    cdef double* dmod = work
    cdef double* cp = work + n
    cdef double* y = work + 2 * n
    cdef double* z = work + 3 * n
    cdef Py_ssize_t i
    cdef double gamma = -diag[0]
    cdef double denom, fact
    for i in range(n):
        dmod[i] = diag[i]
    dmod[0] -= gamma
    dmod[n - 1] -= corner * corner / gamma
    # Thomas forward sweep shared by both right-hand sides
    if dmod[0] == 0.0:
        return 1
    cp[0] = upper[0] / dmod[0]
    y[0] = rhs[0] / dmod[0]
    z[0] = gamma / dmod[0]
    for i in range(1, n):
        denom = dmod[i] - lower[i] * cp[i - 1]
        if denom == 0.0:
            return 1
        cp[i] = upper[i] / denom
        y[i] = (rhs[i] - lower[i] * y[i - 1]) / denom
        z[i] = ((corner if i == n - 1 else 0.0) - lower[i] * z[i - 1]) / denom
    for i in range(n - 2, -1, -1):
        y[i] -= cp[i] * y[i + 1]
        z[i] -= cp[i] * z[i + 1]
    fact = (y[0] + corner / gamma * y[n - 1]) / (1.0 + z[0] + corner / gamma * z[n - 1])
    for i in range(n):
        x[i] = y[i] - fact * z[i]
    return 0


cdef void _edge_vectors(const double[:, ::1] p, double* d, Py_ssize_t n) nogil:
    cdef Py_ssize_t i, j
    for i in range(n):
        j = (i + 1) % n
        d[3 * i] = p[j, 0] - p[i, 0]
        d[3 * i + 1] = p[j, 1] - p[i, 1]
        d[3 * i + 2] = p[j, 2] - p[i, 2]


def project_edges(pos, double rest, double tol=1e-12, int max_sweeps=200):
    """Newton restoration of cyclic edge lengths (see kernels._project)."""
    p_arr = np.array(pos, dtype=np.float64, copy=True, order="C")
    cdef double[:, ::1] p = p_arr
    cdef Py_ssize_t n = p.shape[0]
    cdef double* d = <double*> malloc(3 * n * sizeof(double))
    cdef double* c = <double*> malloc(n * sizeof(double))
    cdef double* diag = <double*> malloc(n * sizeof(double))
    cdef double* lower = <double*> malloc(n * sizeof(double))
    cdef double* upper = <double*> malloc(n * sizeof(double))
    cdef double* mu = <double*> malloc(n * sizeof(double))
    cdef double* work = <double*> malloc(4 * n * sizeof(double))
    cdef double r2 = rest * rest
    cdef double worst, corner, residual
    cdef Py_ssize_t i, j, im
    cdef int iters = 0, status = 0
    try:
        with nogil:
            while iters < max_sweeps:
                iters += 1
                _edge_vectors(p, d, n)
                worst = 0.0
                for i in range(n):
                    c[i] = (d[3 * i] * d[3 * i] + d[3 * i + 1] * d[3 * i + 1]
                            + d[3 * i + 2] * d[3 * i + 2]) - r2
                    if fabs(c[i]) > worst:
                        worst = fabs(c[i])
                if worst <= 2.0 * tol * r2:
                    break
                for i in range(n):
                    j = (i + 1) % n
                    diag[i] = 4.0 * (d[3 * i] * d[3 * i] + d[3 * i + 1] * d[3 * i + 1]
                                     + d[3 * i + 2] * d[3 * i + 2])
                    upper[i] = -2.0 * (d[3 * i] * d[3 * j] + d[3 * i + 1] * d[3 * j + 1]
                                       + d[3 * i + 2] * d[3 * j + 2])
                for i in range(n):
                    lower[i] = upper[(i - 1) % n if i > 0 else n - 1]
                    c[i] = -c[i]
                corner = upper[n - 1]
                status = _solve_cyclic(lower, diag, upper, corner, c, mu, n, work)
                if status != 0:
                    break
                for i in range(n):
                    im = (i - 1) % n if i > 0 else n - 1
                    p[i, 0] += mu[im] * d[3 * im] - mu[i] * d[3 * i]
                    p[i, 1] += mu[im] * d[3 * im + 1] - mu[i] * d[3 * i + 1]
                    p[i, 2] += mu[im] * d[3 * im + 2] - mu[i] * d[3 * i + 2]
            _edge_vectors(p, d, n)
            residual = 0.0
            for i in range(n):
                worst = fabs(sqrt(d[3 * i] * d[3 * i] + d[3 * i + 1] * d[3 * i + 1]
                                  + d[3 * i + 2] * d[3 * i + 2]) - rest) / rest
                if worst > residual:
                    residual = worst
    finally:
        free(d); free(c); free(diag); free(lower); free(upper); free(mu); free(work)
    return p_arr, residual, iters


def tangent_project_forces(pos, forces):
    """Force field projected onto the equal-edge-length tangent space."""
    cdef double[:, ::1] p = np.ascontiguousarray(pos, dtype=np.float64)
    cdef double[:, ::1] f = np.ascontiguousarray(forces, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0]
    out_arr = np.array(forces, dtype=np.float64, copy=True, order="C")
    cdef double[:, ::1] out = out_arr
    cdef double* d = <double*> malloc(3 * n * sizeof(double))
    cdef double* g = <double*> malloc(n * sizeof(double))
    cdef double* diag = <double*> malloc(n * sizeof(double))
    cdef double* lower = <double*> malloc(n * sizeof(double))
    cdef double* upper = <double*> malloc(n * sizeof(double))
    cdef double* lam = <double*> malloc(n * sizeof(double))
    cdef double* work = <double*> malloc(4 * n * sizeof(double))
    cdef Py_ssize_t i, j, im
    cdef double corner
    cdef int status
    try:
        with nogil:
            _edge_vectors(p, d, n)
            for i in range(n):
                j = (i + 1) % n
                g[i] = -(d[3 * i] * (f[j, 0] - f[i, 0])
                         + d[3 * i + 1] * (f[j, 1] - f[i, 1])
                         + d[3 * i + 2] * (f[j, 2] - f[i, 2]))
                diag[i] = 2.0 * (d[3 * i] * d[3 * i] + d[3 * i + 1] * d[3 * i + 1]
                                 + d[3 * i + 2] * d[3 * i + 2])
                upper[i] = -(d[3 * i] * d[3 * j] + d[3 * i + 1] * d[3 * j + 1]
                             + d[3 * i + 2] * d[3 * j + 2])
            for i in range(n):
                lower[i] = upper[(i - 1) % n if i > 0 else n - 1]
            corner = upper[n - 1]
            status = _solve_cyclic(lower, diag, upper, corner, g, lam, n, work)
            if status == 0:
                for i in range(n):
                    im = (i - 1) % n if i > 0 else n - 1
                    out[i, 0] += lam[im] * d[3 * im] - lam[i] * d[3 * i]
                    out[i, 1] += lam[im] * d[3 * im + 1] - lam[i] * d[3 * i + 1]
                    out[i, 2] += lam[im] * d[3 * im + 2] - lam[i] * d[3 * i + 2]
    finally:
        free(d); free(g); free(diag); free(lower); free(upper); free(lam); free(work)
    return out_arr
