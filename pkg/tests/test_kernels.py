import math

import numpy as np
import pytest

from knotdyn import kernels
from knotdyn.curves import circle_curve, torus_knot_curve
from knotdyn.errors import CoincidentPointsError
from knotdyn.kernels import _ref

from .util import finite_difference_forces, random_embedded_loop

try:
    from knotdyn.kernels import _fast
except ImportError:
    _fast = None

BACKENDS = [_ref] + ([_fast] if _fast is not None else [])


@pytest.fixture(params=BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def backend(request):
    return request.param


class TestSimonEnergy:
    def test_triangle(self, backend):
        c = circle_curve(3, 1 / math.sqrt(3))
        assert backend.simon_energy(c.points) == pytest.approx(3.0, abs=1e-12)

    def test_square(self, backend):
        c = circle_curve(4, 1.0)
        assert backend.simon_energy(c.points) == pytest.approx(
            2 * math.sqrt(2) + 1, abs=1e-12
        )

    def test_scaling_law(self, backend):
        c = torus_knot_curve(2, 3, 60)
        e1 = backend.simon_energy(c.points)
        e2 = backend.simon_energy(2.5 * c.points)
        assert e2 == pytest.approx(e1 / 2.5, rel=1e-12)

    def test_adjacent_flag(self, backend):
        c = circle_curve(10, 1.0)
        full = backend.simon_energy(c.points, True)
        partial = backend.simon_energy(c.points, False)
        edge = np.linalg.norm(c.points[1] - c.points[0])
        assert full - partial == pytest.approx(10 / edge, rel=1e-12)

    def test_coincident_error(self, backend):
        pts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 0, 0]], float)
        with pytest.raises(CoincidentPointsError):
            backend.simon_energy(pts)


class TestRepulsionForces:
    def test_square_diagonal_pairs(self, backend):
        c = circle_curve(4, 1.0)
        f = backend.repulsion_forces(c.points, 5.0, 1.0)
        # only the two diagonal pairs interact, at distance 2: magnitude 2^-5
        mags = np.linalg.norm(f, axis=1)
        assert mags == pytest.approx(np.full(4, 2.0**-5), rel=1e-12)
        assert f[0] @ c.points[0] > 0  # pushes outward

    def test_net_force_zero(self, backend):
        rng = np.random.default_rng(3)
        c = random_embedded_loop(rng, 40)
        f = backend.repulsion_forces(c.points, 5.0, 1.0)
        assert np.abs(f.sum(axis=0)).max() <= 1e-10 * np.abs(f).sum()

    def test_matches_finite_differences(self, backend):
        rng = np.random.default_rng(11)
        for _ in range(3):
            c = random_embedded_loop(rng, 24)
            f = backend.repulsion_forces(c.points, 5.0, 1.0)
            h = 1e-6 * c.min_gap()
            fd = finite_difference_forces(
                lambda q: backend.repulsion_potential(q, 5.0, 1.0), c.points, h
            )
            assert np.abs(f - fd).max() <= 1e-6 * np.abs(f).max()

    def test_general_exponent_finite_differences(self, backend):
        rng = np.random.default_rng(12)
        c = random_embedded_loop(rng, 20)
        f = backend.repulsion_forces(c.points, 3.5, 2.0)
        h = 1e-6 * c.min_gap()
        fd = finite_difference_forces(
            lambda q: backend.repulsion_potential(q, 3.5, 2.0), c.points, h
        )
        assert np.abs(f - fd).max() <= 1e-6 * np.abs(f).max()


class TestSpringForces:
    def test_rest_state_is_force_free(self, backend):
        c = circle_curve(12, 1.0)
        rest = float(np.linalg.norm(c.points[1] - c.points[0]))
        f = backend.spring_forces(c.points, 2.0, rest)
        assert np.abs(f).max() < 1e-12

    def test_single_stretched_edge(self, backend):
        rest = 1.0
        pts = np.array(
            [[0, 0, 0], [2, 0, 0], [2, 1, 0], [0, 1, 0]], dtype=float
        )
        k = 3.0
        f = backend.spring_forces(pts, k, rest)
        # edge 0 has length 2 = 2*rest: endpoint pull k*rest along the edge
        assert f[0][0] == pytest.approx(k * rest, rel=1e-12)
        assert np.abs(f.sum(axis=0)).max() < 1e-12

    def test_matches_finite_differences(self, backend):
        rng = np.random.default_rng(21)
        c = random_embedded_loop(rng, 30)
        rest = c.total_length() / len(c)
        f = backend.spring_forces(c.points, 4.0, rest)
        fd = finite_difference_forces(
            lambda q: backend.spring_potential(q, 4.0, rest), c.points, 1e-7
        )
        assert np.abs(f - fd).max() <= 1e-6 * np.abs(f).max()


class TestMinSegmentGap:
    def test_square(self, backend):
        c = circle_curve(4, 1.0)
        assert backend.min_segment_gap(c.points) == pytest.approx(
            math.sqrt(2), rel=1e-12
        )

    def test_triangle_has_no_pairs(self, backend):
        c = circle_curve(3, 1.0)
        assert backend.min_segment_gap(c.points) == math.inf

    def test_backends_agree(self):
        if _fast is None:
            pytest.skip("compiled backend unavailable")
        rng = np.random.default_rng(5)
        for _ in range(5):
            c = random_embedded_loop(rng, 50)
            assert _fast.min_segment_gap(c.points) == pytest.approx(
                _ref.min_segment_gap(c.points), rel=1e-12
            )


class TestSweptCrossing:
    def test_identity_and_translation(self, backend):
        c = torus_knot_curve(2, 3, 80)
        assert backend.swept_crossing(c.points, c.points) is False
        assert backend.swept_crossing(c.points, c.points + np.array([5.0, 1.0, 2.0])) is False

    def test_strand_pass_through_detected(self, backend):
        # segment (1,0.5,0)-(-1,0.5,0) sweeps to y=-0.5 through the static
        # vertical segment (0,0,-1)-(0,0,1): they meet at the origin at t=0.5
        before = np.array(
            [
                [0, 0, -1.0],
                [0, 0, 1.0],
                [4, 0, 1.0],
                [4, 0.5, 0.0],
                [1, 0.5, 0.0],
                [-1, 0.5, 0.0],
                [-4, 0.5, 0.0],
                [-4, 0, -1.0],
            ]
        )
        after = before.copy()
        after[4] = [1, -0.5, 0.0]
        after[5] = [-1, -0.5, 0.0]
        assert backend.swept_crossing(before, after) is True

    def test_small_safe_wiggle(self, backend):
        c = torus_knot_curve(2, 3, 80)
        gap = backend.min_segment_gap(c.points)
        rng = np.random.default_rng(8)
        wiggle = rng.normal(size=c.points.shape)
        wiggle *= 0.1 * gap / np.abs(wiggle).max()
        assert backend.swept_crossing(c.points, c.points + wiggle) is False


class TestProjectEdges:
    def test_restores_edges_exactly(self):
        rng = np.random.default_rng(13)
        c = random_embedded_loop(rng, 60)
        rest = c.total_length() / len(c)
        noisy = c.points + rng.normal(scale=0.01 * rest, size=c.points.shape)
        out, residual, iters = kernels.project_edges(noisy, rest)
        assert residual < 1e-9
        lengths = np.linalg.norm(np.roll(out, -1, axis=0) - out, axis=1)
        assert np.abs(lengths - rest).max() / rest < 1e-9

    def test_uniform_stretch(self):
        c = circle_curve(100, 1.0)
        rest = c.total_length() / 100
        out, residual, iters = kernels.project_edges(c.points * 1.05, rest)
        assert residual < 1e-9
        assert iters < 20


class TestBackendEquivalence:
    def test_forces_and_energies_match(self):
        if _fast is None:
            pytest.skip("compiled backend unavailable")
        rng = np.random.default_rng(17)
        for beads in (20, 57, 130):
            c = random_embedded_loop(rng, beads)
            fa = _fast.repulsion_forces(c.points, 5.0, 1.0)
            fb = _ref.repulsion_forces(c.points, 5.0, 1.0)
            assert np.abs(fa - fb).max() <= 1e-10 * np.abs(fa).max()
            ea = _fast.simon_energy(c.points)
            eb = _ref.simon_energy(c.points)
            assert ea == pytest.approx(eb, rel=1e-12)
            pa = _fast.repulsion_potential(c.points)
            pb = _ref.repulsion_potential(c.points)
            assert pa == pytest.approx(pb, rel=1e-12)

    def test_swept_crossing_verdicts_match(self):
        if _fast is None:
            pytest.skip("compiled backend unavailable")
        rng = np.random.default_rng(23)
        c = random_embedded_loop(rng, 40)
        gap = _ref.min_segment_gap(c.points)
        for scale in (0.05, 0.3, 2.0):
            move = rng.normal(size=c.points.shape)
            move *= scale * gap / np.abs(move).max()
            assert _fast.swept_crossing(c.points, c.points + move) == _ref.swept_crossing(
                c.points, c.points + move
            )
