import math

import numpy as np
import pytest

from knotdyn import kernels
from knotdyn.curves import (
    EmbedParams,
    KnotCurve,
    circle_curve,
    resample_uniform,
    torus_knot_curve,
)
from knotdyn.errors import (
    DegenerateCurveError,
    MalformedFileError,
    ParameterRangeError,
)
from knotdyn.io import load_curve, save_curve


class TestCircle:
    def test_unit_side_triangle_energy(self):
        c = circle_curve(3, 1 / math.sqrt(3))
        assert kernels.simon_energy(c.points) == pytest.approx(3.0, abs=1e-12)

    def test_unit_radius_square_energy(self):
        c = circle_curve(4, 1.0)
        assert kernels.simon_energy(c.points) == pytest.approx(
            2 * math.sqrt(2) + 1, abs=1e-12
        )

    def test_range_errors(self):
        with pytest.raises(ParameterRangeError):
            circle_curve(2, 1.0)
        with pytest.raises(ParameterRangeError):
            circle_curve(10, 0.0)


class TestTorusKnot:
    @pytest.mark.parametrize("a,b", [(2, 3), (3, 2), (5, 2), (2, 5), (1, 1)])
    def test_closed_embedded_normalized(self, a, b):
        c = torus_knot_curve(a, b, 200)
        assert len(c) == 200
        assert c.is_embedded()
        assert c.total_length() == pytest.approx(1.0, rel=1e-12)

    def test_winding_numbers(self):
        a, b = 3, 2
        beads = 400
        t = 2 * np.pi * np.arange(beads) / beads
        c = torus_knot_curve(a, b, beads)
        pts = c.points
        # longitude angle winds b times
        lon = np.unwrap(np.arctan2(pts[:, 1], pts[:, 0]))
        lon_turns = (lon[-1] - lon[0] + (lon[1] - lon[0])) / (2 * np.pi)
        assert round(lon_turns) == b
        # meridian angle (position around the tube cross-section) winds a times
        scale = c.points  # length-normalized copy of the sampled formula
        radial = np.hypot(pts[:, 0], pts[:, 1])
        mer = np.unwrap(np.arctan2(pts[:, 2], radial - np.mean(radial)))
        mer_turns = (mer[-1] - mer[0] + (mer[1] - mer[0])) / (2 * np.pi)
        assert round(mer_turns) == a

    def test_symmetric_pair_same_bead_count(self):
        c1 = torus_knot_curve(2, 3, 200)
        c2 = torus_knot_curve(3, 2, 200)
        assert len(c1) == len(c2)

    def test_gcd_error(self):
        with pytest.raises(ParameterRangeError):
            torus_knot_curve(2, 4, 100)

    def test_radius_error(self):
        with pytest.raises(ParameterRangeError):
            torus_knot_curve(2, 3, 100, major_radius=1.0, tube_radius=1.5)


class TestResample:
    def test_circle_downsample_regular(self):
        r = resample_uniform(circle_curve(100, 1.0), 50)
        assert len(r) == 50
        el = r.edge_lengths()
        assert np.max(np.abs(el - el.mean())) / el.mean() < 1e-9
        radii = np.linalg.norm(r.points - r.points.mean(axis=0), axis=1)
        assert np.ptp(radii) < 1e-9

    def test_idempotent(self):
        c = torus_knot_curve(2, 3, 200)
        r1 = resample_uniform(c, 150)
        r2 = resample_uniform(r1, 150)
        assert np.abs(r2.points - r1.points).max() < 1e-9

    def test_length_preserved(self):
        c = torus_knot_curve(2, 3, 200)
        r = resample_uniform(c, 200)
        assert abs(r.total_length() / c.total_length() - 1) < 1e-6

    def test_edge_uniformity(self):
        c = torus_knot_curve(5, 2, 240)
        r = resample_uniform(c, 240)
        el = r.edge_lengths()
        assert np.max(np.abs(el - el.mean())) / el.mean() < 1e-9

    def test_min_size(self):
        with pytest.raises(ParameterRangeError):
            resample_uniform(circle_curve(10, 1.0), 2)


class TestKnotCurve:
    def test_rejects_tiny(self):
        with pytest.raises(DegenerateCurveError):
            KnotCurve([[0, 0, 0], [1, 0, 0]])

    def test_rejects_repeated_point(self):
        with pytest.raises(DegenerateCurveError):
            KnotCurve([[0, 0, 0], [0, 0, 0], [1, 0, 0], [0, 1, 0]])

    def test_rejects_self_intersection(self):
        # figure-eight path in the plane crosses itself at z = 0
        pts = [[0, 0, 0], [2, 2, 0], [2, 0, 0], [0, 2, 0]]
        with pytest.raises(DegenerateCurveError):
            KnotCurve(pts)


class TestEmbedParams:
    def test_validation(self):
        with pytest.raises(ParameterRangeError):
            EmbedParams(beads=5)
        with pytest.raises(ParameterRangeError):
            EmbedParams(strand_gap=0.6, cell_size=1.0)
        EmbedParams(beads=100, strand_gap=0.25, cell_size=1.0)


class TestCurveFiles:
    def test_round_trip_bitwise(self, tmp_path):
        c = torus_knot_curve(2, 3, 50)
        path = tmp_path / "curve.json"
        save_curve(c, path)
        back = load_curve(path)
        assert np.array_equal(back.points, c.points)

    def test_missing_format_key(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"points": [[0,0,0],[1,0,0],[0,1,0]]}')
        with pytest.raises(MalformedFileError):
            load_curve(path)

    def test_bad_json_reports_position(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"format": "knotcurve/1", ')
        with pytest.raises(MalformedFileError) as err:
            load_curve(path)
        assert "line" in str(err.value)

    def test_minimal_three_bead_curve(self, tmp_path):
        c = circle_curve(3, 1.0)
        path = tmp_path / "tri.json"
        save_curve(c, path)
        assert len(load_curve(path)) == 3
