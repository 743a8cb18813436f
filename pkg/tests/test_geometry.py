import numpy as np
import pytest

from lanetopo.errors import InsufficientSamples, InvalidPolyline, InvalidSampleCount
from lanetopo.geometry import (
    BezierCurve,
    DirectionLabel,
    Point3,
    Polyline3D,
    QuadraticFit,
    Roi,
    assign_direction_label,
    bezier_sample,
    clip_to_roi,
    fit_quadratic,
    order_points,
    resample_polyline,
)


def line(*pts):
    return Polyline3D(np.array(pts, dtype=float))


class TestPoint3:
    def test_fields_and_default_z(self):
        p = Point3(1.0, 2.0)
        assert (p.x, p.y, p.z) == (1.0, 2.0, 0.0)
        assert np.array_equal(p.as_array(), [1.0, 2.0, 0.0])

    @pytest.mark.parametrize("bad", [float("nan"), float("inf"), -float("inf")])
    def test_rejects_non_finite(self, bad):
        with pytest.raises(InvalidPolyline):
            Point3(bad, 0.0, 0.0)


class TestDirectionLabel:
    @pytest.mark.parametrize("s,expected", [
        ("up", DirectionLabel.UP),
        ("Down", DirectionLabel.DOWN),
        ("LEFT", DirectionLabel.LEFT),
        (" right ", DirectionLabel.RIGHT),
    ])
    def test_from_string_case_insensitive(self, s, expected):
        assert DirectionLabel.from_string(s) is expected

    def test_from_string_unknown(self):
        with pytest.raises(ValueError, match="unknown direction"):
            DirectionLabel.from_string("north")

    def test_is_longitudinal(self):
        assert DirectionLabel.UP.is_longitudinal
        assert DirectionLabel.DOWN.is_longitudinal
        assert not DirectionLabel.LEFT.is_longitudinal
        assert not DirectionLabel.RIGHT.is_longitudinal


class TestPolyline3D:
    def test_requires_two_points(self):
        with pytest.raises(InvalidPolyline):
            Polyline3D(np.array([[0.0, 0.0, 0.0]]))

    def test_rejects_consecutive_duplicates(self):
        with pytest.raises(InvalidPolyline, match="zero-length"):
            line([0, 0, 0], [0, 0, 0], [1, 0, 0])

    def test_duplicates_allowed_when_unchecked(self):
        p = Polyline3D(np.zeros((3, 3)), check_segments=False)
        assert len(p) == 3

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidPolyline):
            line([0, 0, 0], [np.nan, 1, 0])

    def test_rejects_bad_shape(self):
        with pytest.raises(InvalidPolyline):
            Polyline3D(np.zeros((3, 2)))

    def test_xyz_read_only(self):
        p = line([0, 0, 0], [1, 0, 0])
        with pytest.raises(ValueError):
            p.xyz[0, 0] = 5.0

    def test_accepts_point3_list(self):
        p = Polyline3D([Point3(0, 0, 0), Point3(1, 1, 1)])
        assert np.array_equal(p.xyz, [[0, 0, 0], [1, 1, 1]])

    def test_len_getitem_eq(self):
        p = line([0, 0, 0], [1, 2, 3])
        assert len(p) == 2
        assert p[1] == Point3(1.0, 2.0, 3.0)
        assert p == line([0, 0, 0], [1, 2, 3])
        assert p != line([0, 0, 0], [1, 2, 4])

    def test_reverse(self):
        p = line([0, 0, 0], [1, 0, 0], [2, 1, 0])
        assert np.array_equal(p.reverse().xyz, p.xyz[::-1])

    def test_length(self):
        p = line([0, 0, 0], [3, 0, 0], [3, 4, 0])
        assert p.length() == pytest.approx(7.0)


class TestAssignDirectionLabel:
    @pytest.mark.parametrize("last,expected", [
        ((10.0, 2.0), DirectionLabel.UP),
        ((-10.0, 2.0), DirectionLabel.DOWN),
        ((2.0, 10.0), DirectionLabel.LEFT),
        ((2.0, -10.0), DirectionLabel.RIGHT),
    ])
    def test_dominant_axis_and_sign(self, last, expected):
        p = line([0, 0, 0], [last[0], last[1], 0])
        assert assign_direction_label(p) is expected

    def test_tie_goes_longitudinal(self):
        assert assign_direction_label(line([0, 0, 0], [3, 3, 0])) is DirectionLabel.UP
        assert assign_direction_label(line([0, 0, 0], [-3, 3, 0])) is DirectionLabel.DOWN

    def test_only_net_displacement_matters(self):
        # wild interior detours do not change the label
        p = line([0, 0, 0], [5, 40, 0], [-20, -3, 0], [10, 1, 0])
        assert assign_direction_label(p) is DirectionLabel.UP

    def test_needs_two_points(self):
        with pytest.raises(InvalidPolyline):
            assign_direction_label(np.array([[0.0, 0.0, 0.0]]))


class TestOrderPoints:
    def test_up_sorts_x_ascending(self):
        p = order_points(np.array([[3, 0, 0], [1, 5, 0], [2, -1, 0]], float), DirectionLabel.UP)
        assert np.array_equal(p.xyz[:, 0], [1, 2, 3])

    def test_down_sorts_x_descending(self):
        p = order_points(np.array([[3, 0, 0], [1, 5, 0], [2, -1, 0]], float), DirectionLabel.DOWN)
        assert np.array_equal(p.xyz[:, 0], [3, 2, 1])

    def test_left_right_sort_y(self):
        pts = np.array([[0, 3, 0], [9, 1, 0], [4, 2, 0]], float)
        assert np.array_equal(order_points(pts, DirectionLabel.LEFT).xyz[:, 1], [1, 2, 3])
        assert np.array_equal(order_points(pts, DirectionLabel.RIGHT).xyz[:, 1], [3, 2, 1])

    def test_ties_break_on_other_axis_ascending(self):
        pts = np.array([[1, 7, 0], [1, 2, 0], [0, 5, 0]], float)
        out = order_points(pts, DirectionLabel.UP)
        assert np.array_equal(out.xyz, [[0, 5, 0], [1, 2, 0], [1, 7, 0]])

    def test_exact_duplicates_collapse(self):
        pts = np.array([[1, 1, 0], [0, 0, 0], [1, 1, 0]], float)
        assert len(order_points(pts, DirectionLabel.UP)) == 2

    def test_collapsing_to_one_point_is_an_error(self):
        pts = np.array([[1, 1, 0], [1, 1, 0]], float)
        with pytest.raises(InvalidPolyline):
            order_points(pts, DirectionLabel.UP)

    def test_random_sets_become_monotone(self):
        rng = np.random.default_rng(1234)
        for _ in range(50):
            pts = rng.uniform(-10, 10, size=(rng.integers(2, 30), 3))
            up = order_points(pts, DirectionLabel.UP).xyz
            assert (np.diff(up[:, 0]) >= 0).all()
            right = order_points(pts, DirectionLabel.RIGHT).xyz
            assert (np.diff(right[:, 1]) <= 0).all()
            # ordering permutes, never invents points
            assert {tuple(r) for r in up} <= {tuple(r) for r in pts}


def de_casteljau(cp, t):
    pts = cp.copy()
    for _ in range(4):
        pts = (1 - t) * pts[:-1] + t * pts[1:]
    return pts[0]


class TestBezier:
    def test_requires_five_control_points(self):
        with pytest.raises(InvalidPolyline):
            BezierCurve(np.zeros((4, 3)))

    def test_control_points_read_only(self):
        c = BezierCurve(np.arange(15, dtype=float).reshape(5, 3))
        with pytest.raises(ValueError):
            c.control_points[0, 0] = 9.0

    def test_sample_count_validation(self):
        c = BezierCurve(np.arange(15, dtype=float).reshape(5, 3))
        with pytest.raises(InvalidSampleCount):
            bezier_sample(c, 1)

    def test_endpoints_bitwise_exact(self):
        cp = np.array([[0.1, 0.2, 0], [1, 2, 0], [2, -1, 0], [3, 1, 0], [4.7, 0.3, 0]])
        s = bezier_sample(BezierCurve(cp), 11)
        assert (s.xyz[0] == cp[0]).all()
        assert (s.xyz[-1] == cp[4]).all()

    def test_matches_de_casteljau(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            cp = rng.uniform(-5, 5, size=(5, 3))
            n = int(rng.integers(2, 17))
            s = bezier_sample(BezierCurve(cp), n)
            ts = np.linspace(0.0, 1.0, n)
            for k in (0, n // 2, n - 1):
                assert np.allclose(s.xyz[k], de_casteljau(cp, ts[k]), atol=1e-12)

    def test_degenerate_curve_repeats_points(self):
        cp = np.tile([2.0, 3.0, 0.0], (5, 1))
        s = bezier_sample(BezierCurve(cp), 5)
        assert np.allclose(s.xyz, [[2.0, 3.0, 0.0]] * 5)

    def test_samples_inside_control_hull_box(self):
        rng = np.random.default_rng(21)
        for _ in range(25):
            cp = rng.uniform(-9, 9, size=(5, 3))
            s = bezier_sample(BezierCurve(cp), 11).xyz
            assert (s.min(axis=0) >= cp.min(axis=0) - 1e-9).all()
            assert (s.max(axis=0) <= cp.max(axis=0) + 1e-9).all()


class TestFitQuadratic:
    def test_recovers_exact_quadratic(self):
        rng = np.random.default_rng(99)
        for _ in range(30):
            a, b, c = rng.uniform(-2, 2, 3)
            t = np.sort(rng.uniform(-5, 5, 9))
            fit = fit_quadratic(np.column_stack([t, a * t * t + b * t + c]))
            assert fit.a == pytest.approx(a, abs=1e-8)
            assert fit.b == pytest.approx(b, abs=1e-8)
            assert fit.c == pytest.approx(c, abs=1e-8)

    def test_two_distinct_values_degrade_to_linear(self):
        fit = fit_quadratic([(0.0, 1.0), (2.0, 5.0)])
        assert fit.a == 0.0
        assert fit(0.0) == pytest.approx(1.0)
        assert fit(2.0) == pytest.approx(5.0)

    def test_one_distinct_value_degrades_to_constant_mean(self):
        fit = fit_quadratic([(1.0, 2.0), (1.0, 6.0)])
        assert (fit.a, fit.b) == (0.0, 0.0)
        assert fit.c == pytest.approx(4.0)

    def test_too_few_samples(self):
        with pytest.raises(InsufficientSamples):
            fit_quadratic([(0.0, 1.0)])

    def test_bad_shape(self):
        with pytest.raises(InsufficientSamples):
            fit_quadratic([(0.0, 1.0, 2.0)])

    def test_axis_role_stored(self):
        assert fit_quadratic([(0, 0), (1, 1), (2, 4)], axis_role="y").axis_role == "y"

    def test_quadratic_fit_rejects_non_finite(self):
        with pytest.raises(InvalidPolyline):
            QuadraticFit(np.nan, 0.0, 0.0)

    def test_callable_vectorized(self):
        fit = QuadraticFit(1.0, -2.0, 3.0)
        assert np.allclose(fit(np.array([0.0, 2.0])), [3.0, 3.0])


class TestResample:
    def test_count_and_exact_endpoints(self):
        p = line([0.1, 0.2, 0.3], [5.3, 1.7, -0.4], [9.9, 0.0, 1.1])
        out = resample_polyline(p, 7)
        assert len(out) == 7
        assert (out.xyz[0] == p.xyz[0]).all()
        assert (out.xyz[-1] == p.xyz[-1]).all()

    def test_uniform_arc_spacing_on_straight_line(self):
        p = line([0, 0, 0], [10, 0, 0])
        out = resample_polyline(p, 6).xyz
        assert np.allclose(np.diff(out[:, 0]), 2.0)
        assert out[:, 1:].sum() == 0.0

    def test_spacing_uniform_within_tolerance(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            pts = np.cumsum(rng.uniform(0.5, 2.0, size=(6, 3)), axis=0)
            out = resample_polyline(Polyline3D(pts), 15).xyz
            d = np.linalg.norm(np.diff(out, axis=0), axis=1)
            # chords across corners shorten, so spacing varies slightly
            assert d.max() - d.min() <= 0.35 * d.mean()

    def test_never_longer_than_original(self):
        rng = np.random.default_rng(6)
        for _ in range(30):
            pts = np.cumsum(rng.uniform(0.5, 2.0, size=(8, 3)), axis=0)
            p = Polyline3D(pts)
            assert resample_polyline(p, 25).length() <= p.length() + 1e-9

    def test_straight_line_length_preserved(self):
        p = line([0, 0, 0], [3, 4, 0])
        assert resample_polyline(p, 9).length() == pytest.approx(5.0, abs=1e-9)

    def test_count_validation(self):
        with pytest.raises(InvalidSampleCount):
            resample_polyline(line([0, 0, 0], [1, 0, 0]), 1)


class TestRoi:
    def test_defaults(self):
        roi = Roi()
        assert (roi.x_min, roi.x_max, roi.y_min, roi.y_max) == (-50.0, 50.0, -25.0, 25.0)

    def test_contains(self):
        roi = Roi()
        assert roi.contains(0, 0)
        assert roi.contains(50, 25)
        assert not roi.contains(50.01, 0)
        assert roi.contains(50.01, 0, tol=0.02)

    def test_degenerate_rejected(self):
        with pytest.raises(ValueError):
            Roi(1.0, 1.0, -1.0, 1.0)


class TestClipToRoi:
    ROI = Roi(-10.0, 10.0, -5.0, 5.0)

    def test_fully_inside_is_identity(self):
        p = line([-9, 0, 1], [0, 3, 2], [9, -4, 3])
        out = clip_to_roi(p, self.ROI)
        assert len(out) == 1
        assert np.array_equal(out[0].xyz, p.xyz)

    def test_crossing_cut_exactly_on_boundary(self):
        p = line([5, 0, 0], [15, 0, 10])
        (piece,) = clip_to_roi(p, self.ROI)
        assert piece.xyz[-1][0] == 10.0
        # z interpolates linearly along the cut segment
        assert piece.xyz[-1][2] == pytest.approx(5.0)

    def test_fully_outside_empty(self):
        assert clip_to_roi(line([11, 0, 0], [20, 0, 0]), self.ROI) == []

    def test_reentry_produces_two_pieces(self):
        p = line([-9, -4, 0], [-9, 9, 0], [9, 9, 0], [9, 4, 0])
        pieces = clip_to_roi(p, self.ROI)
        assert len(pieces) == 2
        assert pieces[0].xyz[-1][1] == 5.0
        assert pieces[1].xyz[0][1] == 5.0

    def test_single_point_graze_dropped(self):
        # touches the corner only at one parameter value
        p = line([-20, 5, 0], [-10, 15, 0])
        assert clip_to_roi(p, self.ROI) == []

    def test_boundary_run_kept(self):
        p = line([-3, 5, 0], [3, 5, 0])
        (piece,) = clip_to_roi(p, self.ROI)
        assert np.array_equal(piece.xyz, p.xyz)

    def test_random_clip_stays_inside(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            pts = rng.uniform(-15, 15, size=(rng.integers(2, 12), 3))
            try:
                p = Polyline3D(pts)
            except InvalidPolyline:
                continue
            for piece in clip_to_roi(p, self.ROI):
                assert all(self.ROI.contains(q[0], q[1], tol=1e-9) for q in piece.xyz)
                assert len(piece) >= 2
