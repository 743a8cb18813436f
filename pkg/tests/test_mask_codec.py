import numpy as np
import pytest

from lanetopo.errors import DecodeFailed, EmptyRasterization
from lanetopo.geometry import DirectionLabel, Point3, Polyline3D, Roi
from lanetopo.mask_codec import (
    DecodeConfig,
    FusionPolicy,
    GridSpec,
    InstanceMask,
    decode_mask,
    fix_bezier_endpoints,
    fuse_predictions,
    rasterize_centerline,
)

UNIT_GRID = GridSpec(rows=10, cols=10, roi=Roi(0.0, 10.0, 0.0, 10.0))


def line(*pts):
    return Polyline3D(np.array(pts, dtype=float))


class TestGridSpec:
    def test_default_cell_size(self):
        g = GridSpec()
        assert g.cell_width == pytest.approx(0.5)
        assert g.cell_height == pytest.approx(50.0 / 104.0)

    def test_centers(self):
        g = UNIT_GRID
        assert np.allclose(g.row_centers(), np.arange(10) + 0.5)
        assert np.allclose(g.col_centers(), np.arange(10) + 0.5)

    def test_cell_of(self):
        g = UNIT_GRID
        assert g.cell_of(0.1, 9.9) == (0, 9)
        assert g.cell_of(3.0, 4.999) == (3, 4)

    def test_cell_of_clamps_outside(self):
        g = UNIT_GRID
        assert g.cell_of(-5.0, -5.0) == (0, 0)
        assert g.cell_of(99.0, 99.0) == (9, 9)
        # exact upper boundary clamps to the last cell
        assert g.cell_of(10.0, 10.0) == (9, 9)

    def test_rejects_tiny_grid(self):
        with pytest.raises(ValueError):
            GridSpec(rows=1, cols=10)


class TestInstanceMask:
    def test_read_only(self):
        m = InstanceMask(np.zeros((4, 4)), DirectionLabel.UP)
        with pytest.raises(ValueError):
            m.probs[0, 0] = 1.0

    @pytest.mark.parametrize("bad", [np.full((3, 3), 1.5), np.full((3, 3), -0.1), np.full((3, 3), np.nan)])
    def test_rejects_out_of_range(self, bad):
        with pytest.raises(ValueError):
            InstanceMask(bad, DirectionLabel.UP)

    def test_rejects_wrong_ndim(self):
        with pytest.raises(ValueError):
            InstanceMask(np.zeros(5), DirectionLabel.UP)

    def test_rejects_bad_confidence(self):
        with pytest.raises(ValueError):
            InstanceMask(np.zeros((3, 3)), DirectionLabel.UP, confidence=1.2)


class TestDecodeConfig:
    def test_floor_above_threshold_rejected(self):
        with pytest.raises(ValueError):
            DecodeConfig(row_valid_threshold=0.3, cell_mass_floor=0.4)

    def test_zero_floor_rejected(self):
        with pytest.raises(ValueError):
            DecodeConfig(cell_mass_floor=0.0)

    def test_small_counts_rejected(self):
        with pytest.raises(ValueError):
            DecodeConfig(sample_count=1)
        with pytest.raises(ValueError):
            DecodeConfig(min_valid_lines=1)


class TestFusionPolicy:
    def test_from_string(self):
        assert FusionPolicy.from_string("Mask") is FusionPolicy.MASK_ONLY
        assert FusionPolicy.from_string(" FUSION ") is FusionPolicy.DIRECTIONAL_FUSION

    def test_unknown(self):
        with pytest.raises(ValueError, match="unknown fusion policy"):
            FusionPolicy.from_string("average")


class TestRasterize:
    def test_horizontal_lane_marks_one_column_band(self):
        m = rasterize_centerline(line([0.5, 2.5, 0], [9.5, 2.5, 0]), UNIT_GRID, thickness=1.0)
        expected = np.zeros((10, 10))
        expected[:, 2] = 1.0
        assert np.array_equal(m.probs, expected)
        assert m.direction is DirectionLabel.UP
        assert m.confidence == 1.0

    def test_thickness_reach_is_inclusive(self):
        # half-thickness 1.0 exactly reaches the neighbour column centers
        m = rasterize_centerline(line([0.5, 2.5, 0], [9.5, 2.5, 0]), UNIT_GRID, thickness=2.0)
        assert set(np.unique(np.nonzero(m.probs)[1])) == {1, 2, 3}

    def test_supercover_marks_traversed_cells(self):
        m = rasterize_centerline(line([0.5, 2.5, 0], [9.5, 2.5, 0]), UNIT_GRID, thickness=0.0)
        expected = np.zeros((10, 10))
        expected[:, 2] = 1.0
        assert np.array_equal(m.probs, expected)

    def test_mask_is_binary(self):
        rng = np.random.default_rng(31)
        for _ in range(10):
            pts = np.column_stack([
                np.sort(rng.uniform(0.5, 9.5, 5)),
                rng.uniform(0.5, 9.5, 5),
                np.zeros(5),
            ])
            try:
                m = rasterize_centerline(Polyline3D(pts), UNIT_GRID)
            except EmptyRasterization:
                continue
            assert set(np.unique(m.probs)) <= {0.0, 1.0}

    def test_direction_label_follows_polyline(self):
        m = rasterize_centerline(line([9.0, 5.0, 0], [1.0, 5.0, 0]), UNIT_GRID)
        assert m.direction is DirectionLabel.DOWN
        m = rasterize_centerline(line([5.0, 1.0, 0], [5.0, 9.0, 0]), UNIT_GRID)
        assert m.direction is DirectionLabel.LEFT

    def test_clips_before_painting(self):
        # half the lane lies outside; only the inside portion paints
        m = rasterize_centerline(line([-9.5, 2.5, 0], [9.5, 2.5, 0]), UNIT_GRID, thickness=0.0)
        assert m.probs.sum() == 10.0

    def test_outside_roi_raises(self):
        with pytest.raises(EmptyRasterization):
            rasterize_centerline(line([20, 20, 0], [30, 20, 0]), UNIT_GRID)

    def test_unreachable_cells_raises(self):
        # short segment far from every cell center with a hair-thin brush
        with pytest.raises(EmptyRasterization):
            rasterize_centerline(line([0.2, 0.2, 0], [0.21, 0.2, 0]), UNIT_GRID, thickness=0.01)

    def test_negative_thickness_rejected(self):
        with pytest.raises(ValueError):
            rasterize_centerline(line([1, 1, 0], [2, 1, 0]), UNIT_GRID, thickness=-1.0)


def build_expectation_mask(indep_rows, target_y, grid, direction=DirectionLabel.UP):
    """One mask row per entry: mass split over the two columns bracketing target_y.

    The split is chosen so the mass-weighted column-center expectation equals
    target_y exactly, which makes decode output an exact oracle.
    """
    probs = np.zeros((grid.rows, grid.cols))
    centers = grid.col_centers()
    for r, y in zip(indep_rows, target_y):
        j = int(np.searchsorted(centers, y)) - 1
        w_hi = (y - centers[j]) / (centers[j + 1] - centers[j])
        assert 0.05 <= 1.0 - w_hi and 0.05 <= w_hi <= 0.95, "oracle precondition"
        probs[r, j] = 1.0 - w_hi
        probs[r, j + 1] = w_hi
    return InstanceMask(probs, direction)


class TestDecode:
    def test_diagonal_one_hot(self):
        probs = np.eye(10)
        poly = decode_mask(InstanceMask(probs, DirectionLabel.UP), UNIT_GRID)
        assert len(poly) == 11
        assert poly.xyz[0][0] == 0.5 and poly.xyz[-1][0] == 9.5
        assert np.allclose(poly.xyz[:, 1], poly.xyz[:, 0], atol=1e-8)
        assert (poly.xyz[:, 2] == 0.0).all()

    def test_exact_quadratic_recovery(self):
        a, b, c = 0.05, -0.3, 5.0
        rows = np.arange(10)
        xs = rows + 0.5
        mask = build_expectation_mask(rows, a * xs * xs + b * xs + c, UNIT_GRID)
        poly = decode_mask(mask, UNIT_GRID)
        x, y = poly.xyz[:, 0], poly.xyz[:, 1]
        assert np.allclose(x, np.linspace(0.5, 9.5, 11))
        assert np.allclose(y, a * x * x + b * x + c, atol=1e-8)

    def test_mass_floor_excludes_faint_cells(self):
        probs = np.zeros((10, 10))
        for r in (2, 3, 4):
            probs[r, 6] = 0.5
            probs[r, 7] = 0.04  # below the 0.05 floor: contributes nothing
        poly = decode_mask(InstanceMask(probs, DirectionLabel.UP), UNIT_GRID)
        assert np.allclose(poly.xyz[:, 1], 6.5, atol=1e-9)

    def test_row_below_validity_threshold_skipped(self):
        probs = np.zeros((10, 10))
        for r in (2, 3, 4):
            probs[r, 5] = 1.0
        probs[8, 5] = 0.45  # max below 0.5: the row is not a line point
        poly = decode_mask(InstanceMask(probs, DirectionLabel.UP), UNIT_GRID)
        assert poly.xyz[:, 0].max() == pytest.approx(4.5)

    def test_span_limited_to_valid_lines(self):
        probs = np.zeros((10, 10))
        for r in (3, 4, 5, 6):
            probs[r, 2] = 1.0
        poly = decode_mask(InstanceMask(probs, DirectionLabel.UP), UNIT_GRID)
        assert poly.xyz[0][0] == pytest.approx(3.5)
        assert poly.xyz[-1][0] == pytest.approx(6.5)

    def test_down_is_exact_reverse_of_up(self):
        probs = np.eye(10)
        up = decode_mask(InstanceMask(probs, DirectionLabel.UP), UNIT_GRID)
        down = decode_mask(InstanceMask(probs, DirectionLabel.DOWN), UNIT_GRID)
        assert np.array_equal(down.xyz, up.xyz[::-1])

    def test_lateral_transposes_roles(self):
        probs = np.zeros((10, 10))
        probs[4, :] = 1.0  # all mass on row 4: a lane at constant x
        left = decode_mask(InstanceMask(probs, DirectionLabel.LEFT), UNIT_GRID)
        assert np.allclose(left.xyz[:, 0], 4.5, atol=1e-9)
        assert np.allclose(left.xyz[:, 1], np.linspace(0.5, 9.5, 11))
        right = decode_mask(InstanceMask(probs, DirectionLabel.RIGHT), UNIT_GRID)
        assert np.array_equal(right.xyz, left.xyz[::-1])

    def test_sample_count_config(self):
        poly = decode_mask(
            InstanceMask(np.eye(10), DirectionLabel.UP),
            UNIT_GRID,
            DecodeConfig(sample_count=5),
        )
        assert len(poly) == 5

    def test_too_few_valid_lines_fails_with_confidence(self):
        probs = np.zeros((10, 10))
        probs[1, 1] = 1.0
        probs[2, 2] = 1.0
        with pytest.raises(DecodeFailed) as err:
            decode_mask(InstanceMask(probs, DirectionLabel.UP, confidence=0.7), UNIT_GRID)
        assert err.value.confidence == 0.7

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="does not match grid"):
            decode_mask(InstanceMask(np.eye(8), DirectionLabel.UP), UNIT_GRID)

    def test_roundtrip_straight_lanes_within_half_cell(self):
        grid = GridSpec()
        rng = np.random.default_rng(17)
        for _ in range(20):
            y0 = rng.uniform(-20, 20)
            slope = rng.uniform(-0.1, 0.1)
            xs = np.linspace(-45, 45, 21)
            gt = Polyline3D(np.column_stack([xs, y0 + slope * xs, np.zeros_like(xs)]))
            decoded = decode_mask(rasterize_centerline(gt, grid), grid)
            err = np.abs(decoded.xyz[:, 1] - (y0 + slope * decoded.xyz[:, 0]))
            assert err.max() <= 0.5 * grid.cell_height


class TestFuse:
    MASK = line([0, 0, 0], [1, 0, 0])
    BEZ = line([0, 1, 0], [1, 1, 0])

    def test_bezier_only_always_bezier(self):
        out = fuse_predictions(self.MASK, self.BEZ, DirectionLabel.UP, FusionPolicy.BEZIER_ONLY)
        assert out is self.BEZ
        out = fuse_predictions(None, self.BEZ, DirectionLabel.LEFT, FusionPolicy.BEZIER_ONLY)
        assert out is self.BEZ

    def test_mask_only_uses_mask(self):
        out = fuse_predictions(self.MASK, self.BEZ, DirectionLabel.LEFT, FusionPolicy.MASK_ONLY)
        assert out is self.MASK

    def test_mask_only_fails_without_mask(self):
        with pytest.raises(DecodeFailed):
            fuse_predictions(None, self.BEZ, DirectionLabel.UP, FusionPolicy.MASK_ONLY)

    @pytest.mark.parametrize("label,expect_mask", [
        (DirectionLabel.UP, True),
        (DirectionLabel.DOWN, True),
        (DirectionLabel.LEFT, False),
        (DirectionLabel.RIGHT, False),
    ])
    def test_fusion_routes_by_direction(self, label, expect_mask):
        out = fuse_predictions(self.MASK, self.BEZ, label, FusionPolicy.DIRECTIONAL_FUSION)
        assert out is (self.MASK if expect_mask else self.BEZ)

    def test_fusion_lateral_survives_missing_mask(self):
        out = fuse_predictions(None, self.BEZ, DirectionLabel.RIGHT, FusionPolicy.DIRECTIONAL_FUSION)
        assert out is self.BEZ

    def test_fusion_longitudinal_needs_mask(self):
        with pytest.raises(DecodeFailed):
            fuse_predictions(None, self.BEZ, DirectionLabel.UP, FusionPolicy.DIRECTIONAL_FUSION)


class TestFixBezierEndpoints:
    def test_clamps_both_ends(self):
        cp = np.arange(15, dtype=float).reshape(5, 3)
        out = fix_bezier_endpoints(cp, Point3(-1, -2, -3), Point3(7, 8, 9))
        assert np.array_equal(out.control_points[0], [-1, -2, -3])
        assert np.array_equal(out.control_points[4], [7, 8, 9])
        assert np.array_equal(out.control_points[1:4], cp[1:4])

    def test_input_not_mutated(self):
        cp = np.arange(15, dtype=float).reshape(5, 3)
        before = cp.copy()
        fix_bezier_endpoints(cp, Point3(0, 0, 0), Point3(0, 0, 1))
        assert np.array_equal(cp, before)

    def test_wrong_count_rejected(self):
        with pytest.raises(ValueError):
            fix_bezier_endpoints(np.zeros((4, 3)), Point3(0, 0, 0), Point3(1, 0, 0))
