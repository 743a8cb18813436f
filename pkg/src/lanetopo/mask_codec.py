"""Encode centerlines as BEV instance masks and decode masks back to polylines.

A mask is a rows x cols probability grid over the ROI (rows index x, columns
index y) plus a four-way direction label. Decoding runs expectation-based
location estimation per row (up/down) or per column (left/right), fits a
quadratic over the resulting line points, and samples a fixed-size polyline.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import DecodeFailed, EmptyRasterization
from .geometry import (
    BezierCurve,
    DirectionLabel,
    Point3,
    Polyline3D,
    Roi,
    assign_direction_label,
    clip_to_roi,
    fit_quadratic,
)


@dataclass(frozen=True)
class GridSpec:
    """BEV grid geometry: rows cover the x extent, columns the y extent.

    The default 200 x 104 grid over the +-50 m x +-25 m ROI gives 0.5 m x
    ~0.48 m cells. Cell (r, c) is centered at
    (x_min + (r + 0.5) * cell_w, y_min + (c + 0.5) * cell_h).
    """

    rows: int = 200
    cols: int = 104
    roi: Roi = field(default_factory=Roi)

    def __post_init__(self):
        if self.rows < 2 or self.cols < 2:
            raise ValueError(f"grid needs >= 2 rows and cols, got {self.rows}x{self.cols}")

    @property
    def cell_width(self) -> float:
        """Cell extent along x."""
        return (self.roi.x_max - self.roi.x_min) / self.rows

    @property
    def cell_height(self) -> float:
        """Cell extent along y."""
        return (self.roi.y_max - self.roi.y_min) / self.cols

    def row_centers(self) -> np.ndarray:
        return self.roi.x_min + (np.arange(self.rows) + 0.5) * self.cell_width

    def col_centers(self) -> np.ndarray:
        return self.roi.y_min + (np.arange(self.cols) + 0.5) * self.cell_height

    def cell_of(self, x: float, y: float):
        """(row, col) of the cell containing (x, y), clamped onto the grid edge."""
        r = int(np.floor((x - self.roi.x_min) / self.cell_width))
        c = int(np.floor((y - self.roi.y_min) / self.cell_height))
        return min(max(r, 0), self.rows - 1), min(max(c, 0), self.cols - 1)


@dataclass(frozen=True)
class InstanceMask:
    """Per-instance probability grid with direction label and confidence."""

    probs: np.ndarray
    direction: DirectionLabel
    confidence: float = 1.0

    def __post_init__(self):
        arr = np.asarray(self.probs, dtype=float)
        if arr.ndim != 2:
            raise ValueError(f"mask must be 2D, got shape {arr.shape}")
        if not np.isfinite(arr).all() or arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("mask probabilities must be finite and within [0, 1]")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")
        object.__setattr__(self, "confidence", float(self.confidence))
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "probs", arr)

    @property
    def shape(self):
        return self.probs.shape


@dataclass(frozen=True)
class DecodeConfig:
    """Thresholds governing mask decoding."""

    row_valid_threshold: float = 0.5
    cell_mass_floor: float = 0.05
    sample_count: int = 11
    min_valid_lines: int = 3

    def __post_init__(self):
        if not 0.0 < self.cell_mass_floor <= self.row_valid_threshold <= 1.0:
            raise ValueError(
                f"need 0 < cell_mass_floor <= row_valid_threshold <= 1, got "
                f"{self.cell_mass_floor} / {self.row_valid_threshold}"
            )
        if self.sample_count < 2:
            raise ValueError(f"sample_count must be >= 2, got {self.sample_count}")
        if self.min_valid_lines < 2:
            raise ValueError(f"min_valid_lines must be >= 2, got {self.min_valid_lines}")


class FusionPolicy(enum.Enum):
    """How to combine the mask and Bezier branches of one instance."""

    MASK_ONLY = "mask"
    BEZIER_ONLY = "bezier"
    DIRECTIONAL_FUSION = "fusion"

    @classmethod
    def from_string(cls, s: str) -> "FusionPolicy":
        try:
            return cls(s.strip().lower())
        except ValueError:
            raise ValueError(f"unknown fusion policy {s!r}") from None


def rasterize_centerline(p: Polyline3D, grid: GridSpec, thickness: float = 1.0) -> InstanceMask:
    """Paint a binary instance mask for one centerline.

    With thickness > 0 every cell whose center lies within thickness/2 of the
    polyline (in the ground plane) is marked. Thickness 0 falls back to a
    supercover trace that marks every cell the curve passes through. The
    direction label comes from the input polyline; confidence is 1.
    """
    if thickness < 0.0:
        raise ValueError(f"thickness must be >= 0, got {thickness}")
    pieces = clip_to_roi(p, grid.roi)
    if not pieces:
        raise EmptyRasterization("polyline leaves no trace inside the grid ROI")

    marked = np.zeros((grid.rows, grid.cols), dtype=bool)
    if thickness > 0.0:
        xs = grid.row_centers()
        ys = grid.col_centers()
        half = thickness / 2.0
        for piece in pieces:
            xy = piece.xyz[:, :2]
            for a, b in zip(xy[:-1], xy[1:]):
                # only cells inside the segment's inflated bounding box can be hit
                r0 = int(np.searchsorted(xs, min(a[0], b[0]) - half, side="left"))
                r1 = int(np.searchsorted(xs, max(a[0], b[0]) + half, side="right"))
                c0 = int(np.searchsorted(ys, min(a[1], b[1]) - half, side="left"))
                c1 = int(np.searchsorted(ys, max(a[1], b[1]) + half, side="right"))
                if r0 >= r1 or c0 >= c1:
                    continue
                sub = np.stack(np.meshgrid(xs[r0:r1], ys[c0:c1], indexing="ij"), axis=-1).reshape(-1, 2)
                close = _dist_to_segment(sub, a, b) <= half
                marked[r0:r1, c0:c1] |= close.reshape(r1 - r0, c1 - c0)
    else:
        step = 0.25 * min(grid.cell_width, grid.cell_height)
        for piece in pieces:
            for sample in _walk_polyline(piece.xyz[:, :2], step):
                r, c = grid.cell_of(sample[0], sample[1])
                marked[r, c] = True

    if not marked.any():
        raise EmptyRasterization("no cell center within reach of the polyline")
    return InstanceMask(
        probs=marked.astype(float),
        direction=assign_direction_label(p),
        confidence=1.0,
    )


def _dist_to_segment(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Euclidean distance from each 2D point to segment a->b."""
    d = b - a
    denom = float(d @ d)
    if denom == 0.0:
        return np.linalg.norm(points - a, axis=1)
    t = np.clip((points - a) @ d / denom, 0.0, 1.0)
    closest = a + t[:, None] * d
    return np.linalg.norm(points - closest, axis=1)


def _walk_polyline(xy: np.ndarray, step: float):
    """Yield points along the polyline at most `step` apart, vertices included."""
    for a, b in zip(xy[:-1], xy[1:]):
        seg_len = float(np.linalg.norm(b - a))
        n = max(int(np.ceil(seg_len / step)), 1)
        for t in np.linspace(0.0, 1.0, n + 1)[:-1]:
            yield a + t * (b - a)
    yield xy[-1]


def decode_mask(mask: InstanceMask, grid: GridSpec, cfg: DecodeConfig | None = None) -> Polyline3D:
    """Decode an instance mask to an ordered fixed-size polyline (z = 0).

    Up/down masks produce one point per valid row (row max probability above
    the validity threshold): x at the row center, y as the mass-weighted
    expectation over the row's columns, ignoring cells below the mass floor.
    Left/right masks transpose the roles. A quadratic is fitted over the line
    points and sample_count points are drawn uniformly over the valid span,
    ordered according to the direction label.
    """
    cfg = cfg or DecodeConfig()
    probs = np.asarray(mask.probs, dtype=float)
    if probs.shape != (grid.rows, grid.cols):
        raise ValueError(f"mask shape {probs.shape} does not match grid {grid.rows}x{grid.cols}")

    longitudinal = mask.direction.is_longitudinal
    if longitudinal:
        line_centers, dep_centers = grid.row_centers(), grid.col_centers()
    else:
        line_centers, dep_centers = grid.col_centers(), grid.row_centers()
        probs = probs.T

    valid = probs.max(axis=1) >= cfg.row_valid_threshold
    n_valid = int(valid.sum())
    if n_valid < cfg.min_valid_lines:
        raise DecodeFailed(
            f"{n_valid} valid lines < required {cfg.min_valid_lines}",
            confidence=mask.confidence,
        )

    weights = np.where(probs[valid] >= cfg.cell_mass_floor, probs[valid], 0.0)
    dep = (weights @ dep_centers) / weights.sum(axis=1)
    indep = line_centers[valid]

    fit = fit_quadratic(np.column_stack([indep, dep]), axis_role="x" if longitudinal else "y")
    ts = np.linspace(indep.min(), indep.max(), cfg.sample_count)
    if mask.direction in (DirectionLabel.DOWN, DirectionLabel.RIGHT):
        ts = ts[::-1]
    values = fit(ts)
    zeros = np.zeros_like(ts)
    if longitudinal:
        pts = np.column_stack([ts, values, zeros])
    else:
        pts = np.column_stack([values, ts, zeros])
    return Polyline3D(pts)


def fuse_predictions(
    mask_poly: Polyline3D | None,
    bezier_poly: Polyline3D,
    label: DirectionLabel,
    policy: FusionPolicy,
) -> Polyline3D:
    """Select the mask or Bezier branch for one instance.

    ``mask_poly`` is None when mask decoding failed; policies that require the
    mask branch re-raise DecodeFailed in that case.
    """
    if policy is FusionPolicy.BEZIER_ONLY:
        return bezier_poly
    if policy is FusionPolicy.DIRECTIONAL_FUSION and not label.is_longitudinal:
        return bezier_poly
    if mask_poly is None:
        raise DecodeFailed(f"mask branch unavailable under policy {policy.value}")
    return mask_poly


def fix_bezier_endpoints(control_points, start: Point3, end: Point3) -> BezierCurve:
    """Clamp a 5-point control polygon to the given start/end points."""
    arr = np.array([p.as_array() if isinstance(p, Point3) else np.asarray(p, float) for p in control_points])
    if arr.shape != (5, 3):
        raise ValueError(f"expected 5 control points, got shape {arr.shape}")
    arr = arr.copy()
    arr[0] = start.as_array() if isinstance(start, Point3) else np.asarray(start, float)
    arr[4] = end.as_array() if isinstance(end, Point3) else np.asarray(end, float)
    return BezierCurve(arr)
