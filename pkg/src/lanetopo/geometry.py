"""Polyline, Bezier, direction-label, and curve-fitting primitives.

All geometry lives in the vehicle frame: x forward (meters), y left, z up.
Values are immutable after construction and safe to share between threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientSamples, InvalidPolyline, InvalidSampleCount


@dataclass(frozen=True)
class Point3:
    """A single 3D point in the vehicle frame."""

    x: float
    y: float
    z: float = 0.0

    def __post_init__(self):
        for v in (self.x, self.y, self.z):
            if not np.isfinite(v):
                raise InvalidPolyline(f"non-finite coordinate {v!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)


class DirectionLabel(enum.Enum):
    """Four-way traffic-flow tag attached to each centerline instance."""

    UP = "up"
    DOWN = "down"
    LEFT = "left"
    RIGHT = "right"

    @classmethod
    def from_string(cls, s: str) -> "DirectionLabel":
        try:
            return cls(s.strip().lower())
        except ValueError:
            raise ValueError(f"unknown direction label {s!r}") from None

    @property
    def is_longitudinal(self) -> bool:
        """True for up/down (x-dominant) labels."""
        return self in (DirectionLabel.UP, DirectionLabel.DOWN)


class Polyline3D:
    """Ordered 3D point sequence; the order encodes traffic-flow direction.

    Backed by a read-only (n, 3) float64 array. At least 2 points; consecutive
    duplicates are rejected unless ``check_segments=False`` (sampling a
    degenerate curve legitimately repeats points).
    """

    __slots__ = ("_xyz",)

    def __init__(self, points, check_segments: bool = True):
        arr = _as_point_array(points)
        if arr.shape[0] < 2:
            raise InvalidPolyline(f"need >= 2 points, got {arr.shape[0]}")
        if not np.isfinite(arr).all():
            raise InvalidPolyline("non-finite coordinate in polyline")
        if check_segments:
            seg = np.linalg.norm(np.diff(arr, axis=0), axis=1)
            if (seg == 0.0).any():
                raise InvalidPolyline("zero-length segment (consecutive duplicate points)")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        self._xyz = arr

    @property
    def xyz(self) -> np.ndarray:
        """(n, 3) read-only coordinate array."""
        return self._xyz

    def __len__(self) -> int:
        return self._xyz.shape[0]

    def __getitem__(self, i) -> Point3:
        p = self._xyz[i]
        return Point3(float(p[0]), float(p[1]), float(p[2]))

    def __eq__(self, other) -> bool:
        return isinstance(other, Polyline3D) and np.array_equal(self._xyz, other._xyz)

    def __repr__(self) -> str:
        return f"Polyline3D({self._xyz.tolist()!r})"

    def reverse(self) -> "Polyline3D":
        return Polyline3D(self._xyz[::-1], check_segments=False)

    def length(self) -> float:
        """Total arc length."""
        return float(np.linalg.norm(np.diff(self._xyz, axis=0), axis=1).sum())


def _as_point_array(points) -> np.ndarray:
    """Coerce Point3 iterables / nested lists / arrays to an (n, 3) float array."""
    if isinstance(points, Polyline3D):
        return points.xyz
    if isinstance(points, np.ndarray):
        arr = points.astype(float, copy=True)
    else:
        rows = [p.as_array() if isinstance(p, Point3) else np.asarray(p, dtype=float) for p in points]
        arr = np.array(rows, dtype=float) if rows else np.empty((0, 3))
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise InvalidPolyline(f"expected (n, 3) points, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class BezierCurve:
    """Degree-4 Bernstein curve over exactly 5 control points.

    B(0) and B(1) coincide with the first and last control points.
    """

    control_points: np.ndarray

    def __post_init__(self):
        arr = _as_point_array(self.control_points)
        if arr.shape[0] != 5:
            raise InvalidPolyline(f"need exactly 5 control points, got {arr.shape[0]}")
        if not np.isfinite(arr).all():
            raise InvalidPolyline("non-finite control point")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "control_points", arr)


@dataclass(frozen=True)
class QuadraticFit:
    """dependent = a*t**2 + b*t + c, with t along the independent axis."""

    a: float
    b: float
    c: float
    axis_role: str = "x"  # which axis is independent

    def __post_init__(self):
        for v in (self.a, self.b, self.c):
            if not np.isfinite(v):
                raise InvalidPolyline(f"non-finite fit coefficient {v!r}")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self.a * t * t + self.b * t + self.c


@dataclass(frozen=True)
class Roi:
    """Axis-aligned evaluation region in the ground plane."""

    x_min: float = -50.0
    x_max: float = 50.0
    y_min: float = -25.0
    y_max: float = 25.0

    def __post_init__(self):
        # coerce to float so int-built instances serialize identically
        for name in ("x_min", "x_max", "y_min", "y_max"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(f"degenerate roi {self}")

    def contains(self, x: float, y: float, tol: float = 0.0) -> bool:
        return (
            self.x_min - tol <= x <= self.x_max + tol
            and self.y_min - tol <= y <= self.y_max + tol
        )


def assign_direction_label(points) -> DirectionLabel:
    """Pick the flow label from the dominant net displacement axis.

    Net displacement is last point minus first point; the axis with the larger
    absolute net displacement wins (ties go to x), and its sign selects the
    label: +x Up, -x Down, +y Left, -y Right.
    """
    arr = _as_point_array(points)
    if arr.shape[0] < 2:
        raise InvalidPolyline("direction label needs >= 2 points")
    dx = arr[-1, 0] - arr[0, 0]
    dy = arr[-1, 1] - arr[0, 1]
    if abs(dx) >= abs(dy):
        return DirectionLabel.UP if dx > 0 else DirectionLabel.DOWN
    return DirectionLabel.LEFT if dy > 0 else DirectionLabel.RIGHT


def order_points(points, label: DirectionLabel) -> Polyline3D:
    """Order an unordered point set along the axis dictated by the label.

    Up/Down sort by x (ascending/descending), Left/Right by y; ties break on
    the other horizontal axis ascending. Exact duplicates collapse to one point.
    """
    arr = _as_point_array(points)
    if arr.shape[0] < 2:
        raise InvalidPolyline("ordering needs >= 2 points")
    if label.is_longitudinal:
        primary, secondary = arr[:, 0], arr[:, 1]
        descending = label is DirectionLabel.DOWN
    else:
        primary, secondary = arr[:, 1], arr[:, 0]
        descending = label is DirectionLabel.RIGHT
    if descending:
        primary = -primary
    order = np.lexsort((secondary, primary))
    arr = arr[order]
    keep = np.concatenate([[True], np.any(np.diff(arr, axis=0) != 0.0, axis=1)])
    arr = arr[keep]
    if arr.shape[0] < 2:
        raise InvalidPolyline("ordering collapsed to fewer than 2 distinct points")
    return Polyline3D(arr)


# Binomial coefficients C(4, i) for the degree-4 Bernstein basis.
_BERNSTEIN4 = np.array([1.0, 4.0, 6.0, 4.0, 1.0])


def bezier_sample(curve: BezierCurve, n: int = 11) -> Polyline3D:
    """Sample the curve at n parameters uniform in t, endpoints included."""
    if n < 2:
        raise InvalidSampleCount(f"need n >= 2 samples, got {n}")
    t = np.linspace(0.0, 1.0, n)
    i = np.arange(5)
    # basis[k, i] = C(4,i) * t_k^i * (1-t_k)^(4-i)
    basis = _BERNSTEIN4 * np.power.outer(t, i) * np.power.outer(1.0 - t, 4 - i)
    pts = basis @ curve.control_points
    pts[0] = curve.control_points[0]
    pts[-1] = curve.control_points[4]
    return Polyline3D(pts, check_segments=False)


def fit_quadratic(samples, axis_role: str = "x") -> QuadraticFit:
    """Least-squares quadratic through (independent, dependent) pairs.

    With only 2 distinct independent values the fit degrades to linear (a=0),
    with 1 distinct value to a constant; fewer than 2 samples is an error.
    """
    arr = np.asarray(list(samples), dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InsufficientSamples(f"expected (n, 2) samples, got shape {arr.shape}")
    if arr.shape[0] < 2:
        raise InsufficientSamples(f"need >= 2 samples, got {arr.shape[0]}")
    t, y = arr[:, 0], arr[:, 1]
    n_distinct = np.unique(t).size
    if n_distinct >= 3:
        coeffs = np.polyfit(t, y, 2)
    elif n_distinct == 2:
        coeffs = np.concatenate([[0.0], np.polyfit(t, y, 1)])
    else:
        coeffs = np.array([0.0, 0.0, float(y.mean())])
    return QuadraticFit(float(coeffs[0]), float(coeffs[1]), float(coeffs[2]), axis_role)


def resample_polyline(p: Polyline3D, n: int) -> Polyline3D:
    """Resample to n points at uniform arc-length fractions; endpoints exact."""
    if n < 2:
        raise InvalidSampleCount(f"need n >= 2 samples, got {n}")
    xyz = p.xyz
    seg = np.linalg.norm(np.diff(xyz, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    total = s[-1]
    if total == 0.0:
        out = np.repeat(xyz[:1], n, axis=0)
    else:
        targets = np.linspace(0.0, total, n)
        out = np.column_stack([np.interp(targets, s, xyz[:, k]) for k in range(3)])
    out[0] = xyz[0]
    out[-1] = xyz[-1]
    return Polyline3D(out, check_segments=False)


def clip_to_roi(p: Polyline3D, roi: Roi) -> list[Polyline3D]:
    """Split a polyline into the maximal pieces inside the ROI rectangle.

    Boundary-crossing segments are cut at the exact rectangle intersection;
    z interpolates linearly along the cut segment. Fully-outside input gives
    an empty list. Pieces that reduce to a single touching point are dropped.
    """
    xyz = p.xyz
    x, y = xyz[:, 0], xyz[:, 1]
    if (
        x.min() >= roi.x_min and x.max() <= roi.x_max
        and y.min() >= roi.y_min and y.max() <= roi.y_max
    ):
        return [p]

    pieces: list[np.ndarray] = []
    chain: list[np.ndarray] = []

    def flush():
        nonlocal chain
        if len(chain) >= 2:
            pieces.append(np.array(chain))
        chain = []

    def joins(u: np.ndarray, v: np.ndarray) -> bool:
        return abs(u[0] - v[0]) <= 1e-12 and abs(u[1] - v[1]) <= 1e-12 and abs(u[2] - v[2]) <= 1e-12

    for a, b in zip(xyz[:-1], xyz[1:]):
        interval = _segment_roi_interval(a, b, roi)
        if interval is None:
            flush()
            continue
        t0, t1 = interval
        if t1 <= t0:
            continue  # grazing contact at a single point
        d = b - a
        # exact endpoints keep fully-inside polylines bit-identical
        pa = a if t0 == 0.0 else a + t0 * d
        pb = b if t1 == 1.0 else a + t1 * d
        if chain and joins(chain[-1], pa):
            chain.append(pb)
        else:
            flush()
            chain = [pa, pb]
        if t1 < 1.0:
            flush()
    flush()

    out = []
    for arr in pieces:
        keep = np.concatenate([[True], np.linalg.norm(np.diff(arr, axis=0), axis=1) > 0.0])
        arr = arr[keep]
        if arr.shape[0] >= 2:
            out.append(Polyline3D(arr))
    return out


def _segment_roi_interval(a: np.ndarray, b: np.ndarray, roi: Roi):
    """Liang-Barsky parameter interval of segment a->b inside the ROI, or None."""
    d = b - a
    t0, t1 = 0.0, 1.0
    for axis, lo, hi in ((0, roi.x_min, roi.x_max), (1, roi.y_min, roi.y_max)):
        p, q = d[axis], a[axis]
        if p == 0.0:
            if q < lo or q > hi:
                return None
            continue
        ta, tb = (lo - q) / p, (hi - q) / p
        if ta > tb:
            ta, tb = tb, ta
        t0, t1 = max(t0, ta), min(t1, tb)
        if t0 > t1:
            return None
    return t0, t1
