"""Scene and prediction interchange plus synthetic scene generation.

JSON serialization is canonical: keys sorted, compact separators, shortest
round-trip float repr, trailing newline. save -> load -> save is therefore
byte-identical. Batches are NDJSON, one frame per line.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import LaneTopoError, ParseError, ValidationError
from .geometry import BezierCurve, DirectionLabel, Polyline3D, Roi
from .mask_codec import GridSpec, InstanceMask
from .metrics import Box2D
from .topology import ScoreMatrix

# Traffic-element streams live far from lane streams in key space.
_TRAFFIC_STREAM_BASE = 1 << 20


@dataclass(frozen=True)
class Centerline:
    """One ground-truth lane centerline."""

    id: str
    polyline: Polyline3D


@dataclass(frozen=True)
class TrafficElement:
    """One ground-truth traffic element (image-space box with category)."""

    id: str
    box: Box2D


@dataclass(frozen=True)
class CenterlinePrediction:
    """One predicted centerline in one of four forms.

    Exactly one of: polyline, mask (with its grid), bezier, or mask + bezier
    (the fusion pair). `direction` optionally overrides the mask's label when
    fusing.
    """

    confidence: float
    polyline: Polyline3D | None = None
    mask: InstanceMask | None = None
    grid: GridSpec | None = None
    bezier: BezierCurve | None = None
    direction: DirectionLabel | None = None

    def __post_init__(self):
        if not (np.isfinite(self.confidence) and 0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")
        object.__setattr__(self, "confidence", float(self.confidence))
        forms = (self.polyline is not None, self.mask is not None, self.bezier is not None)
        if forms not in ((True, False, False), (False, True, False), (False, False, True), (False, True, True)):
            raise ValueError("prediction must carry polyline, mask, bezier, or mask+bezier")
        if self.mask is not None and self.grid is None:
            raise ValueError("mask prediction requires its grid")


@dataclass(frozen=True)
class TrafficPrediction:
    """One predicted traffic element."""

    confidence: float
    box: Box2D

    def __post_init__(self):
        if not (np.isfinite(self.confidence) and 0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")
        object.__setattr__(self, "confidence", float(self.confidence))


@dataclass
class Scene:
    """Ground truth for one frame: lanes, traffic elements, topology."""

    frame_id: str
    centerlines: list = field(default_factory=list)
    traffic_elements: list = field(default_factory=list)
    topology_ll: list = field(default_factory=list)  # (src lane id, dst lane id)
    topology_lt: list = field(default_factory=list)  # (lane id, traffic id)
    roi: Roi = field(default_factory=Roi)

    def validate(self):
        lane_ids = [c.id for c in self.centerlines]
        te_ids = [t.id for t in self.traffic_elements]
        if len(set(lane_ids)) != len(lane_ids):
            raise ValueError("duplicate centerline ids")
        if len(set(te_ids)) != len(te_ids):
            raise ValueError("duplicate traffic element ids")
        lanes, tes = set(lane_ids), set(te_ids)
        for a, b in self.topology_ll:
            if a not in lanes or b not in lanes:
                raise ValueError(f"topology_ll edge ({a!r}, {b!r}) references unknown centerline")
        for a, b in self.topology_lt:
            if a not in lanes or b not in tes:
                raise ValueError(f"topology_lt edge ({a!r}, {b!r}) references unknown id")


@dataclass
class PredictionSet:
    """Model output for one frame, aligned to a Scene by frame_id."""

    frame_id: str
    centerline_preds: list = field(default_factory=list)
    traffic_preds: list = field(default_factory=list)
    ll_scores: ScoreMatrix | None = None  # ids are centerline_preds indices
    lt_scores: ScoreMatrix | None = None  # rows: centerline, cols: traffic indices

    def validate(self):
        for name, scores, n_rows, n_cols in (
            ("ll_scores", self.ll_scores, len(self.centerline_preds), len(self.centerline_preds)),
            ("lt_scores", self.lt_scores, len(self.centerline_preds), len(self.traffic_preds)),
        ):
            if scores is None:
                continue
            for kind, ids, n in (("row", scores.row_ids, n_rows), ("col", scores.col_ids, n_cols)):
                for i in ids:
                    if not (isinstance(i, int) and 0 <= i < n):
                        raise ValueError(f"{name} {kind} id {i!r} is not a valid prediction index")


# ---------------------------------------------------------------------------
# Canonical JSON


def _dumps(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False) + "\n").encode("utf-8")


def _loads(data, line_offset: int = 0):
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ParseError("input is not valid UTF-8", line=1, column=e.start + 1) from e
    try:
        return json.loads(data)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, line=e.lineno + line_offset, column=e.colno) from e


def _obj(node, path: str) -> dict:
    if not isinstance(node, dict):
        raise ValidationError(path, f"expected object, got {type(node).__name__}")
    return node

def _lst(node, path: str) -> list:
    if not isinstance(node, list):
        raise ValidationError(path, f"expected array, got {type(node).__name__}")
    return node

def _str(node, path: str) -> str:
    if not isinstance(node, str):
        raise ValidationError(path, f"expected string, got {type(node).__name__}")
    return node

def _num(node, path: str) -> float:
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        raise ValidationError(path, f"expected number, got {type(node).__name__}")
    if not np.isfinite(node):
        raise ValidationError(path, f"non-finite number {node}")
    return float(node)

def _int(node, path: str) -> int:
    if isinstance(node, bool) or not isinstance(node, int):
        raise ValidationError(path, f"expected integer, got {type(node).__name__}")
    return node


def _require(obj: dict, keys, path: str):
    for k in keys:
        if k not in obj:
            raise ValidationError(path, f"missing key {k!r}")
    for k in obj:
        if k not in keys:
            raise ValidationError(f"{path}/{k}", "unknown key")


def _opt_keys(obj: dict, required, optional, path: str):
    for k in required:
        if k not in obj:
            raise ValidationError(path, f"missing key {k!r}")
    for k in obj:
        if k not in required and k not in optional:
            raise ValidationError(f"{path}/{k}", "unknown key")


def _wrap(path: str, fn, *args):
    try:
        return fn(*args)
    except (ValueError, LaneTopoError) as e:
        if isinstance(e, (ParseError, ValidationError)):
            raise
        raise ValidationError(path, str(e)) from e


def _points_from(node, path: str, min_points: int = 2) -> np.ndarray:
    rows = _lst(node, path)
    if len(rows) < min_points:
        raise ValidationError(path, f"need at least {min_points} points, got {len(rows)}")
    out = np.empty((len(rows), 3))
    for i, row in enumerate(rows):
        triple = _lst(row, f"{path}/{i}")
        if len(triple) != 3:
            raise ValidationError(f"{path}/{i}", f"expected [x, y, z], got {len(triple)} values")
        for k in range(3):
            out[i, k] = _num(triple[k], f"{path}/{i}/{k}")
    return out


def _roi_to_obj(roi: Roi) -> dict:
    return {"x_min": roi.x_min, "x_max": roi.x_max, "y_min": roi.y_min, "y_max": roi.y_max}


def _roi_from_obj(node, path: str) -> Roi:
    obj = _obj(node, path)
    _require(obj, ("x_min", "x_max", "y_min", "y_max"), path)
    vals = {k: _num(obj[k], f"{path}/{k}") for k in obj}
    return _wrap(path, Roi, vals["x_min"], vals["x_max"], vals["y_min"], vals["y_max"])


def _box_to_obj(box: Box2D) -> list:
    return [box.x1, box.y1, box.x2, box.y2]


def _box_from_obj(node, category: str, path: str) -> Box2D:
    vals = _lst(node, path)
    if len(vals) != 4:
        raise ValidationError(path, f"expected [x1, y1, x2, y2], got {len(vals)} values")
    nums = [_num(v, f"{path}/{i}") for i, v in enumerate(vals)]
    return _wrap(path, Box2D, *nums, category)


def _mask_to_obj(mask: InstanceMask, grid: GridSpec, rle: bool = False) -> dict:
    obj = {
        "rows": grid.rows,
        "cols": grid.cols,
        "roi": _roi_to_obj(grid.roi),
        "direction": mask.direction.value,
        "confidence": mask.confidence,
    }
    flat = mask.probs.reshape(-1)
    if rle:
        bounds = np.flatnonzero(np.diff(flat) != 0.0) + 1
        starts = np.concatenate([[0], bounds])
        ends = np.concatenate([bounds, [flat.size]])
        packed = []
        for s, e in zip(starts, ends):
            packed.extend((float(flat[s]), int(e - s)))
        obj["rle"] = packed
    else:
        obj["data"] = flat.tolist()
    return obj


def _mask_from_obj(node, path: str):
    obj = _obj(node, path)
    _opt_keys(obj, ("rows", "cols", "roi", "direction", "confidence"), ("data", "rle"), path)
    rows = _int(obj["rows"], f"{path}/rows")
    cols = _int(obj["cols"], f"{path}/cols")
    roi = _roi_from_obj(obj["roi"], f"{path}/roi")
    direction = _wrap(f"{path}/direction", DirectionLabel.from_string, _str(obj["direction"], f"{path}/direction"))
    confidence = _num(obj["confidence"], f"{path}/confidence")
    if ("data" in obj) == ("rle" in obj):
        raise ValidationError(path, "mask needs exactly one of 'data' or 'rle'")
    if "data" in obj:
        vals = _lst(obj["data"], f"{path}/data")
        if len(vals) != rows * cols:
            raise ValidationError(f"{path}/data", f"expected {rows * cols} values, got {len(vals)}")
        flat = np.array([_num(v, f"{path}/data/{i}") for i, v in enumerate(vals)])
    else:
        vals = _lst(obj["rle"], f"{path}/rle")
        if len(vals) % 2 != 0:
            raise ValidationError(f"{path}/rle", "expected (value, count) pairs")
        values = [_num(vals[i], f"{path}/rle/{i}") for i in range(0, len(vals), 2)]
        counts = [_int(vals[i], f"{path}/rle/{i}") for i in range(1, len(vals), 2)]
        if any(c <= 0 for c in counts):
            raise ValidationError(f"{path}/rle", "run counts must be positive")
        if sum(counts) != rows * cols:
            raise ValidationError(f"{path}/rle", f"runs cover {sum(counts)} cells, expected {rows * cols}")
        flat = np.repeat(values, counts)
    grid = _wrap(path, GridSpec, rows, cols, roi)
    mask = _wrap(path, InstanceMask, flat.reshape(rows, cols), direction, confidence)
    return mask, grid


def _scores_to_obj(scores: ScoreMatrix | None) -> dict:
    if scores is None:
        return {"rows": [], "cols": [], "values": []}
    return {
        "rows": list(scores.row_ids),
        "cols": list(scores.col_ids),
        "values": [list(row) for row in scores.values.tolist()],
    }


def _scores_from_obj(node, path: str) -> ScoreMatrix | None:
    obj = _obj(node, path)
    _require(obj, ("rows", "cols", "values"), path)
    row_ids = [_int(v, f"{path}/rows/{i}") for i, v in enumerate(_lst(obj["rows"], f"{path}/rows"))]
    col_ids = [_int(v, f"{path}/cols/{i}") for i, v in enumerate(_lst(obj["cols"], f"{path}/cols"))]
    rows = _lst(obj["values"], f"{path}/values")
    if len(rows) != len(row_ids):
        raise ValidationError(f"{path}/values", f"expected {len(row_ids)} rows, got {len(rows)}")
    values = np.zeros((len(row_ids), len(col_ids)))
    for i, row in enumerate(rows):
        vals = _lst(row, f"{path}/values/{i}")
        if len(vals) != len(col_ids):
            raise ValidationError(f"{path}/values/{i}", f"expected {len(col_ids)} columns, got {len(vals)}")
        for j, v in enumerate(vals):
            values[i, j] = _num(v, f"{path}/values/{i}/{j}")
    if not row_ids and not col_ids:
        return None
    return _wrap(path, ScoreMatrix, values, tuple(row_ids), tuple(col_ids))


# ---------------------------------------------------------------------------
# Scenes


def scene_to_obj(scene: Scene) -> dict:
    return {
        "frame_id": scene.frame_id,
        "roi": _roi_to_obj(scene.roi),
        "centerlines": [{"id": c.id, "points": c.polyline.xyz.tolist()} for c in scene.centerlines],
        "traffic_elements": [
            {"id": t.id, "category": t.box.category, "box": _box_to_obj(t.box)} for t in scene.traffic_elements
        ],
        "topology_ll": [[a, b] for a, b in scene.topology_ll],
        "topology_lt": [[a, b] for a, b in scene.topology_lt],
    }


def scene_from_obj(node, path: str = "") -> Scene:
    obj = _obj(node, path or "/")
    _require(obj, ("frame_id", "roi", "centerlines", "traffic_elements", "topology_ll", "topology_lt"), path or "/")
    frame_id = _str(obj["frame_id"], f"{path}/frame_id")
    roi = _roi_from_obj(obj["roi"], f"{path}/roi")

    centerlines, lane_ids = [], set()
    for i, node_c in enumerate(_lst(obj["centerlines"], f"{path}/centerlines")):
        p = f"{path}/centerlines/{i}"
        c = _obj(node_c, p)
        _require(c, ("id", "points"), p)
        cid = _str(c["id"], f"{p}/id")
        if cid in lane_ids:
            raise ValidationError(f"{p}/id", f"duplicate centerline id {cid!r}")
        lane_ids.add(cid)
        pts = _points_from(c["points"], f"{p}/points")
        centerlines.append(Centerline(cid, _wrap(f"{p}/points", Polyline3D, pts)))

    traffic, te_ids = [], set()
    for i, node_t in enumerate(_lst(obj["traffic_elements"], f"{path}/traffic_elements")):
        p = f"{path}/traffic_elements/{i}"
        t = _obj(node_t, p)
        _require(t, ("id", "category", "box"), p)
        tid = _str(t["id"], f"{p}/id")
        if tid in te_ids:
            raise ValidationError(f"{p}/id", f"duplicate traffic element id {tid!r}")
        te_ids.add(tid)
        box = _box_from_obj(t["box"], _str(t["category"], f"{p}/category"), f"{p}/box")
        traffic.append(TrafficElement(tid, box))

    def edges(key, dst_ids, dst_kind):
        out = []
        for i, node_e in enumerate(_lst(obj[key], f"{path}/{key}")):
            p = f"{path}/{key}/{i}"
            pair = _lst(node_e, p)
            if len(pair) != 2:
                raise ValidationError(p, f"expected [src, dst], got {len(pair)} values")
            a, b = _str(pair[0], f"{p}/0"), _str(pair[1], f"{p}/1")
            if a not in lane_ids:
                raise ValidationError(f"{p}/0", f"unknown centerline id {a!r}")
            if b not in dst_ids:
                raise ValidationError(f"{p}/1", f"unknown {dst_kind} id {b!r}")
            out.append((a, b))
        return out

    return Scene(
        frame_id=frame_id,
        centerlines=centerlines,
        traffic_elements=traffic,
        topology_ll=edges("topology_ll", lane_ids, "centerline"),
        topology_lt=edges("topology_lt", te_ids, "traffic element"),
        roi=roi,
    )


def save_scene(scene: Scene) -> bytes:
    return _dumps(scene_to_obj(scene))


def load_scene(data) -> Scene:
    return scene_from_obj(_loads(data))


def save_scenes(scenes) -> bytes:
    return b"".join(save_scene(s) for s in scenes)


def load_scenes(data) -> list:
    return _load_ndjson(data, scene_from_obj)


def _load_ndjson(data, from_obj) -> list:
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ParseError("input is not valid UTF-8", line=1, column=e.start + 1) from e
    out = []
    for lineno, line in enumerate(data.splitlines(), start=1):
        if not line.strip():
            continue
        node = _loads(line, line_offset=lineno - 1)
        try:
            out.append(from_obj(node))
        except ValidationError as e:
            raise ValidationError(f"line {lineno}:{e.path}", e.reason) from e
    return out


# ---------------------------------------------------------------------------
# Predictions


def prediction_to_obj(pred: PredictionSet, rle: bool = False) -> dict:
    cpreds = []
    for p in pred.centerline_preds:
        entry = {"confidence": p.confidence}
        if p.polyline is not None:
            entry["polyline"] = p.polyline.xyz.tolist()
        if p.mask is not None:
            entry["mask"] = _mask_to_obj(p.mask, p.grid, rle=rle)
        if p.bezier is not None:
            entry["bezier"] = p.bezier.control_points.tolist()
        if p.direction is not None:
            entry["direction"] = p.direction.value
        cpreds.append(entry)
    return {
        "frame_id": pred.frame_id,
        "centerline_preds": cpreds,
        "traffic_preds": [
            {"confidence": t.confidence, "category": t.box.category, "box": _box_to_obj(t.box)}
            for t in pred.traffic_preds
        ],
        "ll_scores": _scores_to_obj(pred.ll_scores),
        "lt_scores": _scores_to_obj(pred.lt_scores),
    }


def prediction_from_obj(node, path: str = "") -> PredictionSet:
    obj = _obj(node, path or "/")
    _require(obj, ("frame_id", "centerline_preds", "traffic_preds", "ll_scores", "lt_scores"), path or "/")
    frame_id = _str(obj["frame_id"], f"{path}/frame_id")

    cpreds = []
    for i, node_p in enumerate(_lst(obj["centerline_preds"], f"{path}/centerline_preds")):
        p = f"{path}/centerline_preds/{i}"
        e = _obj(node_p, p)
        _opt_keys(e, ("confidence",), ("polyline", "mask", "bezier", "direction"), p)
        conf = _num(e["confidence"], f"{p}/confidence")
        polyline = mask = grid = bezier = direction = None
        if "polyline" in e:
            polyline = _wrap(f"{p}/polyline", Polyline3D, _points_from(e["polyline"], f"{p}/polyline"))
        if "mask" in e:
            mask, grid = _mask_from_obj(e["mask"], f"{p}/mask")
        if "bezier" in e:
            pts = _points_from(e["bezier"], f"{p}/bezier", min_points=5)
            bezier = _wrap(f"{p}/bezier", BezierCurve, pts)
        if "direction" in e:
            direction = _wrap(f"{p}/direction", DirectionLabel.from_string, _str(e["direction"], f"{p}/direction"))
        cpreds.append(_wrap(p, CenterlinePrediction, conf, polyline, mask, grid, bezier, direction))

    tpreds = []
    for i, node_t in enumerate(_lst(obj["traffic_preds"], f"{path}/traffic_preds")):
        p = f"{path}/traffic_preds/{i}"
        t = _obj(node_t, p)
        _require(t, ("confidence", "category", "box"), p)
        conf = _num(t["confidence"], f"{p}/confidence")
        box = _box_from_obj(t["box"], _str(t["category"], f"{p}/category"), f"{p}/box")
        tpreds.append(_wrap(p, TrafficPrediction, conf, box))

    pred = PredictionSet(
        frame_id=frame_id,
        centerline_preds=cpreds,
        traffic_preds=tpreds,
        ll_scores=_scores_from_obj(obj["ll_scores"], f"{path}/ll_scores"),
        lt_scores=_scores_from_obj(obj["lt_scores"], f"{path}/lt_scores"),
    )
    _wrap(path or "/", pred.validate)
    return pred


def save_prediction(pred: PredictionSet, rle: bool = False) -> bytes:
    return _dumps(prediction_to_obj(pred, rle=rle))


def load_prediction(data) -> PredictionSet:
    return prediction_from_obj(_loads(data))


def save_predictions(preds, rle: bool = False) -> bytes:
    return b"".join(save_prediction(p, rle=rle) for p in preds)


def load_predictions(data) -> list:
    return _load_ndjson(data, prediction_from_obj)


def load_scene_file(path) -> Scene:
    with open(path, "rb") as f:
        return load_scene(f.read())


def load_scenes_file(path) -> list:
    with open(path, "rb") as f:
        return load_scenes(f.read())


def load_prediction_file(path) -> PredictionSet:
    with open(path, "rb") as f:
        return load_prediction(f.read())


def load_predictions_file(path) -> list:
    with open(path, "rb") as f:
        return load_predictions(f.read())


# ---------------------------------------------------------------------------
# Synthetic scenes


@dataclass(frozen=True)
class SynthConfig:
    """Knobs for the deterministic synthetic scene generator."""

    seed: int = 0
    n_straight: int = 4
    n_arc: int = 2
    n_uturn: int = 0
    lane_spacing: float = 3.5
    arc_curvature_range: tuple = (0.001, 0.004)
    n_traffic_elements: int = 4
    split_probability: float = 0.3

    def __post_init__(self):
        for name in ("n_straight", "n_arc", "n_uturn", "n_traffic_elements"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v!r}")
        if self.lane_spacing <= 0:
            raise ValueError(f"lane_spacing must be positive, got {self.lane_spacing}")
        lo, hi = self.arc_curvature_range
        if not 0.0 < lo <= hi:
            raise ValueError(f"arc_curvature_range must satisfy 0 < lo <= hi, got {self.arc_curvature_range}")
        if not 0.0 <= self.split_probability <= 1.0:
            raise ValueError(f"split_probability must be in [0, 1], got {self.split_probability}")


def _stream(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream: independent of how many draws other streams made."""
    return np.random.Generator(np.random.Philox(key=[seed % 2**64, index % 2**64]))


def _straight_lane(rng: np.random.Generator, y0: float) -> np.ndarray:
    xs = np.linspace(rng.uniform(-48.0, -35.0), rng.uniform(35.0, 48.0), 21)
    pts = np.column_stack([xs, np.full(21, y0), np.zeros(21)])
    # right-hand traffic: positive-y lanes run the opposite way
    return pts[::-1] if y0 > 0 else pts


def _arc_lane(rng: np.random.Generator, curvature_range, lateral: bool) -> np.ndarray:
    kappa = rng.uniform(*curvature_range)
    a = 0.5 * kappa * rng.choice([-1.0, 1.0])
    b = rng.uniform(-0.05, 0.05)
    if lateral:
        c = rng.uniform(-40.0, 40.0)
        ts = np.linspace(rng.uniform(-22.0, -8.0), rng.uniform(8.0, 22.0), 21)
        pts = np.column_stack([a * ts**2 + b * ts + c, ts, np.zeros(21)])
    else:
        c = rng.uniform(-14.0, 14.0)
        ts = np.linspace(rng.uniform(-48.0, -35.0), rng.uniform(35.0, 48.0), 21)
        pts = np.column_stack([ts, a * ts**2 + b * ts + c, np.zeros(21)])
    return pts[::-1] if rng.random() < 0.5 else pts


def _uturn_lane(rng: np.random.Generator, spacing: float) -> np.ndarray:
    """Hairpin: out leg, half-circle turn, return leg. Not monotone in any axis."""
    r = 0.5 * spacing
    y0 = rng.uniform(-18.0, 14.0)
    x0 = rng.uniform(-40.0, -10.0)
    x1 = min(x0 + rng.uniform(20.0, 45.0), 45.0)
    n_leg = max(2, int(round((x1 - x0) / 2.5)))
    out_x = np.linspace(x0, x1, n_leg)
    out = np.column_stack([out_x, np.full(n_leg, y0), np.zeros(n_leg)])
    theta = np.linspace(-0.5 * np.pi, 0.5 * np.pi, 7)[1:]
    arc = np.column_stack([x1 + r * np.cos(theta), y0 + r + r * np.sin(theta), np.zeros(theta.size)])
    back_x = np.linspace(x1, x0, n_leg)[1:]
    back = np.column_stack([back_x, np.full(n_leg - 1, y0 + 2.0 * r), np.zeros(n_leg - 1)])
    return np.concatenate([out, arc, back])


def _maybe_split(rng: np.random.Generator, pts: np.ndarray, prob: float):
    """Split a lane into successor pieces; returns (pieces, local edges)."""
    if prob > 0.0 and rng.random() < prob:
        k = int(rng.integers(len(pts) // 3, 2 * len(pts) // 3))
        return [pts[: k + 1], pts[k:]], [(0, 1)]
    return [pts], []


def generate_synthetic_scene(cfg: SynthConfig | None = None) -> Scene:
    """Deterministic synthetic frame; identical configs give identical bytes.

    Each instance draws from its own counter-based stream keyed on
    (seed, instance index), so adding instances never shifts existing ones.
    """
    cfg = cfg or SynthConfig()
    lanes: list[np.ndarray] = []
    ll_edges: list[tuple[int, int]] = []
    stream_idx = 0

    def add(pieces, edges):
        base = len(lanes)
        lanes.extend(pieces)
        ll_edges.extend((base + a, base + b) for a, b in edges)

    for i in range(cfg.n_straight):
        rng = _stream(cfg.seed, stream_idx)
        stream_idx += 1
        y0 = (i - (cfg.n_straight - 1) / 2.0) * cfg.lane_spacing
        add(*_maybe_split(rng, _straight_lane(rng, y0), cfg.split_probability))
    for j in range(cfg.n_arc):
        rng = _stream(cfg.seed, stream_idx)
        stream_idx += 1
        add(*_maybe_split(rng, _arc_lane(rng, cfg.arc_curvature_range, lateral=bool(j % 2)), cfg.split_probability))
    for _ in range(cfg.n_uturn):
        rng = _stream(cfg.seed, stream_idx)
        stream_idx += 1
        lanes.append(_uturn_lane(rng, cfg.lane_spacing))

    centerlines = [Centerline(f"CL{i}", Polyline3D(pts)) for i, pts in enumerate(lanes)]
    topology_ll = [(f"CL{a}", f"CL{b}") for a, b in ll_edges]

    traffic, topology_lt = [], []
    for t in range(cfg.n_traffic_elements):
        rng = _stream(cfg.seed, _TRAFFIC_STREAM_BASE + t)
        x1, y1 = rng.uniform(0.0, 800.0), rng.uniform(0.0, 560.0)
        w, h = rng.uniform(20.0, 90.0), rng.uniform(20.0, 80.0)
        category = ("traffic_light", "road_sign")[int(rng.integers(0, 2))]
        te = TrafficElement(f"TE{t}", Box2D(x1, y1, x1 + w, y1 + h, category))
        traffic.append(te)
        if centerlines:
            lane = int(rng.integers(0, len(centerlines)))
            topology_lt.append((centerlines[lane].id, te.id))

    scene = Scene(
        frame_id=f"scene-{cfg.seed}",
        centerlines=centerlines,
        traffic_elements=traffic,
        topology_ll=topology_ll,
        topology_lt=topology_lt,
    )
    scene.validate()
    return scene


def perturb_scene(scene: Scene, noise_sigma: float = 0.0, drop_rate: float = 0.0, seed: int = 0) -> PredictionSet:
    """Degrade ground truth into a prediction set.

    Per-instance streams keyed on (seed, index) decide dropping and jitter.
    Confidence degrades with the mean jitter displacement; with zero noise and
    zero drop the output evaluates to all-ones scores against its scene.
    """
    if noise_sigma < 0:
        raise ValueError(f"noise_sigma must be non-negative, got {noise_sigma}")
    if not 0.0 <= drop_rate <= 1.0:
        raise ValueError(f"drop_rate must be in [0, 1], got {drop_rate}")

    cpreds, kept_lanes = [], []
    for i, cl in enumerate(scene.centerlines):
        rng = _stream(seed, i)
        if rng.random() < drop_rate:
            continue
        pts = cl.polyline.xyz
        if noise_sigma > 0.0:
            jitter = rng.normal(0.0, noise_sigma, size=pts.shape)
            pts = pts + jitter
            mean_disp = float(np.linalg.norm(jitter, axis=1).mean())
            conf = float(np.clip(1.0 - mean_disp / (3.0 * noise_sigma), 0.05, 1.0))
        else:
            conf = 1.0
        cpreds.append(CenterlinePrediction(confidence=conf, polyline=Polyline3D(pts, check_segments=False)))
        kept_lanes.append(i)

    tpreds, kept_tes = [], []
    for j, te in enumerate(scene.traffic_elements):
        rng = _stream(seed, _TRAFFIC_STREAM_BASE + j)
        if rng.random() < drop_rate:
            continue
        tpreds.append(TrafficPrediction(confidence=1.0, box=te.box))
        kept_tes.append(j)

    ll, lt = gt_score_matrices(scene, kept_lanes, kept_tes)
    return PredictionSet(
        frame_id=scene.frame_id,
        centerline_preds=cpreds,
        traffic_preds=tpreds,
        ll_scores=ll,
        lt_scores=lt,
    )


def gt_score_matrices(scene: Scene, kept_lanes, kept_tes):
    """Unit-score matrices encoding the scene's topology over kept predictions.

    `kept_lanes` / `kept_tes` list the original instance indices that became
    predictions, in prediction order. Edges touching dropped instances vanish.
    """
    lane_pred = {orig: k for k, orig in enumerate(kept_lanes)}
    te_pred = {orig: k for k, orig in enumerate(kept_tes)}
    lane_idx = {cl.id: i for i, cl in enumerate(scene.centerlines)}
    te_idx = {te.id: i for i, te in enumerate(scene.traffic_elements)}

    ll = np.zeros((len(kept_lanes), len(kept_lanes)))
    for a, b in scene.topology_ll:
        ia, ib = lane_idx[a], lane_idx[b]
        if ia in lane_pred and ib in lane_pred:
            ll[lane_pred[ia], lane_pred[ib]] = 1.0
    lt = np.zeros((len(kept_lanes), len(kept_tes)))
    for a, b in scene.topology_lt:
        ia, ib = lane_idx[a], te_idx[b]
        if ia in lane_pred and ib in te_pred:
            lt[lane_pred[ia], te_pred[ib]] = 1.0

    return (
        ScoreMatrix(ll) if kept_lanes else None,
        ScoreMatrix(lt) if kept_lanes and kept_tes else None,
    )
