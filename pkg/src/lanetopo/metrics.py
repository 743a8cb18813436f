"""Distance functions, instance matching, and the scalar evaluation scores.

Implements lane detection mAP over Frechet and Chamfer thresholds, traffic
element mAP at IoU 0.75, graph mAP over lane-lane and lane-traffic edges,
the point-fraction F1 score, and the aggregate OLS. All scores live in [0, 1];
the CLI renders them x100.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from .errors import DecodeFailed, InvalidPolyline, InvalidScore
from .geometry import Polyline3D, Roi, bezier_sample, clip_to_roi, resample_polyline
from .mask_codec import DecodeConfig, FusionPolicy, decode_mask, fuse_predictions

# Distance (meters) far beyond any threshold; marks inadmissible pairs.
_INADMISSIBLE = 1e9


@dataclass(frozen=True)
class MetricConfig:
    """Thresholds and knobs for the evaluation suite."""

    frechet_thresholds: tuple = (1.0, 2.0, 3.0)
    chamfer_thresholds: tuple = (0.5, 1.0, 1.5)
    iou_threshold: float = 0.75
    f1_distance: float = 1.5
    f1_point_fraction: float = 0.75
    top_aggregation_exponent: float = 0.5
    sample_count: int = 11
    edge_score_threshold: float = 0.5  # score floor for counting a predicted edge

    def __post_init__(self):
        for name in ("frechet_thresholds", "chamfer_thresholds"):
            ts = tuple(float(t) for t in getattr(self, name))
            if not ts or any(t <= 0 for t in ts) or any(a >= b for a, b in zip(ts, ts[1:])):
                raise ValueError(f"{name} must be strictly increasing and positive: {ts}")
            object.__setattr__(self, name, ts)
        for name in ("iou_threshold", "f1_point_fraction"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} must be in (0, 1], got {v}")
        if self.f1_distance <= 0:
            raise ValueError(f"f1_distance must be positive, got {self.f1_distance}")
        if self.sample_count < 2:
            raise ValueError(f"sample_count must be >= 2, got {self.sample_count}")


@dataclass(frozen=True)
class Box2D:
    """Axis-aligned image-space box with a traffic-element category."""

    x1: float
    y1: float
    x2: float
    y2: float
    category: str = "traffic_light"

    def __post_init__(self):
        # coerce to float so int-built boxes serialize identically
        for name in ("x1", "y1", "x2", "y2"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (self.x1 < self.x2 and self.y1 < self.y2):
            raise ValueError(f"degenerate box ({self.x1}, {self.y1}, {self.x2}, {self.y2})")

    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)


@dataclass(frozen=True)
class Matching:
    """One-to-one prediction/ground-truth matching at a single threshold."""

    pairs: tuple  # (pred index, gt index, distance-or-score)
    unmatched_preds: tuple
    unmatched_gts: tuple

    def __post_init__(self):
        preds = [p for p, _, _ in self.pairs]
        gts = [g for _, g, _ in self.pairs]
        if len(set(preds)) != len(preds) or len(set(gts)) != len(gts):
            raise ValueError("matching is not one-to-one")

    def pred_to_gt(self) -> dict:
        return {p: g for p, g, _ in self.pairs}

    def gt_to_pred(self) -> dict:
        return {g: p for p, g, _ in self.pairs}


@dataclass(frozen=True)
class EvalSummary:
    """The seven benchmark scores, all in [0, 1]."""

    det_l_frechet: float
    det_l_chamfer: float
    det_t: float
    top_ll: float
    top_lt: float
    f1: float
    ols: float

    FIELDS = ("det_l_frechet", "det_l_chamfer", "det_t", "top_ll", "top_lt", "f1", "ols")

    def __post_init__(self):
        for name in self.FIELDS:
            v = getattr(self, name)
            if not (np.isfinite(v) and 0.0 <= v <= 1.0):
                raise InvalidScore(f"{name}={v} outside [0, 1]")

    def as_dict(self) -> dict:
        return {name: float(getattr(self, name)) for name in self.FIELDS}


def _poly_xyz(p) -> np.ndarray:
    if isinstance(p, Polyline3D):
        return p.xyz
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] != 3:
        raise InvalidPolyline(f"expected non-empty (n, 3) polyline, got shape {arr.shape}")
    return arr


def discrete_frechet(a, b) -> float:
    """Discrete Frechet distance: min over monotone couplings of the max pair distance."""
    A, B = _poly_xyz(a), _poly_xyz(b)
    d = cdist(A, B).tolist()
    m = len(d[0])
    row = d[0]
    prev = [0.0] * m
    prev[0] = row[0]
    for j in range(1, m):
        prev[j] = row[j] if row[j] > prev[j - 1] else prev[j - 1]
    for i in range(1, len(d)):
        row = d[i]
        cur = [0.0] * m
        cur[0] = row[0] if row[0] > prev[0] else prev[0]
        for j in range(1, m):
            reach = min(prev[j], prev[j - 1], cur[j - 1])
            cur[j] = row[j] if row[j] > reach else reach
        prev = cur
    return float(prev[m - 1])


def chamfer(a, b) -> float:
    """Symmetric mean nearest-neighbor distance between the two point sets.

    Point order is immaterial, so the per-point minima are summed in sorted
    order; reversing either polyline leaves the result bit-identical.
    """
    A, B = _poly_xyz(a), _poly_xyz(b)
    d = cdist(A, B)
    return float(0.5 * (np.sort(d.min(axis=1)).mean() + np.sort(d.min(axis=0)).mean()))


def box_iou(a: Box2D, b: Box2D) -> float:
    """Intersection over union of two boxes, in [0, 1]."""
    iw = min(a.x2, b.x2) - max(a.x1, b.x1)
    ih = min(a.y2, b.y2) - max(a.y1, b.y1)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    return inter / (a.area() + b.area() - inter)


def _greedy_match(scores: np.ndarray, confidences, threshold: float, higher_is_match: bool) -> Matching:
    """Greedy one-to-one matching on a precomputed pred x gt score matrix.

    Predictions claim their best unclaimed ground truth in descending
    confidence order; ties in confidence and in score resolve to the lowest
    index, making the result deterministic.
    """
    n_pred, n_gt = scores.shape
    order = np.argsort(-np.asarray(confidences, dtype=float), kind="stable")
    available = np.ones(n_gt, dtype=bool)
    pairs = []
    for p in order:
        if not available.any():
            break
        row = scores[p]
        if higher_is_match:
            masked = np.where(available, row, -np.inf)
            g = int(np.argmax(masked))
            if masked[g] >= threshold:
                pairs.append((int(p), g, float(row[g])))
                available[g] = False
        else:
            masked = np.where(available, row, np.inf)
            g = int(np.argmin(masked))
            if masked[g] <= threshold:
                pairs.append((int(p), g, float(row[g])))
                available[g] = False
    matched_p = {p for p, _, _ in pairs}
    matched_g = {g for _, g, _ in pairs}
    return Matching(
        pairs=tuple(pairs),
        unmatched_preds=tuple(p for p in range(n_pred) if p not in matched_p),
        unmatched_gts=tuple(g for g in range(n_gt) if g not in matched_g),
    )


def match_instances(preds, gts, distance, threshold: float, mode: str = "lower") -> Matching:
    """Match (confidence, item) predictions one-to-one against ground truths.

    `distance` is called on (pred item, gt item); `mode` selects whether lower
    scores ("lower", distances) or higher scores ("higher", e.g. IoU) match.
    """
    if mode not in ("lower", "higher"):
        raise ValueError(f"mode must be 'lower' or 'higher', got {mode!r}")
    confs = [c for c, _ in preds]
    matrix = np.array([[distance(item, g) for g in gts] for _, item in preds], dtype=float)
    matrix = matrix.reshape(len(preds), len(gts))
    return _greedy_match(matrix, confs, threshold, higher_is_match=(mode == "higher"))


def average_precision(records, gt_count: int) -> float:
    """Area under the precision-recall curve with the all-point envelope.

    `records` are (confidence, is_true_positive) pairs; recall is measured
    against `gt_count`. No ground truth and no predictions scores 1.0.
    """
    records = list(records)
    if gt_count == 0:
        return 1.0 if not records else 0.0
    if not records:
        return 0.0
    records.sort(key=lambda r: -r[0])
    flags = np.array([bool(tp) for _, tp in records])
    tp = np.cumsum(flags)
    fp = np.cumsum(~flags)
    precision = tp / (tp + fp)
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    # each true positive advances recall by exactly 1/gt_count
    return float(envelope[flags].sum() / gt_count)


def _pairwise_lane_matrix(pred_polys, gt_polys, distance_fn) -> np.ndarray:
    out = np.empty((len(pred_polys), len(gt_polys)))
    for i, p in enumerate(pred_polys):
        for j, g in enumerate(gt_polys):
            out[i, j] = distance_fn(p, g)
    return out


def _batched_frechet(blocks: np.ndarray) -> np.ndarray:
    """Frechet DP over a (pairs, n, m) stack of distance matrices at once."""
    _, n, m = blocks.shape
    prev = np.maximum.accumulate(blocks[:, 0, :], axis=1)
    for i in range(1, n):
        row = blocks[:, i, :]
        cur = np.empty_like(prev)
        cur[:, 0] = np.maximum(prev[:, 0], row[:, 0])
        for j in range(1, m):
            reach = np.minimum(np.minimum(prev[:, j], prev[:, j - 1]), cur[:, j - 1])
            cur[:, j] = np.maximum(reach, row[:, j])
        prev = cur
    return prev[:, -1]


def _lane_distance_matrices(pred_polys, gt_polys):
    """(Frechet, Chamfer) pred x gt matrices from one shared distance pass.

    Fast path requires every polyline to share one point count; ragged input
    falls back to per-pair evaluation.
    """
    n_p, n_g = len(pred_polys), len(gt_polys)
    if n_p == 0 or n_g == 0:
        empty = np.empty((n_p, n_g))
        return empty, empty.copy()
    lengths = {len(p) for p in pred_polys} | {len(g) for g in gt_polys}
    if len(lengths) > 1:
        return (
            _pairwise_lane_matrix(pred_polys, gt_polys, discrete_frechet),
            _pairwise_lane_matrix(pred_polys, gt_polys, chamfer),
        )
    n = lengths.pop()
    d = cdist(
        np.concatenate([p.xyz for p in pred_polys]),
        np.concatenate([g.xyz for g in gt_polys]),
    ).reshape(n_p, n, n_g, n)
    cham = 0.5 * (d.min(axis=3).mean(axis=1) + d.min(axis=1).mean(axis=2))
    blocks = d.transpose(0, 2, 1, 3).reshape(n_p * n_g, n, n)
    fre = _batched_frechet(np.ascontiguousarray(blocks)).reshape(n_p, n_g)
    return fre, cham


def det_lanes(preds, gts, distance: str = "frechet", cfg: MetricConfig | None = None) -> float:
    """Lane detection mAP: mean AP over the chosen distance's threshold list.

    `preds` are (confidence, Polyline3D) pairs, already clipped and resampled
    to a common point count; `gts` are Polyline3D.
    """
    cfg = cfg or MetricConfig()
    if distance == "frechet":
        thresholds = cfg.frechet_thresholds
    elif distance == "chamfer":
        thresholds = cfg.chamfer_thresholds
    else:
        raise ValueError(f"distance must be 'frechet' or 'chamfer', got {distance!r}")
    confs = [c for c, _ in preds]
    matrices = _lane_distance_matrices([p for _, p in preds], list(gts))
    matrix = matrices[0] if distance == "frechet" else matrices[1]
    aps = []
    for t in thresholds:
        matching = _greedy_match(matrix, confs, t, higher_is_match=False)
        matched = {p for p, _, _ in matching.pairs}
        records = [(confs[i], i in matched) for i in range(len(preds))]
        aps.append(average_precision(records, len(gts)))
    return float(np.mean(aps)) if aps else 0.0


def det_traffic(preds, gts, cfg: MetricConfig | None = None) -> float:
    """Traffic-element mAP at the IoU threshold, averaged over GT categories."""
    cfg = cfg or MetricConfig()
    per_cat = _traffic_records(preds, gts, cfg)
    if not per_cat:
        return 1.0 if not preds else 0.0
    aps = [average_precision(records, n_gt) for records, n_gt in per_cat.values()]
    return float(np.mean(aps))


def _traffic_records(preds, gts, cfg: MetricConfig) -> dict:
    """Per-GT-category (records, gt_count) used by both per-frame and pooled AP."""
    categories = sorted({b.category for b in gts})
    out = {}
    for cat in categories:
        gts_c = [b for b in gts if b.category == cat]
        preds_c = [(conf, b) for conf, b in preds if b.category == cat]
        matching = match_instances(preds_c, gts_c, box_iou, cfg.iou_threshold, mode="higher")
        matched = {p for p, _, _ in matching.pairs}
        records = [(preds_c[i][0], i in matched) for i in range(len(preds_c))]
        out[cat] = (records, len(gts_c))
    return out


def _traffic_matching(preds, gts, cfg: MetricConfig) -> Matching:
    """Category-aware one-to-one matching over the full index spaces."""
    pairs = []
    for cat in sorted({b.category for b in gts}):
        gt_idx = [j for j, b in enumerate(gts) if b.category == cat]
        pr_idx = [i for i, (_, b) in enumerate(preds) if b.category == cat]
        sub = match_instances(
            [preds[i] for i in pr_idx], [gts[j] for j in gt_idx], box_iou, cfg.iou_threshold, mode="higher"
        )
        pairs.extend((pr_idx[p], gt_idx[g], s) for p, g, s in sub.pairs)
    matched_p = {p for p, _, _ in pairs}
    matched_g = {g for _, g, _ in pairs}
    return Matching(
        pairs=tuple(pairs),
        unmatched_preds=tuple(i for i in range(len(preds)) if i not in matched_p),
        unmatched_gts=tuple(j for j in range(len(gts)) if j not in matched_g),
    )


def _top_vertex_aps(pred_edges, gt_edges, match_src: Matching, match_dst: Matching) -> list:
    """Per-GT-source-vertex APs over ranked incident predicted edges.

    A predicted edge is a true positive only when both endpoints are matched
    and the corresponding GT edge exists. GT vertices whose matched prediction
    is missing contribute AP 0.
    """
    gt_out: dict = {}
    for src, dst in gt_edges:
        gt_out.setdefault(src, set()).add(dst)
    src_gt_to_pred = match_src.gt_to_pred()
    dst_pred_to_gt = match_dst.pred_to_gt()
    pred_by_src: dict = {}
    for ps, pd, score in pred_edges:
        pred_by_src.setdefault(ps, []).append((pd, score))
    aps = []
    for g in sorted(gt_out):
        p = src_gt_to_pred.get(g)
        if p is None:
            aps.append(0.0)
            continue
        records = []
        for pd, score in pred_by_src.get(p, []):
            gd = dst_pred_to_gt.get(pd)
            records.append((score, gd is not None and gd in gt_out[g]))
        aps.append(average_precision(records, len(gt_out[g])))
    return aps


def top_score(pred_edges, gt_edges, vertex_match_a: Matching, vertex_match_b: Matching) -> float:
    """Graph mAP: mean per-source-vertex edge AP over GT vertices with edges.

    With no GT edges at all the score is 1.0 when nothing was predicted and
    0.0 otherwise.
    """
    gt_edges = list(gt_edges)
    if not gt_edges:
        return 1.0 if not list(pred_edges) else 0.0
    aps = _top_vertex_aps(pred_edges, gt_edges, vertex_match_a, vertex_match_b)
    return float(np.mean(aps))


def _points_to_polyline_dists(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Min distance from each 3D point to any segment of `poly`."""
    a = poly[:-1]
    d = poly[1:] - a
    denom = (d * d).sum(axis=1)
    denom = np.where(denom == 0.0, 1.0, denom)
    # t[i, j]: projection of point i onto segment j, clamped to the segment
    t = np.clip(((points[:, None, :] - a[None, :, :]) * d[None, :, :]).sum(-1) / denom, 0.0, 1.0)
    closest = a[None, :, :] + t[:, :, None] * d[None, :, :]
    return np.linalg.norm(points[:, None, :] - closest, axis=-1).min(axis=1)


def _f1_admissible(pred_polys, gt_polys, cfg: MetricConfig):
    """(admissible, cost) matrices for the F1 assignment.

    A pair is admissible when at least `f1_point_fraction` of the prediction's
    points lie within `f1_distance` of the GT polyline (point-to-segment).
    Cost is the mean point-to-segment distance.
    """
    n_p, n_g = len(pred_polys), len(gt_polys)
    admissible = np.zeros((n_p, n_g), dtype=bool)
    cost = np.full((n_p, n_g), _INADMISSIBLE)
    if n_p == 0 or n_g == 0:
        return admissible, cost

    if len({len(p) for p in pred_polys}) == 1:
        # uniform point counts: one broadcast against every GT segment at once
        pts = np.concatenate([p.xyz for p in pred_polys])
        n_pts = len(pred_polys[0])
        a = np.concatenate([g.xyz[:-1] for g in gt_polys])
        d = np.concatenate([np.diff(g.xyz, axis=0) for g in gt_polys])
        denom = (d * d).sum(axis=1)
        denom = np.where(denom == 0.0, 1.0, denom)
        t = np.clip(((pts[:, None, :] - a[None, :, :]) * d[None, :, :]).sum(-1) / denom, 0.0, 1.0)
        closest = a[None, :, :] + t[:, :, None] * d[None, :, :]
        dist = np.linalg.norm(pts[:, None, :] - closest, axis=-1)
        starts = np.concatenate([[0], np.cumsum([len(g) - 1 for g in gt_polys])[:-1]])
        per_gt = np.minimum.reduceat(dist, starts, axis=1).reshape(n_p, n_pts, n_g)
        frac = (per_gt <= cfg.f1_distance).mean(axis=1)
        mean_dist = per_gt.mean(axis=1)
        admissible = frac >= cfg.f1_point_fraction
        cost = np.where(admissible, mean_dist, _INADMISSIBLE)
        return admissible, cost

    all_pts = np.concatenate([p.xyz for p in pred_polys])
    counts = [len(p) for p in pred_polys]
    offsets = np.concatenate([[0], np.cumsum(counts)])
    for j, g in enumerate(gt_polys):
        dists = _points_to_polyline_dists(all_pts, g.xyz)
        for i in range(n_p):
            di = dists[offsets[i]:offsets[i + 1]]
            frac = float((di <= cfg.f1_distance).mean())
            if frac >= cfg.f1_point_fraction:
                admissible[i, j] = True
                cost[i, j] = float(di.mean())
    return admissible, cost


def f1_score(preds, gts, cfg: MetricConfig | None = None) -> float:
    """Instance F1 under the point-fraction correctness rule.

    Admissible pairs are matched one-to-one by minimum-cost assignment
    (maximum cardinality, since inadmissible pairs carry a prohibitive cost);
    F1 = 2 TP / (2 TP + FP + FN).
    """
    cfg = cfg or MetricConfig()
    tp, n_p, n_g = _f1_counts([p for _, p in preds], list(gts), cfg)
    if n_p == 0 and n_g == 0:
        return 1.0
    return 2.0 * tp / (2.0 * tp + (n_p - tp) + (n_g - tp))


def _f1_counts(pred_polys, gt_polys, cfg: MetricConfig):
    admissible, cost = _f1_admissible(pred_polys, gt_polys, cfg)
    tp = 0
    if admissible.any():
        rows, cols = linear_sum_assignment(cost)
        tp = int(admissible[rows, cols].sum())
    return tp, len(pred_polys), len(gt_polys)


def hungarian(cost) -> list:
    """Minimum-total-cost one-to-one assignment; returns min(n, m) (row, col) pairs."""
    cost = np.asarray(cost, dtype=float)
    if not np.isfinite(cost).all():
        raise ValueError("assignment requires finite costs")
    rows, cols = linear_sum_assignment(cost)
    return sorted(zip(rows.tolist(), cols.tolist()))


def ols(det_l_frechet: float, det_t: float, top_ll: float, top_lt: float, cfg: MetricConfig | None = None) -> float:
    """Aggregate score: mean of DET_l, DET_t, and the exponent-damped TOPs."""
    cfg = cfg or MetricConfig()
    for name, v in (("det_l_frechet", det_l_frechet), ("det_t", det_t), ("top_ll", top_ll), ("top_lt", top_lt)):
        if not (np.isfinite(v) and 0.0 <= v <= 1.0):
            raise InvalidScore(f"{name}={v} outside [0, 1]")
    f = lambda v: v ** cfg.top_aggregation_exponent
    return 0.25 * (det_l_frechet + det_t + f(top_ll) + f(top_lt))


# ---------------------------------------------------------------------------
# Frame evaluation


@dataclass
class _FrameResult:
    """Per-frame ingredients pooled by the dataset-level reduction."""

    lane_records_frechet: list = field(default_factory=list)  # per threshold: [(conf, tp)]
    lane_records_chamfer: list = field(default_factory=list)
    n_gt_lanes: int = 0
    traffic: dict = field(default_factory=dict)  # category -> (records, gt_count)
    n_traffic_preds: int = 0
    top_ll_aps: list = field(default_factory=list)
    top_lt_aps: list = field(default_factory=list)
    n_gt_ll_edges: int = 0
    n_pred_ll_edges: int = 0
    n_gt_lt_edges: int = 0
    n_pred_lt_edges: int = 0
    f1_tp: int = 0
    f1_n_pred: int = 0
    f1_n_gt: int = 0


def _prepare_polyline(poly: Polyline3D, roi: Roi, n: int) -> Polyline3D | None:
    """Clip to the ROI (keeping the longest surviving piece) and resample."""
    pieces = clip_to_roi(poly, roi)
    if not pieces:
        return None
    best = max(pieces, key=lambda q: q.length())
    return resample_polyline(best, n)


def decode_entry(entry, decode_cfg: DecodeConfig, policy: FusionPolicy):
    """Turn one centerline prediction entry into a polyline, or None if dropped."""
    if entry.polyline is not None:
        return entry.polyline
    mask_poly = None
    if entry.mask is not None:
        try:
            mask_poly = decode_mask(entry.mask, entry.grid, decode_cfg)
        except DecodeFailed:
            mask_poly = None
    bezier_poly = bezier_sample(entry.bezier, decode_cfg.sample_count) if entry.bezier is not None else None
    if entry.mask is not None and entry.bezier is not None:
        label = entry.direction or entry.mask.direction
        try:
            return fuse_predictions(mask_poly, bezier_poly, label, policy)
        except DecodeFailed:
            return None
    if entry.mask is not None:
        return mask_poly
    return bezier_poly


def _eval_frame(pred, gt, cfg: MetricConfig, decode_cfg: DecodeConfig, policy: FusionPolicy) -> _FrameResult:
    res = _FrameResult()
    roi = gt.roi
    n = cfg.sample_count

    gt_polys, gt_ids = [], []
    for cl in gt.centerlines:
        prepared = _prepare_polyline(cl.polyline, roi, n)
        if prepared is not None:
            gt_polys.append(prepared)
            gt_ids.append(cl.id)
    res.n_gt_lanes = len(gt_polys)

    pred_polys, confs, surviving = [], [], {}
    for orig_idx, entry in enumerate(pred.centerline_preds):
        poly = decode_entry(entry, decode_cfg, policy)
        if poly is None:
            continue
        prepared = _prepare_polyline(poly, roi, n)
        if prepared is None:
            continue
        surviving[orig_idx] = len(pred_polys)
        pred_polys.append(prepared)
        confs.append(entry.confidence)

    frechet_m, chamfer_m = _lane_distance_matrices(pred_polys, gt_polys)
    for thresholds, matrix, bucket in (
        (cfg.frechet_thresholds, frechet_m, res.lane_records_frechet),
        (cfg.chamfer_thresholds, chamfer_m, res.lane_records_chamfer),
    ):
        for t in thresholds:
            matching = _greedy_match(matrix, confs, t, higher_is_match=False)
            matched = {p for p, _, _ in matching.pairs}
            bucket.append([(confs[i], i in matched) for i in range(len(pred_polys))])

    traffic_preds = [(tp.confidence, tp.box) for tp in pred.traffic_preds]
    traffic_gts = [te.box for te in gt.traffic_elements]
    res.traffic = _traffic_records(traffic_preds, traffic_gts, cfg)
    res.n_traffic_preds = len(traffic_preds)

    # topology: lane vertices matched at the strictest Frechet threshold
    lane_match = _greedy_match(frechet_m, confs, min(cfg.frechet_thresholds), higher_is_match=False)
    te_match = _traffic_matching(traffic_preds, traffic_gts, cfg)

    lane_id_to_idx = {cid: i for i, cid in enumerate(gt_ids)}
    te_id_to_idx = {te.id: i for i, te in enumerate(gt.traffic_elements)}
    gt_ll = [
        (lane_id_to_idx[a], lane_id_to_idx[b])
        for a, b in gt.topology_ll
        if a in lane_id_to_idx and b in lane_id_to_idx
    ]
    gt_lt = [
        (lane_id_to_idx[a], te_id_to_idx[b])
        for a, b in gt.topology_lt
        if a in lane_id_to_idx and b in te_id_to_idx
    ]

    pred_ll = _remap_edges(pred.ll_scores, surviving, surviving, cfg.edge_score_threshold)
    pred_lt = _remap_edges(
        pred.lt_scores, surviving, {i: i for i in range(len(traffic_preds))}, cfg.edge_score_threshold
    )
    res.n_gt_ll_edges, res.n_pred_ll_edges = len(gt_ll), len(pred_ll)
    res.n_gt_lt_edges, res.n_pred_lt_edges = len(gt_lt), len(pred_lt)
    res.top_ll_aps = _top_vertex_aps(pred_ll, gt_ll, lane_match, lane_match)
    res.top_lt_aps = _top_vertex_aps(pred_lt, gt_lt, lane_match, te_match)

    res.f1_tp, res.f1_n_pred, res.f1_n_gt = _f1_counts(pred_polys, gt_polys, cfg)
    return res


def _remap_edges(scores, src_map: dict, dst_map: dict, threshold: float) -> list:
    """Scored edges in surviving-prediction index space.

    Edges whose source prediction was dropped are discarded; a dropped
    destination keeps the edge alive as an unmatchable endpoint (-1).
    """
    if scores is None:
        return []
    from .topology import adjacency_from_scores

    edges = []
    for rid, cid, score in adjacency_from_scores(scores, threshold):
        if rid not in src_map:
            continue
        edges.append((src_map[rid], dst_map.get(cid, -1), score))
    return edges


def _reduce_frames(frames: list, cfg: MetricConfig) -> EvalSummary:
    n_thr_f = len(cfg.frechet_thresholds)
    n_thr_c = len(cfg.chamfer_thresholds)
    gt_lanes = sum(f.n_gt_lanes for f in frames)

    def pooled_lane_ap(selector, n_thr):
        aps = []
        for t in range(n_thr):
            records = [r for f in frames for r in selector(f)[t]]
            aps.append(average_precision(records, gt_lanes))
        return float(np.mean(aps))

    det_l_f = pooled_lane_ap(lambda f: f.lane_records_frechet, n_thr_f)
    det_l_c = pooled_lane_ap(lambda f: f.lane_records_chamfer, n_thr_c)

    categories = sorted({cat for f in frames for cat in f.traffic})
    if categories:
        cat_aps = []
        for cat in categories:
            records = [r for f in frames for r in f.traffic.get(cat, ([], 0))[0]]
            n_gt = sum(f.traffic.get(cat, ([], 0))[1] for f in frames)
            cat_aps.append(average_precision(records, n_gt))
        det_t = float(np.mean(cat_aps))
    else:
        det_t = 1.0 if sum(f.n_traffic_preds for f in frames) == 0 else 0.0

    def pooled_top(ap_sel, n_gt_sel, n_pred_sel):
        aps = [a for f in frames for a in ap_sel(f)]
        if sum(n_gt_sel(f) for f in frames) == 0:
            return 1.0 if sum(n_pred_sel(f) for f in frames) == 0 else 0.0
        return float(np.mean(aps))

    top_ll = pooled_top(lambda f: f.top_ll_aps, lambda f: f.n_gt_ll_edges, lambda f: f.n_pred_ll_edges)
    top_lt = pooled_top(lambda f: f.top_lt_aps, lambda f: f.n_gt_lt_edges, lambda f: f.n_pred_lt_edges)

    tp = sum(f.f1_tp for f in frames)
    n_p = sum(f.f1_n_pred for f in frames)
    n_g = sum(f.f1_n_gt for f in frames)
    f1 = 1.0 if n_p == 0 and n_g == 0 else 2.0 * tp / (2.0 * tp + (n_p - tp) + (n_g - tp))

    return EvalSummary(
        det_l_frechet=det_l_f,
        det_l_chamfer=det_l_c,
        det_t=det_t,
        top_ll=top_ll,
        top_lt=top_lt,
        f1=f1,
        ols=ols(det_l_f, det_t, top_ll, top_lt, cfg),
    )


def evaluate_frames(
    pairs,
    cfg: MetricConfig | None = None,
    decode_cfg: DecodeConfig | None = None,
    policy: FusionPolicy = FusionPolicy.DIRECTIONAL_FUSION,
    threads: int = 1,
) -> EvalSummary:
    """Evaluate (PredictionSet, Scene) pairs jointly, pooling across frames.

    Frame-level work may run on a thread pool; the reduction is in stable
    frame order, so results do not depend on the thread count.
    """
    cfg = cfg or MetricConfig()
    decode_cfg = decode_cfg or DecodeConfig(sample_count=cfg.sample_count)
    pairs = list(pairs)
    if threads == 1 or len(pairs) <= 1:
        frames = [_eval_frame(p, g, cfg, decode_cfg, policy) for p, g in pairs]
    else:
        workers = threads if threads > 0 else None
        with ThreadPoolExecutor(max_workers=workers) as pool:
            frames = list(pool.map(lambda pg: _eval_frame(pg[0], pg[1], cfg, decode_cfg, policy), pairs))
    return _reduce_frames(frames, cfg)


def evaluate(
    pred,
    gt,
    cfg: MetricConfig | None = None,
    decode_cfg: DecodeConfig | None = None,
    policy: FusionPolicy = FusionPolicy.DIRECTIONAL_FUSION,
) -> EvalSummary:
    """Evaluate a single frame; see `evaluate_frames`."""
    return evaluate_frames([(pred, gt)], cfg=cfg, decode_cfg=decode_cfg, policy=policy)
