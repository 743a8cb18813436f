"""Command-line interface.

Subcommands: synth, rasterize, decode, eval, roundtrip. Exit codes: 0 on
success, 1 on any domain error (bad input, failed validation), 2 on usage
errors (argparse). Verbosity comes from the LANETOPO_LOG environment variable
(error, info, debug); logs go to stderr, results to stdout.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import scene_io
from .errors import EmptyRasterization, LaneTopoError
from .mask_codec import DecodeConfig, FusionPolicy, GridSpec, rasterize_centerline
from .metrics import EvalSummary, MetricConfig, decode_entry, evaluate_frames
from .scene_io import CenterlinePrediction, PredictionSet, SynthConfig, TrafficPrediction
from .topology import ScoreMatrix

log = logging.getLogger("lanetopo")


def _setup_logging():
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    name = os.environ.get("LANETOPO_LOG", "error").strip().lower()
    logging.basicConfig(level=levels.get(name, logging.ERROR), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s", force=True)


def _is_ndjson(path: str) -> bool:
    return str(path).endswith(".ndjson")


def _load_scenes_any(path: str) -> list:
    return scene_io.load_scenes_file(path) if _is_ndjson(path) else [scene_io.load_scene_file(path)]


def _load_preds_any(path: str) -> list:
    return scene_io.load_predictions_file(path) if _is_ndjson(path) else [scene_io.load_prediction_file(path)]


def _write_scenes(path: str, scenes: list):
    if _is_ndjson(path) or len(scenes) > 1:
        data = scene_io.save_scenes(scenes)
    else:
        data = scene_io.save_scene(scenes[0])
    with open(path, "wb") as f:
        f.write(data)


def _write_preds(path: str, preds: list, rle: bool = False):
    if _is_ndjson(path) or len(preds) > 1:
        data = scene_io.save_predictions(preds, rle=rle)
    else:
        data = scene_io.save_prediction(preds[0], rle=rle)
    with open(path, "wb") as f:
        f.write(data)


def _synth_cfg(args, seed: int) -> SynthConfig:
    return SynthConfig(
        seed=seed,
        n_straight=args.n_straight,
        n_arc=args.n_arc,
        n_uturn=args.n_uturn,
        lane_spacing=args.lane_spacing,
        arc_curvature_range=(args.curvature_min, args.curvature_max),
        n_traffic_elements=args.n_traffic,
        split_probability=args.split_prob,
    )


def _metric_cfg(args) -> MetricConfig:
    return MetricConfig(
        iou_threshold=args.iou_threshold,
        f1_distance=args.f1_distance,
        sample_count=args.samples,
        edge_score_threshold=args.edge_threshold,
    )


def _decode_cfg(args) -> DecodeConfig:
    return DecodeConfig(
        row_valid_threshold=args.row_valid_threshold,
        cell_mass_floor=args.cell_mass_floor,
        sample_count=args.samples,
        min_valid_lines=args.min_valid_lines,
    )


def _print_summary(summary: EvalSummary, fmt: str):
    if fmt == "json":
        sys.stdout.write(json.dumps(summary.as_dict(), sort_keys=True) + "\n")
    else:
        for name in EvalSummary.FIELDS:
            sys.stdout.write(f"{name:<14} {100.0 * getattr(summary, name):5.1f}\n")


def _rasterize_scene(scene, grid: GridSpec, thickness: float) -> PredictionSet:
    cpreds, kept = [], []
    for i, cl in enumerate(scene.centerlines):
        try:
            mask = rasterize_centerline(cl.polyline, grid, thickness=thickness)
        except EmptyRasterization:
            log.info("centerline %s left no cells, skipping", cl.id)
            continue
        cpreds.append(CenterlinePrediction(confidence=1.0, mask=mask, grid=grid))
        kept.append(i)
    tpreds = [TrafficPrediction(confidence=1.0, box=te.box) for te in scene.traffic_elements]
    ll, lt = scene_io.gt_score_matrices(scene, kept, list(range(len(scene.traffic_elements))))
    return PredictionSet(scene.frame_id, cpreds, tpreds, ll, lt)


def _reindex_scores(scores: ScoreMatrix | None, row_map: dict, col_map: dict) -> ScoreMatrix | None:
    """Restrict a score matrix to surviving ids, renumbered per the maps."""
    if scores is None:
        return None
    keep_r = [i for i, rid in enumerate(scores.row_ids) if rid in row_map]
    keep_c = [j for j, cid in enumerate(scores.col_ids) if cid in col_map]
    if not keep_r or not keep_c:
        return None
    values = scores.values[np.ix_(keep_r, keep_c)]
    row_ids = tuple(row_map[scores.row_ids[i]] for i in keep_r)
    col_ids = tuple(col_map[scores.col_ids[j]] for j in keep_c)
    return ScoreMatrix(values, row_ids, col_ids)


def _decode_set(pred: PredictionSet, decode_cfg: DecodeConfig, policy: FusionPolicy) -> PredictionSet:
    entries, kept = [], []
    for i, entry in enumerate(pred.centerline_preds):
        poly = decode_entry(entry, decode_cfg, policy)
        if poly is None:
            log.info("frame %s: prediction %d failed to decode, dropping", pred.frame_id, i)
            continue
        direction = entry.direction or (entry.mask.direction if entry.mask is not None else None)
        entries.append(CenterlinePrediction(confidence=entry.confidence, polyline=poly, direction=direction))
        kept.append(i)
    lane_map = {orig: k for k, orig in enumerate(kept)}
    te_map = {i: i for i in range(len(pred.traffic_preds))}
    return PredictionSet(
        frame_id=pred.frame_id,
        centerline_preds=entries,
        traffic_preds=pred.traffic_preds,
        ll_scores=_reindex_scores(pred.ll_scores, lane_map, lane_map),
        lt_scores=_reindex_scores(pred.lt_scores, lane_map, te_map),
    )


def _pair_frames(preds: list, gts: list) -> list:
    by_id = {}
    for g in gts:
        if g.frame_id in by_id:
            raise LaneTopoError(f"duplicate ground-truth frame {g.frame_id!r}")
        by_id[g.frame_id] = g
    pairs = []
    for p in preds:
        if p.frame_id not in by_id:
            raise LaneTopoError(f"prediction frame {p.frame_id!r} has no ground-truth frame")
        pairs.append((p, by_id.pop(p.frame_id)))
    if by_id:
        raise LaneTopoError(f"ground-truth frames without predictions: {', '.join(sorted(by_id))}")
    return pairs


def _cmd_synth(args) -> int:
    scenes = [scene_io.generate_synthetic_scene(_synth_cfg(args, args.seed + k)) for k in range(args.frames)]
    _write_scenes(args.out, scenes)
    log.info("wrote %d scene(s) to %s", len(scenes), args.out)
    return 0


def _cmd_rasterize(args) -> int:
    scenes = _load_scenes_any(args.scene)
    grid = GridSpec(rows=args.rows, cols=args.cols)
    preds = [_rasterize_scene(s, grid, args.thickness) for s in scenes]
    _write_preds(args.out, preds, rle=args.rle)
    log.info("rasterized %d frame(s) to %s", len(preds), args.out)
    return 0


def _cmd_decode(args) -> int:
    preds = _load_preds_any(args.masks)
    decoded = [_decode_set(p, _decode_cfg(args), FusionPolicy(args.policy)) for p in preds]
    _write_preds(args.out, decoded)
    log.info("decoded %d frame(s) to %s", len(decoded), args.out)
    return 0


def _cmd_eval(args) -> int:
    pairs = _pair_frames(_load_preds_any(args.pred), _load_scenes_any(args.gt))
    summary = evaluate_frames(
        pairs,
        cfg=_metric_cfg(args),
        decode_cfg=_decode_cfg(args),
        policy=FusionPolicy(args.policy),
        threads=args.threads,
    )
    _print_summary(summary, args.format)
    return 0


def _cmd_roundtrip(args) -> int:
    scenes = [scene_io.generate_synthetic_scene(_synth_cfg(args, args.seed + k)) for k in range(args.frames)]
    grid = GridSpec(rows=args.rows, cols=args.cols)
    preds = [_rasterize_scene(s, grid, args.thickness) for s in scenes]
    summary = evaluate_frames(
        list(zip(preds, scenes)),
        cfg=_metric_cfg(args),
        decode_cfg=_decode_cfg(args),
        policy=FusionPolicy(args.policy),
        threads=args.threads,
    )
    _print_summary(summary, args.format)
    return 0


def _add_synth_flags(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=0, help="base seed; frame k uses seed+k")
    p.add_argument("--frames", type=int, default=1, help="number of frames to generate")
    p.add_argument("--n-straight", type=int, default=4)
    p.add_argument("--n-arc", type=int, default=2)
    p.add_argument("--n-uturn", type=int, default=0)
    p.add_argument("--lane-spacing", type=float, default=3.5)
    p.add_argument("--curvature-min", type=float, default=0.001)
    p.add_argument("--curvature-max", type=float, default=0.004)
    p.add_argument("--n-traffic", type=int, default=4)
    p.add_argument("--split-prob", type=float, default=0.3)


def _add_grid_flags(p: argparse.ArgumentParser):
    p.add_argument("--rows", type=int, default=200)
    p.add_argument("--cols", type=int, default=104)
    p.add_argument("--thickness", type=float, default=1.0, help="stroke width in meters; 0 for thin trace")


def _add_decode_flags(p: argparse.ArgumentParser):
    p.add_argument("--policy", choices=[f.value for f in FusionPolicy], default=FusionPolicy.MASK_ONLY.value)
    p.add_argument("--samples", type=int, default=11, help="points per decoded centerline")
    p.add_argument("--row-valid-threshold", type=float, default=0.5)
    p.add_argument("--cell-mass-floor", type=float, default=0.05)
    p.add_argument("--min-valid-lines", type=int, default=3)


def _add_eval_flags(p: argparse.ArgumentParser):
    p.add_argument("--format", choices=["table", "json"], default="table")
    p.add_argument("--threads", type=int, default=1, help="frame workers; 0 uses the CPU count")
    p.add_argument("--iou-threshold", type=float, default=0.75)
    p.add_argument("--f1-distance", type=float, default=1.5)
    p.add_argument("--edge-threshold", type=float, default=0.5, help="score floor for predicted edges")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lanetopo", description="Lane centerline mask codec and benchmark tools.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate deterministic synthetic scenes")
    _add_synth_flags(p)
    p.add_argument("--out", required=True, help="*.scene.json or *.scenes.ndjson")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("rasterize", help="rasterize scene centerlines into instance masks")
    p.add_argument("--scene", required=True)
    p.add_argument("--out", required=True)
    _add_grid_flags(p)
    p.add_argument("--rle", action="store_true", help="run-length encode mask data")
    p.set_defaults(func=_cmd_rasterize)

    p = sub.add_parser("decode", help="decode mask predictions into polylines")
    p.add_argument("--masks", required=True, help="prediction file holding mask entries")
    p.add_argument("--out", required=True)
    _add_decode_flags(p)
    p.set_defaults(func=_cmd_decode)

    p = sub.add_parser("eval", help="score predictions against ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    _add_decode_flags(p)
    _add_eval_flags(p)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("roundtrip", help="synth, rasterize, decode, and score in one pass")
    _add_synth_flags(p)
    _add_grid_flags(p)
    _add_decode_flags(p)
    _add_eval_flags(p)
    p.set_defaults(func=_cmd_roundtrip)

    return ap


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (LaneTopoError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
