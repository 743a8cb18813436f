"""Lane-centerline mask codec, road-topology scoring, and scene tooling."""

from .errors import (
    DecodeFailed,
    EmptyRasterization,
    InsufficientSamples,
    InvalidDim,
    InvalidMatrix,
    InvalidPolyline,
    InvalidSampleCount,
    InvalidScore,
    LaneTopoError,
    ParseError,
    ValidationError,
)
from .geometry import (
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
from .mask_codec import (
    DecodeConfig,
    FusionPolicy,
    GridSpec,
    InstanceMask,
    decode_mask,
    fix_bezier_endpoints,
    fuse_predictions,
    rasterize_centerline,
)
from .metrics import (
    Box2D,
    EvalSummary,
    Matching,
    MetricConfig,
    average_precision,
    box_iou,
    chamfer,
    det_lanes,
    det_traffic,
    discrete_frechet,
    evaluate,
    evaluate_frames,
    f1_score,
    hungarian,
    match_instances,
    ols,
    top_score,
)
from .scene_io import (
    Centerline,
    CenterlinePrediction,
    PredictionSet,
    Scene,
    SynthConfig,
    TrafficElement,
    TrafficPrediction,
    generate_synthetic_scene,
    load_prediction,
    load_predictions,
    load_scene,
    load_scenes,
    perturb_scene,
    save_prediction,
    save_predictions,
    save_scene,
    save_scenes,
)
from .topology import (
    PositionalEncoding,
    ScoreMatrix,
    adjacency_from_scores,
    encode_point,
    sinkhorn_normalize,
    sinusoidal_encode,
)

__version__ = "0.1.0"

__all__ = [
    "BezierCurve",
    "Box2D",
    "Centerline",
    "CenterlinePrediction",
    "DecodeConfig",
    "DecodeFailed",
    "DirectionLabel",
    "EmptyRasterization",
    "EvalSummary",
    "FusionPolicy",
    "GridSpec",
    "InstanceMask",
    "InsufficientSamples",
    "InvalidDim",
    "InvalidMatrix",
    "InvalidPolyline",
    "InvalidSampleCount",
    "InvalidScore",
    "LaneTopoError",
    "Matching",
    "MetricConfig",
    "ParseError",
    "Point3",
    "Polyline3D",
    "PositionalEncoding",
    "PredictionSet",
    "QuadraticFit",
    "Roi",
    "Scene",
    "ScoreMatrix",
    "SynthConfig",
    "TrafficElement",
    "TrafficPrediction",
    "ValidationError",
    "adjacency_from_scores",
    "assign_direction_label",
    "average_precision",
    "bezier_sample",
    "box_iou",
    "chamfer",
    "clip_to_roi",
    "decode_mask",
    "det_lanes",
    "det_traffic",
    "discrete_frechet",
    "encode_point",
    "evaluate",
    "evaluate_frames",
    "f1_score",
    "fit_quadratic",
    "fix_bezier_endpoints",
    "fuse_predictions",
    "generate_synthetic_scene",
    "hungarian",
    "load_prediction",
    "load_predictions",
    "load_scene",
    "load_scenes",
    "match_instances",
    "ols",
    "order_points",
    "perturb_scene",
    "rasterize_centerline",
    "resample_polyline",
    "save_prediction",
    "save_predictions",
    "save_scene",
    "save_scenes",
    "sinkhorn_normalize",
    "sinusoidal_encode",
    "top_score",
]
