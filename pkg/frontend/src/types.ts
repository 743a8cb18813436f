/**
 * Data shapes shared across the front end.
 *
 * Scene and prediction mappings mirror the core toolkit's JSON schemas
 * field-for-field, so a value accepted here serializes directly into a file
 * the command-line interface can read.
 */

/** Axis-aligned evaluation window on the ground plane, in meters. */
export interface Roi {
  x_min: number;
  x_max: number;
  y_min: number;
  y_max: number;
}

/**
 * Four-way traffic-flow tag attached to each mask instance. Input strings are
 * matched case-insensitively; these are the canonical lower-case forms.
 */
export type Direction = "up" | "down" | "left" | "right";

/**
 * Bird's-eye-view grid geometry. Rows index the longitudinal axis (x) and
 * columns the lateral axis (y); cell (r, c) is centered at
 * (x_min + (r + 0.5) * cell_width, y_min + (c + 0.5) * cell_height).
 */
export interface GridParams {
  rows: number;
  cols: number;
  /** Defaults to the standard ±50 m × ±25 m window when omitted. */
  roi?: Roi;
}

/** Knobs for expectation-based mask decoding; omitted fields use defaults. */
export interface DecodeOptions {
  /** Peak probability a line needs before it contributes a point (default 0.5). */
  row_valid_threshold?: number;
  /** Per-cell mass below this is ignored inside a valid line (default 0.05). */
  cell_mass_floor?: number;
  /** Points per decoded centerline (default 11). */
  sample_count?: number;
  /** Fewer valid lines than this fails the decode (default 3). */
  min_valid_lines?: number;
  /** Mask confidence carried into failure reports (default 1.0). */
  confidence?: number;
}

/** One ground-truth lane centerline: unique id plus an n×3 point list. */
export interface CenterlineData {
  id: string;
  points: number[][];
}

/** One ground-truth traffic element: image-space box [x1, y1, x2, y2]. */
export interface TrafficElementData {
  id: string;
  category: string;
  box: number[];
}

/** Ground truth for one frame: lanes, traffic elements, topology edges. */
export interface SceneData {
  frame_id: string;
  roi: Roi;
  centerlines: CenterlineData[];
  traffic_elements: TrafficElementData[];
  /** Lane-to-lane successor edges as [source id, destination id]. */
  topology_ll: [string, string][];
  /** Lane-to-traffic-element association edges. */
  topology_lt: [string, string][];
}

/**
 * One serialized instance mask. Exactly one of `data` (row-major flat
 * probabilities, rows*cols long) or `rle` (alternating value, run-length
 * pairs covering rows*cols cells) must be present.
 */
export interface MaskData {
  rows: number;
  cols: number;
  roi: Roi;
  direction: string;
  confidence: number;
  data?: number[];
  rle?: number[];
}

/**
 * One predicted centerline. Exactly one of: polyline, mask, bezier, or
 * mask + bezier (the fusion pair). `direction` optionally overrides the
 * mask's label when fusing.
 */
export interface CenterlinePredData {
  confidence: number;
  polyline?: number[][];
  mask?: MaskData;
  bezier?: number[][];
  direction?: string;
}

/** One predicted traffic element. */
export interface TrafficPredData {
  confidence: number;
  category: string;
  box: number[];
}

/**
 * Pairwise topology scores. Row and column ids are prediction indices; an
 * empty matrix is written as {rows: [], cols: [], values: []}.
 */
export interface ScoreMatrixData {
  rows: number[];
  cols: number[];
  values: number[][];
}

/** Model output for one frame, aligned to a SceneData by frame_id. */
export interface PredictionSetData {
  frame_id: string;
  centerline_preds: CenterlinePredData[];
  traffic_preds: TrafficPredData[];
  ll_scores: ScoreMatrixData;
  lt_scores: ScoreMatrixData;
}

/** How to combine the mask and Bezier branches of one instance. */
export type FusionPolicy = "mask" | "bezier" | "fusion";

/** Evaluation knobs; omitted fields use the scorer's defaults. */
export interface EvalOptions {
  policy?: FusionPolicy;
  /** Points per decoded or resampled centerline (default 11). */
  samples?: number;
  row_valid_threshold?: number;
  cell_mass_floor?: number;
  min_valid_lines?: number;
  /** Traffic-element detection IoU threshold (default 0.75). */
  iou_threshold?: number;
  /** Point-to-segment distance bound for the F1 metric (default 1.5 m). */
  f1_distance?: number;
  /** Score floor for counting a predicted topology edge (default 0.5). */
  edge_threshold?: number;
  /** Frame workers; 0 uses the CPU count (default 1). */
  threads?: number;
}

/** The seven benchmark scores, each in [0, 1]. */
export interface EvalSummary {
  det_l_frechet: number;
  det_l_chamfer: number;
  det_t: number;
  top_ll: number;
  top_lt: number;
  f1: number;
  ols: number;
}

/** Field names of EvalSummary, in canonical order. */
export const SUMMARY_FIELDS = [
  "det_l_frechet",
  "det_l_chamfer",
  "det_t",
  "top_ll",
  "top_lt",
  "f1",
  "ols",
] as const;
