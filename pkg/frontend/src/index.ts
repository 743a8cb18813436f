/**
 * Front end for the lanetopo lane-topology toolkit.
 *
 * Exposes mask decoding, prediction scoring, and the aggregate score without
 * linking against the core: inputs are validated at this boundary, written to
 * scratch files, and handed to the toolkit's command-line interface, so the
 * numbers returned here are the core's own, bit for bit.
 */

import { join } from "node:path";

import { readJson, runCli, withScratchDir, writeJson } from "./runner.js";
import type {
  DecodeOptions,
  EvalOptions,
  EvalSummary,
  GridParams,
  PredictionSetData,
  Roi,
  SceneData,
} from "./types.js";
import { SUMMARY_FIELDS } from "./types.js";
import { checkMask, checkPrediction, checkScene, checkScore, normalizeDirection } from "./validate.js";

export * from "./types.js";
export { pythonExecutable } from "./runner.js";

/** Matches the core library version. */
export const VERSION = "0.1.0";

/** Standard evaluation window: ±50 m longitudinal, ±25 m lateral. */
export const DEFAULT_ROI: Roi = { x_min: -50.0, x_max: 50.0, y_min: -25.0, y_max: 25.0 };

const EMPTY_SCORES = { rows: [], cols: [], values: [] };

/** Raised when a mask has too few valid lines to yield a centerline. */
export class DecodeFailedError extends Error {
  /** Confidence of the mask that failed to decode. */
  readonly confidence: number;

  constructor(message: string, confidence: number) {
    super(message);
    this.name = "DecodeFailedError";
    this.confidence = confidence;
  }
}

function decodeFlags(options: DecodeOptions): string[] {
  const flags: string[] = [];
  if (options.row_valid_threshold !== undefined) flags.push("--row-valid-threshold", String(options.row_valid_threshold));
  if (options.cell_mass_floor !== undefined) flags.push("--cell-mass-floor", String(options.cell_mass_floor));
  if (options.sample_count !== undefined) flags.push("--samples", String(options.sample_count));
  if (options.min_valid_lines !== undefined) flags.push("--min-valid-lines", String(options.min_valid_lines));
  return flags;
}

function evalFlags(options: EvalOptions): string[] {
  const flags: string[] = [];
  if (options.policy !== undefined) flags.push("--policy", options.policy);
  if (options.samples !== undefined) flags.push("--samples", String(options.samples));
  if (options.row_valid_threshold !== undefined) flags.push("--row-valid-threshold", String(options.row_valid_threshold));
  if (options.cell_mass_floor !== undefined) flags.push("--cell-mass-floor", String(options.cell_mass_floor));
  if (options.min_valid_lines !== undefined) flags.push("--min-valid-lines", String(options.min_valid_lines));
  if (options.iou_threshold !== undefined) flags.push("--iou-threshold", String(options.iou_threshold));
  if (options.f1_distance !== undefined) flags.push("--f1-distance", String(options.f1_distance));
  if (options.edge_threshold !== undefined) flags.push("--edge-threshold", String(options.edge_threshold));
  if (options.threads !== undefined) flags.push("--threads", String(options.threads));
  return flags;
}

/**
 * Decodes one instance mask into an n×3 centerline.
 *
 * @param mask Row-major rows×cols probability grid; rows index x, cols y.
 * @param direction Flow tag, one of up/down/left/right (case-insensitive).
 * @param grid Grid geometry the mask is defined on.
 * @param options Decoding thresholds; omitted fields use defaults.
 * @returns `sample_count` points [x, y, z] ordered along the flow direction.
 * @throws {TypeError|RangeError} When a shape or value fails at the boundary.
 * @throws {DecodeFailedError} When too few lines pass the validity threshold.
 */
export function decode(
  mask: number[][],
  direction: string,
  grid: GridParams,
  options: DecodeOptions = {},
): number[][] {
  const canon = normalizeDirection(direction);
  const flat = checkMask(mask, grid);
  const confidence = options.confidence ?? 1.0;
  checkScore(confidence, "confidence");
  const payload = {
    frame_id: "frame",
    centerline_preds: [
      {
        confidence,
        mask: {
          rows: grid.rows,
          cols: grid.cols,
          roi: grid.roi ?? DEFAULT_ROI,
          direction: canon,
          confidence,
          data: flat,
        },
      },
    ],
    traffic_preds: [],
    ll_scores: EMPTY_SCORES,
    lt_scores: EMPTY_SCORES,
  };
  return withScratchDir((dir) => {
    const inPath = writeJson(dir, "masks.json", payload);
    const outPath = join(dir, "decoded.json");
    runCli(["decode", "--masks", inPath, "--out", outPath, ...decodeFlags(options)]);
    const decoded = readJson(outPath) as { centerline_preds: Array<{ polyline?: number[][] }> };
    const entry = decoded.centerline_preds[0];
    if (entry === undefined || entry.polyline === undefined) {
      const min = options.min_valid_lines ?? 3;
      throw new DecodeFailedError(
        `mask decode failed: fewer than ${min} lines reached the validity threshold`,
        confidence,
      );
    }
    return entry.polyline;
  });
}

/**
 * Scores one prediction frame against its ground-truth frame.
 *
 * Mappings mirror the toolkit's JSON schemas field-for-field; frame ids must
 * agree. Deep semantic errors (unknown ids, degenerate geometry) surface as
 * Errors carrying the core validator's message and JSON path.
 *
 * @returns The seven benchmark scores, exactly as the scorer reports them.
 */
export function evaluate(pred: PredictionSetData, gt: SceneData, options: EvalOptions = {}): EvalSummary {
  checkPrediction(pred);
  checkScene(gt);
  if (pred.frame_id !== gt.frame_id) {
    throw new TypeError(
      `prediction frame_id ${JSON.stringify(pred.frame_id)} does not match ground truth ${JSON.stringify(gt.frame_id)}`,
    );
  }
  return withScratchDir((dir) => {
    const predPath = writeJson(dir, "pred.json", pred);
    const gtPath = writeJson(dir, "gt.json", gt);
    const stdout = runCli(["eval", "--pred", predPath, "--gt", gtPath, "--format", "json", ...evalFlags(options)]);
    const parsed = JSON.parse(stdout) as Record<string, unknown>;
    const summary = {} as Record<(typeof SUMMARY_FIELDS)[number], number>;
    for (const field of SUMMARY_FIELDS) {
      const v = parsed[field];
      if (typeof v !== "number") {
        throw new Error(`scorer output is missing ${field}`);
      }
      summary[field] = v;
    }
    return summary;
  });
}

/**
 * Aggregate score: mean of the two detection scores and the exponent-damped
 * topology scores, 0.25 * (detL + detT + topLl^e + topLt^e).
 *
 * @param detLFrechet Lane detection score (Frechet branch), in [0, 1].
 * @param detT Traffic-element detection score, in [0, 1].
 * @param topLl Lane-lane topology score, in [0, 1].
 * @param topLt Lane-traffic topology score, in [0, 1].
 * @param exponent Damping exponent applied to both topology scores.
 */
export function ols(
  detLFrechet: number,
  detT: number,
  topLl: number,
  topLt: number,
  exponent = 0.5,
): number {
  checkScore(detLFrechet, "det_l_frechet");
  checkScore(detT, "det_t");
  checkScore(topLl, "top_ll");
  checkScore(topLt, "top_lt");
  if (typeof exponent !== "number" || !Number.isFinite(exponent) || exponent <= 0) {
    throw new RangeError(`exponent must be a positive finite number, got ${String(exponent)}`);
  }
  // Square root is correctly rounded everywhere; the general power is not.
  const damp = (v: number): number => (exponent === 0.5 ? Math.sqrt(v) : Math.pow(v, exponent));
  return 0.25 * (detLFrechet + detT + damp(topLl) + damp(topLt));
}
