/**
 * Boundary validation. Shapes are checked before anything is handed to the
 * core toolkit, and every error names the offending dimension or field.
 * Semantic validation (id references, geometry rules) stays with the core,
 * whose messages carry JSON paths and are surfaced verbatim.
 */

import type { Direction, GridParams, PredictionSetData, Roi, SceneData, ScoreMatrixData } from "./types.js";

const DIRECTIONS: readonly Direction[] = ["up", "down", "left", "right"];

/** Lower-cases and checks a direction string. */
export function normalizeDirection(direction: string): Direction {
  if (typeof direction !== "string") {
    throw new TypeError(`direction must be a string, got ${typeof direction}`);
  }
  const canon = direction.toLowerCase() as Direction;
  if (!DIRECTIONS.includes(canon)) {
    throw new TypeError(`direction must be one of up, down, left, right (got ${JSON.stringify(direction)})`);
  }
  return canon;
}

function arrayDepth(value: unknown, limit = 4): number {
  let depth = 0;
  let node = value;
  while (Array.isArray(node) && depth < limit) {
    depth += 1;
    node = node[0];
  }
  return depth;
}

/**
 * Checks that `mask` is a rectangular 2-dimensional array of probabilities
 * matching the grid, and returns its row-major flattening.
 */
export function checkMask(mask: unknown, grid: GridParams): number[] {
  if (!Array.isArray(mask)) {
    throw new TypeError(`mask must be a 2-dimensional array, got ${typeof mask}`);
  }
  const depth = arrayDepth(mask);
  if (depth !== 2) {
    throw new TypeError(`mask must be 2-dimensional, got ${depth} dimension${depth === 1 ? "" : "s"}`);
  }
  if (mask.length === 0) {
    throw new TypeError("mask has 0 rows");
  }
  checkGrid(grid);
  if (mask.length !== grid.rows) {
    throw new TypeError(`mask has ${mask.length} rows, grid expects ${grid.rows}`);
  }
  const flat: number[] = [];
  for (let r = 0; r < mask.length; r++) {
    const row = mask[r] as unknown;
    if (!Array.isArray(row)) {
      throw new TypeError(`mask row ${r} is ${typeof row}, expected an array`);
    }
    if (row.length !== grid.cols) {
      throw new TypeError(`mask row ${r} has ${row.length} columns, grid expects ${grid.cols}`);
    }
    for (let c = 0; c < row.length; c++) {
      const v = row[c] as unknown;
      if (typeof v !== "number" || !Number.isFinite(v) || v < 0 || v > 1) {
        throw new RangeError(`mask[${r}][${c}] = ${String(v)} is not a probability in [0, 1]`);
      }
      flat.push(v);
    }
  }
  return flat;
}

/** Checks grid dimensions and the optional window. */
export function checkGrid(grid: GridParams): void {
  for (const name of ["rows", "cols"] as const) {
    const v = grid[name];
    if (!Number.isInteger(v) || v <= 0) {
      throw new RangeError(`grid ${name} must be a positive integer, got ${String(v)}`);
    }
  }
  if (grid.roi !== undefined) {
    checkRoi(grid.roi, "grid roi");
  }
}

/** Checks that a window has four finite bounds with positive extent. */
export function checkRoi(roi: Roi, label: string): void {
  if (typeof roi !== "object" || roi === null) {
    throw new TypeError(`${label} must be an object with x_min, x_max, y_min, y_max, got ${String(roi)}`);
  }
  for (const name of ["x_min", "x_max", "y_min", "y_max"] as const) {
    const v = roi[name];
    if (typeof v !== "number" || !Number.isFinite(v)) {
      throw new RangeError(`${label} ${name} must be a finite number, got ${String(v)}`);
    }
  }
  if (roi.x_min >= roi.x_max || roi.y_min >= roi.y_max) {
    throw new RangeError(`${label} has no area: [${roi.x_min}, ${roi.x_max}] x [${roi.y_min}, ${roi.y_max}]`);
  }
}

/** Checks a unit-interval scalar, naming the field. */
export function checkScore(value: number, name: string): void {
  if (typeof value !== "number" || !Number.isFinite(value) || value < 0 || value > 1) {
    throw new RangeError(`${name}=${String(value)} outside [0, 1]`);
  }
}

function checkPoints(points: unknown, label: string, minPoints: number): void {
  if (!Array.isArray(points)) {
    throw new TypeError(`${label} must be an array of [x, y, z] points, got ${typeof points}`);
  }
  if (points.length < minPoints) {
    throw new TypeError(`${label} needs at least ${minPoints} points, got ${points.length}`);
  }
  for (let i = 0; i < points.length; i++) {
    const p = points[i] as unknown;
    if (!Array.isArray(p) || p.length !== 3) {
      const got = Array.isArray(p) ? `${p.length} values` : typeof p;
      throw new TypeError(`${label}[${i}] must be [x, y, z], got ${got}`);
    }
  }
}

function checkScores(scores: ScoreMatrixData, label: string): void {
  if (typeof scores !== "object" || scores === null) {
    throw new TypeError(`${label} must be an object with rows, cols, and values, got ${String(scores)}`);
  }
  for (const name of ["rows", "cols", "values"] as const) {
    if (!Array.isArray(scores[name])) {
      throw new TypeError(`${label} ${name} must be an array, got ${typeof scores[name]}`);
    }
  }
  if (scores.values.length !== scores.rows.length) {
    throw new TypeError(`${label} has ${scores.values.length} value rows, expected ${scores.rows.length}`);
  }
  for (let i = 0; i < scores.values.length; i++) {
    const row = scores.values[i] as unknown;
    if (!Array.isArray(row)) {
      throw new TypeError(`${label} values row ${i} is ${typeof row}, expected an array`);
    }
    if (row.length !== scores.cols.length) {
      throw new TypeError(`${label} values row ${i} has ${row.length} columns, expected ${scores.cols.length}`);
    }
  }
}

/** Shape-checks a ground-truth frame mapping. */
export function checkScene(gt: SceneData): void {
  if (typeof gt !== "object" || gt === null) {
    throw new TypeError(`ground truth must be an object, got ${gt === null ? "null" : typeof gt}`);
  }
  if (typeof gt.frame_id !== "string") {
    throw new TypeError(`ground truth frame_id must be a string, got ${typeof gt.frame_id}`);
  }
  checkRoi(gt.roi, "ground truth roi");
  for (const name of ["centerlines", "traffic_elements", "topology_ll", "topology_lt"] as const) {
    if (!Array.isArray(gt[name])) {
      throw new TypeError(`ground truth ${name} must be an array, got ${typeof gt[name]}`);
    }
  }
  gt.centerlines.forEach((c, i) => checkPoints(c.points, `centerlines[${i}].points`, 2));
}

/** Shape-checks a prediction frame mapping. */
export function checkPrediction(pred: PredictionSetData): void {
  if (typeof pred !== "object" || pred === null) {
    throw new TypeError(`prediction must be an object, got ${pred === null ? "null" : typeof pred}`);
  }
  if (typeof pred.frame_id !== "string") {
    throw new TypeError(`prediction frame_id must be a string, got ${typeof pred.frame_id}`);
  }
  for (const name of ["centerline_preds", "traffic_preds"] as const) {
    if (!Array.isArray(pred[name])) {
      throw new TypeError(`prediction ${name} must be an array, got ${typeof pred[name]}`);
    }
  }
  pred.centerline_preds.forEach((entry, i) => {
    checkScore(entry.confidence, `centerline_preds[${i}].confidence`);
    if (entry.polyline !== undefined) {
      checkPoints(entry.polyline, `centerline_preds[${i}].polyline`, 2);
    }
    if (entry.bezier !== undefined) {
      checkPoints(entry.bezier, `centerline_preds[${i}].bezier`, 5);
    }
    if (entry.mask !== undefined) {
      const m = entry.mask;
      checkGrid({ rows: m.rows, cols: m.cols });
      checkRoi(m.roi, `centerline_preds[${i}].mask.roi`);
      if (m.data !== undefined && m.data.length !== m.rows * m.cols) {
        throw new TypeError(
          `centerline_preds[${i}].mask.data has ${m.data.length} values, expected ${m.rows * m.cols}`,
        );
      }
    }
  });
  pred.traffic_preds.forEach((t, i) => checkScore(t.confidence, `traffic_preds[${i}].confidence`));
  checkScores(pred.ll_scores, "ll_scores");
  checkScores(pred.lt_scores, "lt_scores");
}
