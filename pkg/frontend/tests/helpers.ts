/**
 * Shared test utilities: a deterministic RNG, an independent CLI spawn path
 * for parity checks, and builders for expectation masks and random fixtures.
 */

import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import type {
  CenterlineData,
  CenterlinePredData,
  PredictionSetData,
  Roi,
  SceneData,
  TrafficElementData,
  TrafficPredData,
} from "../src/types";

/** Small deterministic RNG so fixtures are reproducible across runs. */
export function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/**
 * Runs the CLI directly, bypassing the front end entirely. Parity tests use
 * this as the reference path.
 */
export function runCliRaw(args: string[]): string {
  return execFileSync("python3", ["-m", "lanetopo.cli", ...args], {
    encoding: "utf8",
    maxBuffer: 256 * 1024 * 1024,
  });
}

/** Runs `fn` with a scratch directory that is removed afterwards. */
export function withDir<T>(fn: (dir: string) => T): T {
  const dir = mkdtempSync(join(tmpdir(), "lanetopo-test-"));
  try {
    return fn(dir);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

export function writeText(dir: string, name: string, text: string): string {
  const path = join(dir, name);
  writeFileSync(path, text, "utf8");
  return path;
}

export function readLines(path: string): string[] {
  return readFileSync(path, "utf8").split("\n").filter((line) => line.trim().length > 0);
}

export const UNIT_ROI: Roi = { x_min: 0, x_max: 10, y_min: 0, y_max: 10 };

/**
 * Builds a mask whose per-line expectation hits `target` exactly, by
 * splitting each line's mass across the two cells bracketing the target
 * coordinate. Longitudinal masks have independent rows (target maps x to y);
 * lateral masks have independent columns (target maps y to x).
 */
export function expectationMask(
  rows: number,
  cols: number,
  roi: Roi,
  axis: "longitudinal" | "lateral",
  target: (coord: number) => number,
  validLines: number[],
  peak: (line: number) => number = () => 1.0,
): number[][] {
  const cellW = (roi.x_max - roi.x_min) / rows;
  const cellH = (roi.y_max - roi.y_min) / cols;
  const mask: number[][] = Array.from({ length: rows }, () => Array<number>(cols).fill(0));
  for (const line of validLines) {
    if (axis === "longitudinal") {
      const x = roi.x_min + (line + 0.5) * cellW;
      const u = (target(x) - roi.y_min) / cellH - 0.5;
      const c0 = Math.floor(u);
      const frac = u - c0;
      const p = peak(line);
      if (c0 >= 0 && c0 < cols) mask[line][c0] = p * (1 - frac);
      if (c0 + 1 >= 0 && c0 + 1 < cols) mask[line][c0 + 1] = p * frac;
    } else {
      const y = roi.y_min + (line + 0.5) * cellH;
      const u = (target(y) - roi.x_min) / cellW - 0.5;
      const r0 = Math.floor(u);
      const frac = u - r0;
      const p = peak(line);
      if (r0 >= 0 && r0 < rows) mask[r0][line] = p * (1 - frac);
      if (r0 + 1 >= 0 && r0 + 1 < rows) mask[r0 + 1][line] = p * frac;
    }
  }
  return mask;
}

export const EMPTY_SCORES = { rows: [], cols: [], values: [] };

/** One random ground-truth frame plus a perturbed prediction for it. */
export interface EvalFixture {
  gt: SceneData;
  pred: PredictionSetData;
}

/** Optional extra prediction entry exercising the non-polyline forms. */
export type ExtraEntry = "mask" | "bezier" | "failmask";

/**
 * Builds a random scene and a jittered prediction for it. Lanes are
 * x-monotone polylines inside the standard window; predictions drop lanes,
 * jitter points and boxes, and carry random confidences and topology scores.
 * `extra` appends one mask-form, bezier-form, or undecodable mask entry.
 */
export function randomEvalFixture(frameId: string, rng: () => number, extra?: ExtraEntry): EvalFixture {
  const categories = ["light", "sign"];
  const nLanes = 2 + Math.floor(rng() * 3);
  const centerlines: CenterlineData[] = [];
  for (let j = 0; j < nLanes; j++) {
    const k = 4 + Math.floor(rng() * 5);
    const base = -18 + 36 * rng();
    const slope = (rng() - 0.5) * 0.2;
    const points: number[][] = [];
    for (let i = 0; i < k; i++) {
      const x = -40 + (80 * i) / (k - 1);
      points.push([x, base + slope * x + (rng() - 0.5) * 0.8, 0]);
    }
    if (rng() < 0.3) points.reverse();
    centerlines.push({ id: `CL${j}`, points });
  }

  const nTraffic = Math.floor(rng() * 3);
  const traffic: TrafficElementData[] = [];
  for (let j = 0; j < nTraffic; j++) {
    const x1 = 100 + rng() * 600;
    const y1 = 80 + rng() * 400;
    traffic.push({
      id: `TE${j}`,
      category: categories[Math.floor(rng() * categories.length)],
      box: [x1, y1, x1 + 30 + rng() * 120, y1 + 20 + rng() * 90],
    });
  }

  const topologyLl: [string, string][] = [];
  for (let j = 0; j + 1 < nLanes; j++) {
    if (rng() < 0.6) topologyLl.push([`CL${j}`, `CL${j + 1}`]);
  }
  const topologyLt: [string, string][] = [];
  for (let j = 0; j < nLanes; j++) {
    for (let t = 0; t < nTraffic; t++) {
      if (rng() < 0.35) topologyLt.push([`CL${j}`, `TE${t}`]);
    }
  }

  const gt: SceneData = {
    frame_id: frameId,
    roi: { x_min: -50, x_max: 50, y_min: -25, y_max: 25 },
    centerlines,
    traffic_elements: traffic,
    topology_ll: topologyLl,
    topology_lt: topologyLt,
  };

  const sigma = rng() * 1.2;
  const lanePreds: CenterlinePredData[] = [];
  for (const lane of centerlines) {
    if (rng() < 0.2) continue;
    const jittered = lane.points.map((p) => [
      p[0] + (rng() - 0.5) * 2 * sigma,
      p[1] + (rng() - 0.5) * 2 * sigma,
      p[2],
    ]);
    lanePreds.push({ confidence: 0.05 + 0.95 * rng(), polyline: jittered });
  }
  if (rng() < 0.3) {
    const y = -20 + 40 * rng();
    lanePreds.push({
      confidence: 0.05 + 0.95 * rng(),
      polyline: [
        [-30, y, 0],
        [0, y + 2, 0],
        [30, y, 0],
      ],
    });
  }

  const trafficPreds: TrafficPredData[] = [];
  for (const te of traffic) {
    if (rng() < 0.2) continue;
    const [x1, y1, x2, y2] = te.box;
    const dx = (rng() - 0.5) * 30;
    const dy = (rng() - 0.5) * 30;
    const sw = 0.8 + 0.4 * rng();
    const sh = 0.8 + 0.4 * rng();
    trafficPreds.push({
      confidence: 0.05 + 0.95 * rng(),
      category: te.category,
      box: [x1 + dx, y1 + dy, x1 + dx + (x2 - x1) * sw, y1 + dy + (y2 - y1) * sh],
    });
  }

  if (extra === "mask" || extra === "failmask") {
    // Constant-y mask on a 40x24 grid; two valid rows cannot decode.
    const y0 = -15 + 30 * rng();
    const lines =
      extra === "failmask" ? [8, 9] : Array.from({ length: 24 }, (_, k) => 8 + k);
    const roi = { x_min: -50, x_max: 50, y_min: -25, y_max: 25 };
    const grid = expectationMask(40, 24, roi, "longitudinal", () => y0, lines);
    const flat: number[] = [];
    for (const row of grid) for (const v of row) flat.push(v);
    lanePreds.push({
      confidence: 0.05 + 0.95 * rng(),
      mask: {
        rows: 40,
        cols: 24,
        roi,
        direction: rng() < 0.5 ? "up" : "down",
        confidence: 0.05 + 0.95 * rng(),
        data: flat,
      },
    });
  } else if (extra === "bezier") {
    const p0 = [-30 + 20 * rng(), -15 + 30 * rng(), 0];
    const p1 = [10 + 20 * rng(), -15 + 30 * rng(), 0];
    const cps = [0, 0.25, 0.5, 0.75, 1].map((t) => [
      p0[0] + t * (p1[0] - p0[0]),
      p0[1] + t * (p1[1] - p0[1]),
      0,
    ]);
    lanePreds.push({ confidence: 0.05 + 0.95 * rng(), bezier: cps });
  }

  const P = lanePreds.length;
  const T = trafficPreds.length;
  const indices = (n: number) => Array.from({ length: n }, (_, i) => i);
  const randomMatrix = (r: number, c: number) =>
    Array.from({ length: r }, () => Array.from({ length: c }, () => rng()));
  const pred: PredictionSetData = {
    frame_id: frameId,
    centerline_preds: lanePreds,
    traffic_preds: trafficPreds,
    ll_scores: P > 0 ? { rows: indices(P), cols: indices(P), values: randomMatrix(P, P) } : EMPTY_SCORES,
    lt_scores: P > 0 && T > 0 ? { rows: indices(P), cols: indices(T), values: randomMatrix(P, T) } : EMPTY_SCORES,
  };
  return { gt, pred };
}
