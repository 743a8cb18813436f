/**
 * Subprocess plumbing. The front end never links against the core toolkit;
 * every operation serializes its inputs to a scratch directory, invokes the
 * command-line interface, and parses what comes back.
 */

import { spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

/** Interpreter used to launch the toolkit; override with LANETOPO_PYTHON. */
export function pythonExecutable(): string {
  return process.env.LANETOPO_PYTHON ?? "python3";
}

/**
 * Runs one CLI subcommand and returns its stdout. A nonzero exit becomes an
 * Error carrying the subcommand name and the stderr text, which for input
 * problems holds the core validator's message with its JSON path.
 */
export function runCli(args: string[]): string {
  const result = spawnSync(pythonExecutable(), ["-m", "lanetopo.cli", ...args], {
    encoding: "utf8",
    maxBuffer: 256 * 1024 * 1024,
  });
  if (result.error) {
    throw result.error;
  }
  if (result.status !== 0) {
    const detail = (result.stderr ?? "").trim() || `exit status ${result.status}`;
    throw new Error(`lanetopo ${args[0]} failed: ${detail}`);
  }
  return result.stdout;
}

/** Runs `fn` with a fresh scratch directory, removing it afterwards. */
export function withScratchDir<T>(fn: (dir: string) => T): T {
  const dir = mkdtempSync(join(tmpdir(), "lanetopo-"));
  try {
    return fn(dir);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

/** Serializes `obj` as JSON into `dir` and returns the file path. */
export function writeJson(dir: string, name: string, obj: unknown): string {
  const path = join(dir, name);
  writeFileSync(path, JSON.stringify(obj) + "\n", "utf8");
  return path;
}

/** Reads and parses one JSON document. */
export function readJson(path: string): unknown {
  return JSON.parse(readFileSync(path, "utf8"));
}
