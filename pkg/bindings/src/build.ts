/**
 * Graph building through the command-line pipeline.
 *
 * Frames are handed over as a raw RGB24 file plus JSON sidecar, the CLI
 * compiles them into a .gvg file, and the result is decoded back. Because
 * the actual computation happens in the CLI, the serialized output is
 * byte-identical to what a direct CLI invocation produces.
 */

import { spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { BoundGraph, decode } from "./format";

/** Contiguous float pixel stack, frame-major, values in [0, 1]. */
export interface FrameStack {
  data: Float32Array;
  frames: number;
  height: number;
  width: number;
}

export interface AugmentOptions {
  sigmaEdge?: number;
  sigmaNode?: number;
  pEdge?: number;
  pNode?: number;
  seed?: number;
}

/** Resolve the CLI command; override with GRAPHVID_CLI="python3 -m graphvid". */
function cliCommand(): string[] {
  const env = process.env.GRAPHVID_CLI;
  return env ? env.split(" ").filter(Boolean) : ["graphvid"];
}

function quantize(stack: FrameStack): Uint8Array {
  if (!(stack.data instanceof Float32Array)) {
    throw new TypeError("frame data must be a contiguous Float32Array");
  }
  const expected = stack.frames * stack.height * stack.width * 3;
  if (stack.data.length !== expected) {
    throw new RangeError(
      `frame data has ${stack.data.length} values, expected ${expected} ` +
      `(${stack.frames}x${stack.height}x${stack.width}x3)`);
  }
  const bytes = new Uint8Array(stack.data.length);
  for (let i = 0; i < stack.data.length; i++) {
    const v = stack.data[i];
    if (!(v >= 0 && v <= 1)) {
      throw new RangeError(`pixel value ${v} at index ${i} outside [0, 1]`);
    }
    bytes[i] = Math.round(v * 255);
  }
  return bytes;
}

export function runCli(args: string[], cwd?: string): void {
  const [command, ...prefix] = cliCommand();
  const result = spawnSync(command, [...prefix, ...args],
                           { cwd, encoding: "utf8" });
  if (result.error) {
    throw new Error(`failed to run ${command}: ${result.error.message}`);
  }
  if (result.status !== 0) {
    throw new Error(
      `graph build failed (exit ${result.status}): ${result.stderr.trim()}`);
  }
}

/**
 * Compile one clip into a graph. Pixel floats are quantized to 8-bit exactly
 * as the ingest step expects; optional augmentation parameters are passed
 * through to the pipeline.
 */
export function build(stack: FrameStack, superpixels: number,
                      dProximity?: number,
                      augment?: AugmentOptions): BoundGraph {
  const bytes = quantize(stack);
  const work = mkdtempSync(join(tmpdir(), "graphvid-"));
  try {
    const rawPath = join(work, "clip.raw");
    writeFileSync(rawPath, bytes);
    writeFileSync(rawPath + ".json", JSON.stringify({
      height: stack.height, width: stack.width, frames: stack.frames,
    }));
    const outDir = join(work, "out");
    const args = [
      "build", rawPath, "--format", "raw_rgb", "--output", outDir,
      "--superpixels", String(superpixels),
      "--window", String(stack.frames),
      "--frame-stride", "1", "--clip-stride", "1",
    ];
    if (dProximity !== undefined) {
      args.push("--d-proximity", String(dProximity));
    }
    if (augment !== undefined) {
      args.push("--augment");
      const flags: Array<[string, number | undefined]> = [
        ["--sigma-edge", augment.sigmaEdge],
        ["--sigma-node", augment.sigmaNode],
        ["--p-edge", augment.pEdge],
        ["--p-node", augment.pNode],
        ["--seed", augment.seed],
      ];
      for (const [flag, value] of flags) {
        if (value !== undefined) {
          args.push(flag, String(value));
        }
      }
    }
    runCli(args);
    return decode(readFileSync(join(outDir, "clip_0.gvg")));
  } finally {
    rmSync(work, { recursive: true, force: true });
  }
}
