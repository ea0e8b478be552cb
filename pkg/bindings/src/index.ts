import { readFileSync, renameSync, writeFileSync } from "node:fs";

import { BoundGraph, decode, encode } from "./format";

export { AugmentOptions, FrameStack, build } from "./build";
export { BoundGraph, GraphFormatError, RelationEdges, decode, encode,
         indexWidthFor } from "./format";

/** Read a .gvg graph file. */
export function load(path: string): BoundGraph {
  return decode(readFileSync(path));
}

/** Write a .gvg graph file atomically (temp file + rename). */
export function save(graph: BoundGraph, path: string): void {
  const tmp = `${path}.${process.pid}.tmp`;
  writeFileSync(tmp, encode(graph));
  renameSync(tmp, path);
}
