/**
 * The .gvg binary graph format, little-endian throughout.
 *
 * header (20 bytes): magic "GVG1" | nodeCount u32 | spatialEdgeCount u32 |
 *   temporalEdgeCount u32 | frameCount u16 | indexWidth u8 | flags u8
 * node table: frameIndex u16, normY f32, normX f32, r f32, g f32, b f32
 * spatial then temporal edge table: src, dst at indexWidth, distance f32
 *
 * Edge indices use 2 bytes when nodeCount < 65536, otherwise 4; decoding
 * widens them to Int32Array losslessly.
 */

const MAGIC = 0x31475647; // "GVG1" read as LE u32
export const HEADER_SIZE = 20;
const NODE_SIZE = 22;

export class GraphFormatError extends Error {}

/** Edges of one relation: edgeIndex is 2 x E row-major (sources, then targets). */
export interface RelationEdges {
  edgeIndex: Int32Array;
  edgeAttr: Float32Array;
}

export interface BoundGraph {
  frameCount: number;
  nodeCount: number;
  frameIndex: Int32Array;
  /** N x 5 row-major: normY, normX, r, g, b. */
  nodeFeatures: Float32Array;
  spatial: RelationEdges;
  temporal: RelationEdges;
}

export function indexWidthFor(nodeCount: number): 2 | 4 {
  return nodeCount < 65536 ? 2 : 4;
}

function edgeSize(width: number): number {
  return 2 * width + 4;
}

export function edgeCount(rel: RelationEdges): number {
  if (rel.edgeIndex.length !== 2 * rel.edgeAttr.length) {
    throw new GraphFormatError(
      `edgeIndex length ${rel.edgeIndex.length} does not match ` +
      `${rel.edgeAttr.length} attributes`);
  }
  return rel.edgeAttr.length;
}

export function decode(data: Uint8Array): BoundGraph {
  if (data.byteLength < HEADER_SIZE) {
    throw new GraphFormatError("not a graph file: truncated header");
  }
  const view = new DataView(data.buffer, data.byteOffset, data.byteLength);
  if (view.getUint32(0, true) !== MAGIC) {
    throw new GraphFormatError("not a graph file");
  }
  const nodeCount = view.getUint32(4, true);
  const spatialCount = view.getUint32(8, true);
  const temporalCount = view.getUint32(12, true);
  const frameCount = view.getUint16(16, true);
  const width = view.getUint8(18);
  if (width !== 2 && width !== 4) {
    throw new GraphFormatError(`invalid index width ${width}`);
  }
  if (width === 2 && nodeCount >= 65536) {
    throw new GraphFormatError(
      "index width 2 cannot address the declared node count");
  }
  const expected = HEADER_SIZE + nodeCount * NODE_SIZE +
    (spatialCount + temporalCount) * edgeSize(width);
  if (data.byteLength !== expected) {
    throw new GraphFormatError(
      `truncated graph file: ${data.byteLength} bytes, expected ${expected}`);
  }

  const frameIndex = new Int32Array(nodeCount);
  const nodeFeatures = new Float32Array(nodeCount * 5);
  let offset = HEADER_SIZE;
  for (let i = 0; i < nodeCount; i++) {
    const t = view.getUint16(offset, true);
    if (t >= frameCount) {
      throw new GraphFormatError(
        "node frame index outside the declared frame count");
    }
    frameIndex[i] = t;
    for (let c = 0; c < 5; c++) {
      nodeFeatures[i * 5 + c] = view.getFloat32(offset + 2 + 4 * c, true);
    }
    offset += NODE_SIZE;
  }

  const readEdges = (count: number): RelationEdges => {
    const edgeIndex = new Int32Array(2 * count);
    const edgeAttr = new Float32Array(count);
    for (let e = 0; e < count; e++) {
      const src = width === 2 ? view.getUint16(offset, true)
                              : view.getUint32(offset, true);
      const dst = width === 2 ? view.getUint16(offset + width, true)
                              : view.getUint32(offset + width, true);
      if (src >= nodeCount || dst >= nodeCount) {
        throw new GraphFormatError("edge index out of bounds");
      }
      edgeIndex[e] = src;
      edgeIndex[count + e] = dst;
      edgeAttr[e] = view.getFloat32(offset + 2 * width, true);
      offset += edgeSize(width);
    }
    return { edgeIndex, edgeAttr };
  };

  const spatial = readEdges(spatialCount);
  const temporal = readEdges(temporalCount);
  return { frameCount, nodeCount, frameIndex, nodeFeatures, spatial, temporal };
}

export function encode(graph: BoundGraph): Uint8Array {
  const { nodeCount, frameCount } = graph;
  if (graph.frameIndex.length !== nodeCount ||
      graph.nodeFeatures.length !== nodeCount * 5) {
    throw new GraphFormatError("node array lengths disagree with nodeCount");
  }
  if (frameCount > 0xffff) {
    throw new GraphFormatError("frameCount exceeds the u16 header field");
  }
  const spatialCount = edgeCount(graph.spatial);
  const temporalCount = edgeCount(graph.temporal);
  const width = indexWidthFor(nodeCount);
  const total = HEADER_SIZE + nodeCount * NODE_SIZE +
    (spatialCount + temporalCount) * edgeSize(width);

  const out = new Uint8Array(total);
  const view = new DataView(out.buffer);
  view.setUint32(0, MAGIC, true);
  view.setUint32(4, nodeCount, true);
  view.setUint32(8, spatialCount, true);
  view.setUint32(12, temporalCount, true);
  view.setUint16(16, frameCount, true);
  view.setUint8(18, width);
  view.setUint8(19, 0);

  let offset = HEADER_SIZE;
  for (let i = 0; i < nodeCount; i++) {
    view.setUint16(offset, graph.frameIndex[i], true);
    for (let c = 0; c < 5; c++) {
      view.setFloat32(offset + 2 + 4 * c, graph.nodeFeatures[i * 5 + c], true);
    }
    offset += NODE_SIZE;
  }
  const writeEdges = (rel: RelationEdges, count: number) => {
    for (let e = 0; e < count; e++) {
      const src = rel.edgeIndex[e];
      const dst = rel.edgeIndex[count + e];
      if (src < 0 || dst < 0 || src >= nodeCount || dst >= nodeCount) {
        throw new GraphFormatError("edge index out of bounds");
      }
      if (width === 2) {
        view.setUint16(offset, src, true);
        view.setUint16(offset + 2, dst, true);
      } else {
        view.setUint32(offset, src, true);
        view.setUint32(offset + 4, dst, true);
      }
      view.setFloat32(offset + 2 * width, rel.edgeAttr[e], true);
      offset += edgeSize(width);
    }
  };
  writeEdges(graph.spatial, spatialCount);
  writeEdges(graph.temporal, temporalCount);
  return out;
}
