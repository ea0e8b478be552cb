import assert from "node:assert/strict";
import { test } from "node:test";

import { BoundGraph, GraphFormatError, HEADER_SIZE, decode, encode,
         indexWidthFor } from "../src/format";

function sampleGraph(nodeCount = 6, frameCount = 2): BoundGraph {
  const frameIndex = new Int32Array(nodeCount);
  const nodeFeatures = new Float32Array(nodeCount * 5);
  for (let i = 0; i < nodeCount; i++) {
    frameIndex[i] = i < nodeCount / 2 ? 0 : 1;
    for (let c = 0; c < 5; c++) {
      nodeFeatures[i * 5 + c] = Math.fround((i * 5 + c) / 37);
    }
  }
  return {
    frameCount,
    nodeCount,
    frameIndex,
    nodeFeatures,
    spatial: {
      edgeIndex: new Int32Array([0, 1, 2, 1, 2, 3]),
      edgeAttr: new Float32Array([0.1, 0.2, 0.3]),
    },
    temporal: {
      edgeIndex: new Int32Array([0, 4]),
      edgeAttr: new Float32Array([0.05]),
    },
  };
}

test("empty graph is exactly the 20-byte header", () => {
  const empty: BoundGraph = {
    frameCount: 0, nodeCount: 0,
    frameIndex: new Int32Array(0), nodeFeatures: new Float32Array(0),
    spatial: { edgeIndex: new Int32Array(0), edgeAttr: new Float32Array(0) },
    temporal: { edgeIndex: new Int32Array(0), edgeAttr: new Float32Array(0) },
  };
  const data = encode(empty);
  assert.equal(data.byteLength, HEADER_SIZE);
  assert.equal(data.byteLength, 20);
  assert.equal(new TextDecoder().decode(data.subarray(0, 4)), "GVG1");
});

test("roundtrip preserves every field bit-exactly", () => {
  const graph = sampleGraph();
  const back = decode(encode(graph));
  assert.deepEqual(back.frameIndex, graph.frameIndex);
  assert.deepEqual(back.nodeFeatures, graph.nodeFeatures);
  assert.deepEqual(back.spatial.edgeIndex, graph.spatial.edgeIndex);
  assert.deepEqual(back.spatial.edgeAttr, graph.spatial.edgeAttr);
  assert.deepEqual(back.temporal.edgeIndex, graph.temporal.edgeIndex);
  assert.deepEqual(back.temporal.edgeAttr, graph.temporal.edgeAttr);
  assert.equal(back.frameCount, graph.frameCount);
  assert.deepEqual(encode(back), encode(graph));
});

test("index width switches to 4 bytes at 65536 nodes", () => {
  assert.equal(indexWidthFor(65535), 2);
  assert.equal(indexWidthFor(65536), 4);

  const nodeCount = 70_000;
  const graph: BoundGraph = {
    frameCount: 1, nodeCount,
    frameIndex: new Int32Array(nodeCount),
    nodeFeatures: new Float32Array(nodeCount * 5),
    spatial: {
      edgeIndex: new Int32Array([0, 69_999]),
      edgeAttr: new Float32Array([0.5]),
    },
    temporal: { edgeIndex: new Int32Array(0), edgeAttr: new Float32Array(0) },
  };
  const data = encode(graph);
  assert.equal(data[18], 4);
  const back = decode(data);
  assert.equal(back.spatial.edgeIndex[0], 0);
  assert.equal(back.spatial.edgeIndex[1], 69_999);
});

test("corrupt magic is rejected", () => {
  const data = encode(sampleGraph());
  data[0] = 0x58;
  assert.throws(() => decode(data), /not a graph file/);
});

test("truncations always error, never crash", () => {
  const data = encode(sampleGraph());
  for (let cut = 0; cut < data.byteLength; cut += 3) {
    assert.throws(() => decode(data.subarray(0, cut)), GraphFormatError);
  }
});

test("edge index past the node table is rejected", () => {
  const graph = sampleGraph();
  graph.spatial.edgeIndex[0] = graph.nodeCount;
  assert.throws(() => encode(graph), /out of bounds/);
});

test("declared counts must match the byte length", () => {
  const data = encode(sampleGraph());
  const view = new DataView(data.buffer);
  view.setUint32(4, 99, true); // inflate nodeCount
  assert.throws(() => decode(data), /truncated|width/);
});
