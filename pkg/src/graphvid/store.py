"""Compact binary serialization of video graphs.

Layout (all little-endian):

    header   magic "GVG1" | node_count u32 | spatial_edge_count u32 |
             temporal_edge_count u32 | frame_count u16 | index_width u8 |
             flags u8 (reserved)                                  = 20 bytes
    nodes    frame_index u16, norm_y f32, norm_x f32, color 3*f32 = 22 bytes
    spatial  src, dst at index_width, distance f32
    temporal src, dst at index_width, distance f32

Edge indices use 2 bytes when node_count < 65536, otherwise 4. Attributes
are float32: the round trip preserves them verbatim.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .graph import VideoGraph

MAGIC = b"GVG1"
_HEADER = struct.Struct("<4sIIIHBB")
HEADER_SIZE = _HEADER.size  # 20

_NODE_DTYPE = np.dtype([("t", "<u2"), ("y", "<f4"), ("x", "<f4"),
                        ("r", "<f4"), ("g", "<f4"), ("b", "<f4")])


class StoreError(ValueError):
    """Raised for malformed graph files."""


def _edge_dtype(index_width: int) -> np.dtype:
    kind = "<u2" if index_width == 2 else "<u4"
    return np.dtype([("s", kind), ("d", kind), ("w", "<f4")])


def index_width_for(node_count: int) -> int:
    return 2 if node_count < 65536 else 4


def graph_to_bytes(graph: VideoGraph) -> bytes:
    n = graph.node_count
    if graph.frame_count > 65535:
        raise StoreError("frame_count exceeds the u16 header field")
    width = index_width_for(n)
    header = _HEADER.pack(MAGIC, n, len(graph.spatial_edges),
                          len(graph.temporal_edges), graph.frame_count, width, 0)

    nodes = np.empty(n, dtype=_NODE_DTYPE)
    nodes["t"] = graph.frame_index
    nodes["y"] = graph.coords[:, 0]
    nodes["x"] = graph.coords[:, 1]
    nodes["r"] = graph.colors[:, 0]
    nodes["g"] = graph.colors[:, 1]
    nodes["b"] = graph.colors[:, 2]

    chunks = [header, nodes.tobytes()]
    for pairs, attr in ((graph.spatial_edges, graph.spatial_attr),
                        (graph.temporal_edges, graph.temporal_attr)):
        table = np.empty(len(pairs), dtype=_edge_dtype(width))
        table["s"] = pairs[:, 0] if len(pairs) else []
        table["d"] = pairs[:, 1] if len(pairs) else []
        table["w"] = attr
        chunks.append(table.tobytes())
    return b"".join(chunks)


def write_graph(graph: VideoGraph, path) -> int:
    """Serialize atomically (temp file + rename). Returns the byte count."""
    data = graph_to_bytes(graph)
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return len(data)


def graph_from_bytes(data: bytes) -> VideoGraph:
    if len(data) < HEADER_SIZE:
        raise StoreError("not a graph file: truncated header")
    magic, n, n_sp, n_tm, frame_count, width, _flags = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise StoreError("not a graph file")
    if width not in (2, 4):
        raise StoreError(f"invalid index width {width}")
    if width == 2 and n >= 65536:
        raise StoreError("index width 2 cannot address the declared node count")

    edge_size = _edge_dtype(width).itemsize
    expected = HEADER_SIZE + n * _NODE_DTYPE.itemsize + (n_sp + n_tm) * edge_size
    if len(data) != expected:
        raise StoreError(f"truncated graph file: {len(data)} bytes, "
                         f"expected {expected}")

    offset = HEADER_SIZE
    nodes = np.frombuffer(data, dtype=_NODE_DTYPE, count=n, offset=offset)
    offset += n * _NODE_DTYPE.itemsize

    frame_index = nodes["t"].astype(np.int32)
    if n and frame_index.max() >= frame_count:
        raise StoreError("node frame index outside the declared frame count")
    coords = np.stack([nodes["y"], nodes["x"]], axis=1).astype(np.float32)
    colors = np.stack([nodes["r"], nodes["g"], nodes["b"]], axis=1).astype(np.float32)

    tables = []
    for count in (n_sp, n_tm):
        table = np.frombuffer(data, dtype=_edge_dtype(width), count=count,
                              offset=offset)
        offset += count * edge_size
        pairs = np.stack([table["s"], table["d"]], axis=1).astype(np.int64) \
            if count else np.zeros((0, 2), dtype=np.int64)
        if count and pairs.max() >= n:
            raise StoreError("edge index out of bounds")
        tables.append((pairs.astype(np.int32), table["w"].astype(np.float32)))

    return VideoGraph(frame_index, np.ascontiguousarray(coords),
                      np.ascontiguousarray(colors),
                      tables[0][0], tables[0][1], tables[1][0], tables[1][1],
                      int(frame_count))


def read_graph(path) -> VideoGraph:
    return graph_from_bytes(Path(path).read_bytes())


def graph_to_json_dict(graph: VideoGraph) -> dict:
    """Lossy human-readable export for debugging."""
    return {
        "frame_count": graph.frame_count,
        "nodes": [
            {"id": i, "frame": int(graph.frame_index[i]),
             "norm_y": float(graph.coords[i, 0]), "norm_x": float(graph.coords[i, 1]),
             "color": [float(c) for c in graph.colors[i]]}
            for i in range(graph.node_count)
        ],
        "spatial_edges": [
            {"source": int(s), "target": int(t), "distance": float(d)}
            for (s, t), d in zip(graph.spatial_edges, graph.spatial_attr)
        ],
        "temporal_edges": [
            {"source": int(s), "target": int(t), "distance": float(d)}
            for (s, t), d in zip(graph.temporal_edges, graph.temporal_attr)
        ],
    }


def write_graph_json(graph: VideoGraph, path) -> None:
    Path(path).write_text(json.dumps(graph_to_json_dict(graph), indent=1))
