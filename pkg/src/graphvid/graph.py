"""Video-graph construction.

A clip becomes a typed graph: one node per superpixel, spatial edges between
region-adjacent superpixels of the same frame, and temporal edges linking
each superpixel to its best color match within a proximity ball in the next
frame. Every edge carries the normalized euclidean centroid distance

    d(a, b) = sqrt(((a.y - b.y) / H)^2 + ((a.x - b.x) / W)^2)

which is invariant to frame resolution, rotations, and flips.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .media import Frame
from .slic import Segmentation, SlicConfig, segment

SPATIAL = "spatial"
TEMPORAL = "temporal"
RELATIONS = (SPATIAL, TEMPORAL)

# Temporal gating threshold sized to about one superpixel diameter so a
# static region always reaches its counterpart in the next frame.
def default_d_proximity(target_superpixels: int) -> float:
    return min(1.0, 2.0 / math.sqrt(target_superpixels))


@dataclass(frozen=True)
class Node:
    node_id: int
    frame_index: int
    norm_y: float
    norm_x: float
    color: tuple[float, float, float]


@dataclass(frozen=True)
class Edge:
    source: int
    target: int
    relation: str
    distance: float


@dataclass(frozen=True)
class BuilderConfig:
    d_proximity: float

    def __post_init__(self):
        if not 0 < self.d_proximity <= 1:
            raise ValueError("d_proximity must be in (0, 1]")


@dataclass
class VideoGraph:
    """Struct-of-arrays graph: float32 attributes, int32 edge indices.

    Spatial edges are undirected, stored once in canonical (low, high) order.
    Temporal edges are stored directed from frame t to t+1; message passing
    treats both relations as undirected by symmetrizing neighborhoods.
    """

    frame_index: np.ndarray     # (N,) int32
    coords: np.ndarray          # (N, 2) float32, columns (norm_y, norm_x)
    colors: np.ndarray          # (N, 3) float32
    spatial_edges: np.ndarray   # (Es, 2) int32
    spatial_attr: np.ndarray    # (Es,) float32
    temporal_edges: np.ndarray  # (Et, 2) int32
    temporal_attr: np.ndarray   # (Et,) float32
    frame_count: int

    @property
    def node_count(self) -> int:
        return len(self.frame_index)

    @property
    def edge_count(self) -> int:
        return len(self.spatial_edges) + len(self.temporal_edges)

    def node(self, i: int) -> Node:
        return Node(i, int(self.frame_index[i]), float(self.coords[i, 0]),
                    float(self.coords[i, 1]), tuple(float(c) for c in self.colors[i]))

    def edges(self, relation: str) -> list[Edge]:
        pairs, attr = self._edge_arrays(relation)
        return [Edge(int(s), int(t), relation, float(d))
                for (s, t), d in zip(pairs, attr)]

    def _edge_arrays(self, relation: str):
        if relation == SPATIAL:
            return self.spatial_edges, self.spatial_attr
        if relation == TEMPORAL:
            return self.temporal_edges, self.temporal_attr
        raise ValueError(f"unknown relation {relation!r}")

    def copy(self) -> "VideoGraph":
        return VideoGraph(self.frame_index.copy(), self.coords.copy(),
                          self.colors.copy(), self.spatial_edges.copy(),
                          self.spatial_attr.copy(), self.temporal_edges.copy(),
                          self.temporal_attr.copy(), self.frame_count)


def empty_graph(frame_count: int = 0) -> VideoGraph:
    return VideoGraph(
        np.zeros(0, dtype=np.int32), np.zeros((0, 2), dtype=np.float32),
        np.zeros((0, 3), dtype=np.float32), np.zeros((0, 2), dtype=np.int32),
        np.zeros(0, dtype=np.float32), np.zeros((0, 2), dtype=np.int32),
        np.zeros(0, dtype=np.float32), frame_count)


def centroid_distance(a, b) -> float:
    """Normalized euclidean distance between two nodes' centroids (symmetric)."""
    return math.sqrt((a.norm_y - b.norm_y) ** 2 + (a.norm_x - b.norm_x) ** 2)


def _frame_node_arrays(seg: Segmentation, height: int, width: int):
    coords = np.array([[r.centroid_y / height, r.centroid_x / width]
                       for r in seg.regions], dtype=np.float32).reshape(-1, 2)
    colors = np.array([r.mean_color for r in seg.regions],
                      dtype=np.float32).reshape(-1, 3)
    return coords, colors


def build_spatial_edges(labels: np.ndarray, coords: np.ndarray):
    """Region-adjacency edges of one frame under 4-connectivity.

    ``coords`` are the frame's normalized node centroids indexed by region id.
    Returns local (E, 2) int32 pairs in canonical sorted order and their
    float32 distances.
    """
    a = np.concatenate([labels[:, :-1].ravel(), labels[:-1, :].ravel()])
    b = np.concatenate([labels[:, 1:].ravel(), labels[1:, :].ravel()])
    keep = a != b
    a, b = a[keep], b[keep]
    if len(a) == 0:
        return np.zeros((0, 2), dtype=np.int32), np.zeros(0, dtype=np.float32)
    pairs = np.stack([np.minimum(a, b), np.maximum(a, b)], axis=1)
    pairs = np.unique(pairs, axis=0).astype(np.int32)
    diff = coords[pairs[:, 0]].astype(np.float64) - coords[pairs[:, 1]].astype(np.float64)
    dist = np.sqrt((diff ** 2).sum(axis=1))
    return pairs, dist.astype(np.float32)


def build_temporal_edges(coords_t: np.ndarray, colors_t: np.ndarray,
                         coords_t1: np.ndarray, colors_t1: np.ndarray,
                         d_proximity: float):
    """Match each node of frame t to its most color-similar in-range node of t+1.

    A node's neighborhood is every next-frame node with centroid distance
    strictly below ``d_proximity``; the match minimizes L2 color distance.
    Exact ties prefer the smaller centroid distance, then the lowest node id;
    an empty neighborhood yields no edge. Returns local (E, 2) pairs
    (index in t, index in t+1) and the matched centroid distances.
    """
    n0, n1 = len(coords_t), len(coords_t1)
    if n0 == 0 or n1 == 0:
        return np.zeros((0, 2), dtype=np.int32), np.zeros(0, dtype=np.float32)
    delta = coords_t.astype(np.float64)[:, None, :] - coords_t1.astype(np.float64)[None, :, :]
    dist = np.sqrt((delta ** 2).sum(axis=2))
    in_range = dist < d_proximity

    cdiff = colors_t.astype(np.float64)[:, None, :] - colors_t1.astype(np.float64)[None, :, :]
    color2 = (cdiff ** 2).sum(axis=2)
    color2 = np.where(in_range, color2, np.inf)

    best_color = color2.min(axis=1)
    has_match = np.isfinite(best_color)
    tie_dist = np.where(color2 == best_color[:, None], dist, np.inf)
    best_dist = tie_dist.min(axis=1)
    match = (tie_dist == best_dist[:, None]).argmax(axis=1)  # first True = lowest id

    src = np.flatnonzero(has_match).astype(np.int32)
    dst = match[has_match].astype(np.int32)
    pairs = np.stack([src, dst], axis=1)
    attr = dist[src, dst].astype(np.float32)
    return pairs, attr


def build_from_segmentations(segmentations: list[Segmentation], height: int,
                             width: int, d_proximity: float) -> VideoGraph:
    """Assemble the clip graph from per-frame segmentations.

    Node ids are dense and frame-major (all of frame 0, then frame 1, ...).
    """
    if not segmentations:
        raise ValueError("at least one segmentation is required")
    BuilderConfig(d_proximity)  # validate range

    per_frame = [_frame_node_arrays(s, height, width) for s in segmentations]
    counts = [len(c) for c, _ in per_frame]
    offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)

    frame_index = np.concatenate([
        np.full(n, t, dtype=np.int32) for t, n in enumerate(counts)])
    coords = np.concatenate([c for c, _ in per_frame]).astype(np.float32)
    colors = np.concatenate([k for _, k in per_frame]).astype(np.float32)

    sp_pairs, sp_attr = [], []
    for t, seg in enumerate(segmentations):
        pairs, attr = build_spatial_edges(seg.labels, per_frame[t][0])
        sp_pairs.append(pairs + np.int32(offsets[t]))
        sp_attr.append(attr)

    tm_pairs, tm_attr = [], []
    for t in range(len(segmentations) - 1):
        c0, k0 = per_frame[t]
        c1, k1 = per_frame[t + 1]
        pairs, attr = build_temporal_edges(c0, k0, c1, k1, d_proximity)
        pairs = pairs.astype(np.int64)
        pairs[:, 0] += offsets[t]
        pairs[:, 1] += offsets[t + 1]
        tm_pairs.append(pairs.astype(np.int32))
        tm_attr.append(attr)

    def cat(chunks, shape, dtype):
        return (np.concatenate(chunks).astype(dtype) if chunks
                else np.zeros(shape, dtype=dtype))

    return VideoGraph(
        frame_index, coords, colors,
        cat(sp_pairs, (0, 2), np.int32), cat(sp_attr, (0,), np.float32),
        cat(tm_pairs, (0, 2), np.int32), cat(tm_attr, (0,), np.float32),
        len(segmentations))


def build_video_graph(frames: list[Frame], slic_config: SlicConfig,
                      d_proximity: float | None = None) -> VideoGraph:
    """Segment every frame and compile the full clip graph."""
    if not frames:
        raise ValueError("at least one frame is required")
    height, width = frames[0].height, frames[0].width
    for f in frames:
        if (f.height, f.width) != (height, width):
            raise ValueError("all frames must share one resolution")
    if d_proximity is None:
        d_proximity = default_d_proximity(slic_config.target_superpixels)
    segs = [segment(f, slic_config, t) for t, f in enumerate(frames)]
    return build_from_segmentations(segs, height, width, d_proximity)


def representation_size(graph: VideoGraph) -> int:
    """Number of stored values: 3 per edge (distance, source, target) plus
    3 color values and 2 centroid values per node."""
    return 3 * graph.edge_count + 5 * graph.node_count


@dataclass(frozen=True)
class SizeReport:
    value_count: int
    pixel_value_count: int
    ratio: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "ratio",
                           self.pixel_value_count / max(1, self.value_count))


def size_report(graph: VideoGraph, height: int, width: int,
                channels: int = 3) -> SizeReport:
    """Graph value count next to the pixel-equivalent T*C*H*W of the raw clip."""
    return SizeReport(representation_size(graph),
                      graph.frame_count * channels * height * width)
