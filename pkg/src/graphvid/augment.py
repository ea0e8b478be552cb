"""Training-time graph augmentations.

Four independent perturbations: additive Gaussian noise on edge attributes
(AGEN) and node colors (AGNN), random removal of spatial edges (RRSE), and
random removal of superpixels (RRS). The pipeline order is fixed to
RRS -> RRSE -> AGEN -> AGNN so structural removals never waste noise draws.

Randomness comes from numpy's PCG64 generator; normal variates use its
ziggurat method. Draw order is frozen: spatial edges first, then temporal
edges, nodes in id order.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass

import numpy as np

from .graph import VideoGraph


@dataclass(frozen=True)
class AugmentConfig:
    sigma_edge: float = 0.4
    sigma_node: float = 0.2
    p_edge: float = 1.0
    p_node: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if self.sigma_edge < 0 or self.sigma_node < 0:
            raise ValueError("noise std-devs must be >= 0")
        if not (0 <= self.p_edge <= 1 and 0 <= self.p_node <= 1):
            raise ValueError("keep probabilities must be in [0, 1]")

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    @classmethod
    def from_json(cls, text: str) -> "AugmentConfig":
        return cls(**json.loads(text))


def default_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def derive_clip_seed(global_seed: int, clip_id: str) -> int:
    """Stable per-clip seed: sha256 of the clip id folded with the global seed."""
    digest = hashlib.sha256(clip_id.encode("utf-8")).digest()
    return (global_seed * 0x1_0000_0001 + int.from_bytes(digest[:8], "little")) % 2 ** 63


def apply_agen(graph: VideoGraph, sigma_edge: float,
               rng: np.random.Generator) -> VideoGraph:
    """Add N(0, sigma_edge) noise to every edge attribute; topology unchanged."""
    if sigma_edge < 0:
        raise ValueError("sigma_edge must be >= 0")
    out = graph.copy()
    n_sp = len(out.spatial_attr)
    noise = rng.normal(0.0, sigma_edge, size=n_sp + len(out.temporal_attr))
    out.spatial_attr = (out.spatial_attr.astype(np.float64) + noise[:n_sp]).astype(np.float32)
    out.temporal_attr = (out.temporal_attr.astype(np.float64) + noise[n_sp:]).astype(np.float32)
    return out


def apply_agnn(graph: VideoGraph, sigma_node: float,
               rng: np.random.Generator) -> VideoGraph:
    """Add per-channel N(0, sigma_node) noise to every node color.

    Values are deliberately not re-clamped to [0, 1]; the model input layer
    accepts the shifted range.
    """
    if sigma_node < 0:
        raise ValueError("sigma_node must be >= 0")
    out = graph.copy()
    noise = rng.normal(0.0, sigma_node, size=out.colors.shape)
    out.colors = (out.colors.astype(np.float64) + noise).astype(np.float32)
    return out


def apply_rrse(graph: VideoGraph, p_edge: float,
               rng: np.random.Generator) -> VideoGraph:
    """Keep each spatial edge independently with probability p_edge.

    Temporal edges are untouched; removal applies to the spatial relation
    only, matching the RRSE/RRS split.
    """
    if not 0 <= p_edge <= 1:
        raise ValueError("p_edge must be in [0, 1]")
    out = graph.copy()
    keep = rng.random(len(out.spatial_edges)) < p_edge
    out.spatial_edges = out.spatial_edges[keep]
    out.spatial_attr = out.spatial_attr[keep]
    return out


def apply_rrs(graph: VideoGraph, p_node: float, rng: np.random.Generator):
    """Keep each node independently with probability p_node.

    Edges touching a dropped node are removed and surviving node ids are
    re-densified. Returns (graph, remap) where remap[old_id] is the new id,
    or -1 for dropped nodes.
    """
    if not 0 <= p_node <= 1:
        raise ValueError("p_node must be in [0, 1]")
    keep = rng.random(graph.node_count) < p_node
    remap = np.full(graph.node_count, -1, dtype=np.int64)
    remap[keep] = np.arange(int(keep.sum()))

    def filter_edges(pairs, attr):
        if len(pairs) == 0:
            return pairs.copy(), attr.copy()
        ok = keep[pairs[:, 0]] & keep[pairs[:, 1]]
        return remap[pairs[ok]].astype(np.int32), attr[ok]

    sp_pairs, sp_attr = filter_edges(graph.spatial_edges, graph.spatial_attr)
    tm_pairs, tm_attr = filter_edges(graph.temporal_edges, graph.temporal_attr)
    out = VideoGraph(graph.frame_index[keep], graph.coords[keep],
                     graph.colors[keep], sp_pairs, sp_attr, tm_pairs, tm_attr,
                     graph.frame_count)
    return out, remap


def apply_all(graph: VideoGraph, config: AugmentConfig):
    """Full pipeline with the fixed composition order RRS -> RRSE -> AGEN -> AGNN.

    Bit-reproducible for a fixed config.seed. Returns (graph, node_remap).
    """
    rng = default_rng(config.seed)
    out, remap = apply_rrs(graph, config.p_node, rng)
    out = apply_rrse(out, config.p_edge, rng)
    out = apply_agen(out, config.sigma_edge, rng)
    out = apply_agnn(out, config.sigma_node, rng)
    return out, remap
