"""Optional on-disk graph cache, enabled by the GRAPHVID_CACHE_DIR env var.

Keys are content hashes over the pixel data and the build parameters, so a
cache hit returns exactly the graph a fresh build would produce.
"""

from __future__ import annotations

import hashlib
import os
from pathlib import Path

from .graph import VideoGraph, build_video_graph, default_d_proximity
from .media import Frame
from .slic import SlicConfig
from .store import read_graph, write_graph

ENV_VAR = "GRAPHVID_CACHE_DIR"


def cache_dir() -> Path | None:
    value = os.environ.get(ENV_VAR)
    if not value:
        return None
    path = Path(value)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _cache_key(frames: list[Frame], config: SlicConfig, d_proximity: float) -> str:
    h = hashlib.sha256()
    h.update(f"s={config.target_superpixels};m={config.compactness};"
             f"it={config.iterations};mrf={config.min_region_fraction};"
             f"dp={d_proximity!r}".encode())
    for f in frames:
        h.update(f.data.tobytes())
    return h.hexdigest()


def cached_build(frames: list[Frame], config: SlicConfig,
                 d_proximity: float | None = None) -> VideoGraph:
    """Build a clip graph, consulting the cache when it is enabled."""
    if d_proximity is None:
        d_proximity = default_d_proximity(config.target_superpixels)
    root = cache_dir()
    if root is None:
        return build_video_graph(frames, config, d_proximity)
    path = root / (_cache_key(frames, config, d_proximity) + ".gvg")
    if path.exists():
        return read_graph(path)
    graph = build_video_graph(frames, config, d_proximity)
    write_graph(graph, path)
    return graph
