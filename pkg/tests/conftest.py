import numpy as np
import pytest

from graphvid import SlicConfig, build_video_graph, synthetic_clip


@pytest.fixture(scope="session")
def big_synthetic_graph():
    """S=800, T=20 graph over 224x224 synthetic frames (shared, slow to build)."""
    frames = synthetic_clip(20, 224, 224, seed=7)
    return build_video_graph(frames, SlicConfig(800))


def random_label_map(rng, height, width, regions):
    """Connected random partition: nearest-site Voronoi, relabelled densely."""
    sites_y = rng.integers(0, height, size=regions)
    sites_x = rng.integers(0, width, size=regions)
    ys, xs = np.mgrid[0:height, 0:width]
    d2 = (ys[..., None] - sites_y) ** 2 + (xs[..., None] - sites_x) ** 2
    labels = d2.argmin(axis=2)
    _, dense = np.unique(labels, return_inverse=True)
    return dense.reshape(height, width).astype(np.int32)
