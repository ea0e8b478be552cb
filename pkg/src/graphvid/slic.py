"""SLIC superpixel segmentation.

Local k-means over a joint CIELAB + spatial distance with grid-initialized
seeds, followed by a connectivity pass that merges orphan components. The
implementation is fully deterministic: seeds come from a regular grid
perturbed to the lowest-gradient pixel of a 3x3 window, and assignment ties
are broken by the lowest cluster id.

The joint squared distance of pixel p to cluster center c is

    D2(p, c) = |lab(p) - lab(c)|^2 + (m / g)^2 * |yx(p) - yx(c)|^2

with compactness m and grid interval g = sqrt(H*W / S). Each assignment step
also keeps a pixel's current cluster in its candidate set, so the recorded
per-iteration residual (sum of D2 over pixels) is non-increasing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from .media import Frame


@dataclass(frozen=True)
class SlicConfig:
    target_superpixels: int
    compactness: float = 10.0
    iterations: int = 10
    min_region_fraction: float = 0.25

    def __post_init__(self):
        if self.target_superpixels < 1:
            raise ValueError("target_superpixels must be >= 1")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.compactness <= 0:
            raise ValueError("compactness must be > 0")
        if not 0 < self.min_region_fraction <= 1:
            raise ValueError("min_region_fraction must be in (0, 1]")


@dataclass(frozen=True)
class Superpixel:
    """One segmented region: centroid in pixels, mean RGB in [0, 1]."""

    frame_index: int
    region_index: int
    centroid_y: float
    centroid_x: float
    mean_color: tuple[float, float, float]
    pixel_count: int


@dataclass(frozen=True)
class Segmentation:
    labels: np.ndarray            # (H, W) int32, dense region ids
    regions: list[Superpixel]
    residuals: tuple[float, ...]  # per-iteration total squared distance

    @property
    def region_count(self) -> int:
        return len(self.regions)


# sRGB (D65) -> CIELAB, the color space SLIC distances are computed in.
_RGB_TO_XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])
_XYZ_WHITE = np.array([0.95047, 1.0, 1.08883])


def rgb_to_lab(rgb: np.ndarray) -> np.ndarray:
    """Convert (..., 3) sRGB in [0, 1] to CIELAB (D65 white point)."""
    rgb = np.asarray(rgb, dtype=np.float64)
    linear = np.where(rgb > 0.04045, ((rgb + 0.055) / 1.055) ** 2.4, rgb / 12.92)
    xyz = linear @ _RGB_TO_XYZ.T / _XYZ_WHITE
    f = np.where(xyz > (6 / 29) ** 3, np.cbrt(xyz), xyz / (3 * (6 / 29) ** 2) + 4 / 29)
    lab = np.empty_like(xyz)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab


def _initial_seeds(height: int, width: int, target: int) -> np.ndarray:
    """Regular grid of sqrt(target)-spaced seed coordinates, row-major.

    The grid keeps all rows*cols seeds (rows*cols may slightly exceed the
    target, but stays < 2*target), which guarantees the local search windows
    cover every pixel.
    """
    rows = int(round(math.sqrt(target * height / width)))
    rows = min(max(rows, 1), height, target)
    cols = min(max(-(-target // rows), 1), width)
    ys = np.floor((np.arange(rows) + 0.5) * height / rows).astype(np.int64)
    xs = np.floor((np.arange(cols) + 0.5) * width / cols).astype(np.int64)
    yy, xx = np.meshgrid(ys, xs, indexing="ij")
    return np.stack([yy.ravel(), xx.ravel()], axis=1)


def _gradient_map(pixels: np.ndarray) -> np.ndarray:
    """Squared L2 norm of RGB forward differences (zero at the far edges)."""
    grad = np.zeros(pixels.shape[:2], dtype=np.float64)
    dy = pixels[1:, :, :] - pixels[:-1, :, :]
    dx = pixels[:, 1:, :] - pixels[:, :-1, :]
    grad[:-1, :] += (dy ** 2).sum(axis=2)
    grad[:, :-1] += (dx ** 2).sum(axis=2)
    return grad


def _perturb_seeds(seeds: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """Move each seed to the lowest-gradient pixel in its 3x3 window.

    The seed's own position is tried first, so on flat gradients seeds stay
    at their grid positions.
    """
    height, width = grad.shape
    out = seeds.copy()
    offsets = [(0, 0), (-1, -1), (-1, 0), (-1, 1), (0, -1),
               (0, 1), (1, -1), (1, 0), (1, 1)]
    for k, (sy, sx) in enumerate(seeds):
        best = math.inf
        for oy, ox in offsets:
            y, x = sy + oy, sx + ox
            if 0 <= y < height and 0 <= x < width and grad[y, x] < best:
                best = grad[y, x]
                out[k] = (y, x)
    return out


def _assign(lab, yx_weight2, centers, win_rows, win_cols, labels, center_dist2):
    """One assignment step: windowed nearest-center search with scatter-min.

    ``labels``/``center_dist2`` hold the current assignment (or None on the
    first pass); the current cluster is always a candidate so per-pixel
    distance never increases. Ties go to the lowest cluster id.
    """
    height, width = lab.shape[:2]
    n_pixels = height * width
    n_centers = centers.shape[0]
    wh = win_rows.shape[1]
    ww = win_cols.shape[1]

    win_lab = lab[win_rows[:, :, None], win_cols[:, None, :]]        # (K, wh, ww, 3)
    d2 = (win_lab[..., 0] - centers[:, None, None, 2]) ** 2
    d2 += (win_lab[..., 1] - centers[:, None, None, 3]) ** 2
    d2 += (win_lab[..., 2] - centers[:, None, None, 4]) ** 2
    d2 += yx_weight2 * ((win_rows[:, :, None] - centers[:, None, None, 0]) ** 2
                        + (win_cols[:, None, :] - centers[:, None, None, 1]) ** 2)

    pix = (win_rows[:, :, None] * width + win_cols[:, None, :]).reshape(n_centers, wh, ww)
    pix_f = np.broadcast_to(pix, d2.shape).ravel()
    d2_f = d2.ravel()
    cl_f = np.repeat(np.arange(n_centers, dtype=np.int64), wh * ww)

    if labels is not None:
        pix_f = np.concatenate([pix_f, np.arange(n_pixels, dtype=np.int64)])
        d2_f = np.concatenate([d2_f, center_dist2])
        cl_f = np.concatenate([cl_f, labels.ravel().astype(np.int64)])

    new_dist2 = np.full(n_pixels, np.inf)
    np.minimum.at(new_dist2, pix_f, d2_f)
    if not np.isfinite(new_dist2).all():
        raise AssertionError("seed windows failed to cover every pixel")
    winners = d2_f == new_dist2[pix_f]
    new_labels = np.full(n_pixels, n_centers, dtype=np.int64)
    np.minimum.at(new_labels, pix_f[winners], cl_f[winners])
    return new_labels.reshape(height, width), new_dist2


def _label_components(labels: np.ndarray) -> np.ndarray:
    """4-connected components of a label map, via one sparse CC pass."""
    height, width = labels.shape
    idx = np.arange(height * width).reshape(height, width)
    links = []
    m = labels[:, 1:] == labels[:, :-1]
    links.append((idx[:, :-1][m], idx[:, 1:][m]))
    m = labels[1:, :] == labels[:-1, :]
    links.append((idx[:-1, :][m], idx[1:, :][m]))
    r = np.concatenate([a for a, _ in links])
    c = np.concatenate([b for _, b in links])
    adj = sparse.csr_matrix((np.ones(len(r), dtype=np.int8), (r, c)),
                            shape=(height * width, height * width))
    _, comp = connected_components(adj, directed=False)
    return comp.reshape(height, width)


def _component_adjacency(comp: np.ndarray) -> np.ndarray:
    """Unique (a, b) pairs of 4-adjacent component ids, a < b."""
    pairs = []
    a, b = comp[:, :-1].ravel(), comp[:, 1:].ravel()
    pairs.append(np.stack([a, b], axis=1))
    a, b = comp[:-1, :].ravel(), comp[1:, :].ravel()
    pairs.append(np.stack([a, b], axis=1))
    p = np.concatenate(pairs)
    p = p[p[:, 0] != p[:, 1]]
    if len(p) == 0:
        return p.reshape(0, 2)
    p = np.stack([p.min(axis=1), p.max(axis=1)], axis=1)
    return np.unique(p, axis=0)


def _enforce_connectivity(labels: np.ndarray, target: int,
                          min_region_fraction: float) -> np.ndarray:
    """Split labels into 4-connected components, then merge small orphans.

    Components smaller than min_region_fraction * (H*W / target) are merged
    into their largest adjacent component; afterwards the smallest regions
    keep merging while more than 2*target remain. Final ids are dense in
    row-major first-occurrence order.
    """
    height, width = labels.shape
    tau = min_region_fraction * (height * width / target)
    comp = _label_components(labels)

    while True:
        sizes = np.bincount(comp.ravel())
        n_comp = len(sizes)
        if n_comp == 1:
            break
        adj_pairs = _component_adjacency(comp)
        neighbors: dict[int, list[int]] = {}
        for a, b in adj_pairs:
            neighbors.setdefault(int(a), []).append(int(b))
            neighbors.setdefault(int(b), []).append(int(a))

        small = [i for i in range(n_comp) if sizes[i] < tau]
        if not small and n_comp <= 2 * target:
            break
        if not small:
            # Over the region budget: merge globally smallest regions.
            small = [int(np.argmin(sizes))]
        small.sort(key=lambda i: (sizes[i], i))

        parent = np.arange(n_comp)

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        merged_any = False
        for i in small:
            nbrs = neighbors.get(i, [])
            if not nbrs:
                continue
            # Largest adjacent region wins; ties go to the lowest id.
            best = max(nbrs, key=lambda j: (sizes[j], -j))
            ri, rj = find(i), find(best)
            if ri != rj:
                parent[ri] = rj
                merged_any = True
        if not merged_any:
            break
        roots = np.array([find(i) for i in range(n_comp)])  # resolve chained merges
        comp = roots[comp]

    # Dense relabel in scan order of first occurrence.
    flat = comp.ravel()
    _, first_pos, inverse = np.unique(flat, return_index=True, return_inverse=True)
    rank = np.argsort(np.argsort(first_pos))
    return rank[inverse].reshape(height, width).astype(np.int32)


def regions_from_labels(labels: np.ndarray, pixels: np.ndarray,
                        frame_index: int = 0) -> list[Superpixel]:
    """Compute per-region centroid, exact mean color, and pixel count."""
    height, width = labels.shape
    flat = labels.ravel().astype(np.int64)
    counts = np.bincount(flat)
    if (counts == 0).any():
        raise ValueError("label map has empty region ids")
    ys, xs = np.divmod(np.arange(height * width, dtype=np.float64), width)
    cy = np.bincount(flat, weights=ys) / counts
    cx = np.bincount(flat, weights=xs) / counts
    colors = mean_colors(labels, pixels)
    return [
        Superpixel(frame_index, i, float(cy[i]), float(cx[i]),
                   (float(colors[i, 0]), float(colors[i, 1]), float(colors[i, 2])),
                   int(counts[i]))
        for i in range(len(counts))
    ]


def mean_colors(labels: np.ndarray, pixels) -> np.ndarray:
    """Exact arithmetic mean RGB per region, shape (R, 3) float64."""
    if isinstance(pixels, Frame):
        pixels = pixels.data
    pixels = np.asarray(pixels, dtype=np.float64)
    if pixels.shape[:2] != labels.shape:
        raise ValueError(f"label map {labels.shape} does not match frame "
                         f"{pixels.shape[:2]}")
    flat = labels.ravel().astype(np.int64)
    counts = np.bincount(flat)
    out = np.empty((len(counts), 3), dtype=np.float64)
    for ch in range(3):
        out[:, ch] = np.bincount(flat, weights=pixels[..., ch].ravel()) / counts
    return out


def segment(frame: Frame, config: SlicConfig, frame_index: int = 0) -> Segmentation:
    """Segment one frame into roughly ``config.target_superpixels`` regions."""
    height, width = frame.height, frame.width
    n_pixels = height * width
    target = config.target_superpixels
    if target > n_pixels:
        raise ValueError(f"requested {target} superpixels for {n_pixels} pixels")

    pixels = frame.data.astype(np.float64)
    lab = rgb_to_lab(pixels)
    grid_interval = math.sqrt(n_pixels / target)
    yx_weight2 = (config.compactness / grid_interval) ** 2

    seeds = _perturb_seeds(_initial_seeds(height, width, target), _gradient_map(pixels))
    n_centers = len(seeds)
    # centers: (y, x, L, a, b)
    centers = np.empty((n_centers, 5), dtype=np.float64)
    centers[:, 0:2] = seeds
    centers[:, 2:5] = lab[seeds[:, 0], seeds[:, 1]]

    half = max(1, math.ceil(grid_interval))
    wh = min(2 * half + 1, height)
    ww = min(2 * half + 1, width)
    labels = None
    dist2 = None
    residuals = []
    for _ in range(config.iterations):
        y0 = np.clip(np.rint(centers[:, 0]).astype(np.int64) - half, 0, height - wh)
        x0 = np.clip(np.rint(centers[:, 1]).astype(np.int64) - half, 0, width - ww)
        win_rows = y0[:, None] + np.arange(wh)
        win_cols = x0[:, None] + np.arange(ww)
        labels, dist2 = _assign(lab, yx_weight2, centers, win_rows, win_cols,
                                labels, dist2)
        residuals.append(float(dist2.sum()))

        flat = labels.ravel()
        counts = np.bincount(flat, minlength=n_centers).astype(np.float64)
        occupied = counts > 0
        ys, xs = np.divmod(np.arange(n_pixels, dtype=np.float64), width)
        fields = [ys, xs, lab[..., 0].ravel(), lab[..., 1].ravel(), lab[..., 2].ravel()]
        for col, values in enumerate(fields):
            sums = np.bincount(flat, weights=values, minlength=n_centers)
            centers[occupied, col] = sums[occupied] / counts[occupied]

    final = _enforce_connectivity(labels, target, config.min_region_fraction)
    regions = regions_from_labels(final, pixels, frame_index)
    assert sum(r.pixel_count for r in regions) == n_pixels
    return Segmentation(final, regions, tuple(residuals))


def write_label_pgm(labels: np.ndarray, path) -> None:
    """Dump a label map as 16-bit binary PGM (big-endian samples) for inspection."""
    if labels.max(initial=0) > 65535:
        raise ValueError("label map exceeds 16-bit PGM range")
    height, width = labels.shape
    header = f"P5\n{width} {height}\n65535\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header + labels.astype(">u2").tobytes())
