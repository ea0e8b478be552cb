"""Generation-time benchmark: how clip-to-graph time scales with superpixels.

Times the two pipeline stages separately (superpixel calculation vs. graph
structure generation) over a sweep of superpixel counts. A warm-up round per
superpixel count is excluded from the statistics.
"""

from __future__ import annotations

import csv
import io
import json
import platform
import time
from dataclasses import asdict, dataclass

import numpy as np

from .graph import build_from_segmentations, default_d_proximity
from .media import Frame
from .slic import SlicConfig, segment


@dataclass(frozen=True)
class BenchRow:
    superpixels: int
    mean_seconds: float
    std_seconds: float
    clips_measured: int
    segmentation_seconds: float
    graph_seconds: float


@dataclass(frozen=True)
class BenchReport:
    rows: list[BenchRow]
    environment: str

    def __post_init__(self):
        ordered = sorted(self.rows, key=lambda r: r.superpixels)
        object.__setattr__(self, "rows", ordered)
        for row in self.rows:
            if row.mean_seconds <= 0:
                raise ValueError("benchmark means must be positive")

    def to_json(self) -> str:
        return json.dumps({"environment": self.environment,
                           "rows": [asdict(r) for r in self.rows]}, indent=1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["superpixels", "mean_seconds", "std_seconds",
                         "clips_measured", "segmentation_seconds", "graph_seconds"])
        for r in self.rows:
            writer.writerow([r.superpixels, f"{r.mean_seconds:.6f}",
                             f"{r.std_seconds:.6f}", r.clips_measured,
                             f"{r.segmentation_seconds:.6f}", f"{r.graph_seconds:.6f}"])
        return buf.getvalue()


def environment_note() -> str:
    return (f"{platform.platform()} | python {platform.python_version()} | "
            f"numpy {np.__version__}")


def synthetic_clip(frame_count: int, height: int, width: int,
                   seed: int = 0) -> list[Frame]:
    """Deterministic smooth test clip: drifting color gradients plus a moving blob."""
    rng = np.random.Generator(np.random.PCG64(seed))
    phase = rng.uniform(0, 2 * np.pi, size=6)
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    frames = []
    for t in range(frame_count):
        shift = t / max(1, frame_count)
        r = 0.5 + 0.4 * np.sin(2 * np.pi * (ys / height + shift) + phase[0])
        g = 0.5 + 0.4 * np.sin(2 * np.pi * (xs / width - shift) + phase[1])
        b = 0.5 + 0.4 * np.sin(2 * np.pi * ((ys + xs) / (height + width)) + phase[2])
        cy = height * (0.3 + 0.4 * np.sin(2 * np.pi * shift + phase[3]) ** 2)
        cx = width * (0.3 + 0.4 * np.cos(2 * np.pi * shift + phase[4]) ** 2)
        blob = np.exp(-(((ys - cy) ** 2 + (xs - cx) ** 2) / (0.02 * height * width)))
        stack = np.stack([r, g, b], axis=2) * (1 - 0.5 * blob[..., None]) \
            + 0.9 * blob[..., None]
        frames.append(Frame(np.clip(stack, 0.0, 1.0).astype(np.float32)))
    return frames


def time_clip(frames: list[Frame], superpixels: int,
              d_proximity: float | None = None) -> tuple[float, float]:
    """(segmentation seconds, graph-structure seconds) for one clip build."""
    config = SlicConfig(superpixels)
    if d_proximity is None:
        d_proximity = default_d_proximity(superpixels)
    t0 = time.perf_counter()
    segs = [segment(f, config, t) for t, f in enumerate(frames)]
    t1 = time.perf_counter()
    build_from_segmentations(segs, frames[0].height, frames[0].width, d_proximity)
    t2 = time.perf_counter()
    return t1 - t0, t2 - t1


def run_benchmark(s_values, frames: list[Frame], repetitions: int = 3,
                  d_proximity: float | None = None) -> BenchReport:
    """Repetitions are interleaved round-robin over the superpixel counts so
    slow clock drift (frequency scaling, allocator warm-up) biases every
    count equally instead of the ones measured first."""
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    sweep = sorted(set(int(v) for v in s_values))
    for s in sweep:
        time_clip(frames, s, d_proximity)  # warm-up round, excluded
    samples = {s: ([], []) for s in sweep}
    for _ in range(repetitions):
        for s in sweep:
            seg_s, graph_s = time_clip(frames, s, d_proximity)
            samples[s][0].append(seg_s)
            samples[s][1].append(graph_s)
    rows = []
    for s in sweep:
        seg_times, graph_times = samples[s]
        totals = np.array(seg_times) + np.array(graph_times)
        rows.append(BenchRow(
            superpixels=s,
            mean_seconds=float(totals.mean()),
            std_seconds=float(totals.std()),
            clips_measured=repetitions,
            segmentation_seconds=float(np.mean(seg_times)),
            graph_seconds=float(np.mean(graph_times)),
        ))
    return BenchReport(rows, environment_note())
