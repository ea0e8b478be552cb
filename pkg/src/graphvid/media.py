"""Frame loading and sliding-window clip enumeration.

Supported inputs are binary P6 PPM sequences (maxval 255) and raw RGB24
files with a JSON sidecar. Samples are mapped to [0, 1] by division by 255
at ingest so every downstream color quantity lives on one scale.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class MediaError(ValueError):
    """Raised for malformed or inconsistent frame inputs."""


@dataclass(frozen=True)
class Frame:
    """One RGB frame, values in [0, 1], stored as a (H, W, 3) float32 array."""

    data: np.ndarray

    def __post_init__(self):
        d = self.data
        if d.ndim != 3 or d.shape[2] != 3:
            raise MediaError(f"frame data must have shape (H, W, 3), got {d.shape}")
        if d.dtype != np.float32:
            object.__setattr__(self, "data", d.astype(np.float32))
        if float(self.data.min(initial=0.0)) < 0.0 or float(self.data.max(initial=0.0)) > 1.0:
            raise MediaError("frame values must lie in [0, 1]")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return 3


@dataclass(frozen=True)
class ClipSpec:
    """Addressing of one clip inside a longer frame sequence."""

    start_frame: int
    frame_count: int
    frame_stride: int
    source_video_id: str

    def frame_indices(self) -> list[int]:
        return [self.start_frame + k * self.frame_stride for k in range(self.frame_count)]

    @property
    def last_frame(self) -> int:
        return self.start_frame + (self.frame_count - 1) * self.frame_stride


def enumerate_clips(total_frames: int, window: int = 20, frame_stride: int = 2,
                    clip_stride: int = 10, video_id: str = "video") -> list[ClipSpec]:
    """Enumerate sliding-window clips over a sequence of ``total_frames`` frames.

    Returns every start t0 in {0, clip_stride, 2*clip_stride, ...} for which
    t0 + (window - 1) * frame_stride < total_frames. Empty list when no clip fits.
    """
    if min(total_frames, window, frame_stride, clip_stride) < 1:
        raise ValueError("all clip parameters must be >= 1")
    clips = []
    t0 = 0
    while t0 + (window - 1) * frame_stride < total_frames:
        clips.append(ClipSpec(t0, window, frame_stride, video_id))
        t0 += clip_stride
    return clips


def read_ppm(path) -> Frame:
    """Decode a binary P6 PPM file. Only maxval 255 is accepted."""
    raw = Path(path).read_bytes()
    if raw[:2] != b"P6":
        raise MediaError(f"{path}: not a P6 PPM file")

    # Header tokens may be separated by whitespace and '#' comments.
    pos = 2
    fields = []
    while len(fields) < 3:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos:pos + 1] == b"#":
            while pos < len(raw) and raw[pos:pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise MediaError(f"{path}: truncated PPM header")
        fields.append(raw[start:pos])
    pos += 1  # single whitespace after maxval

    try:
        width, height, maxval = (int(f) for f in fields)
    except ValueError as exc:
        raise MediaError(f"{path}: bad PPM header") from exc
    if maxval != 255:
        raise MediaError(f"{path}: unsupported maxval {maxval}")

    expected = height * width * 3
    pixels = raw[pos:pos + expected]
    if len(pixels) != expected:
        raise MediaError(f"{path}: truncated pixel data ({len(pixels)} of {expected} bytes)")
    arr = np.frombuffer(pixels, dtype=np.uint8).reshape(height, width, 3)
    return Frame(arr.astype(np.float32) / 255.0)


def write_ppm(frame: Frame, path) -> None:
    """Write a frame as binary P6 with maxval 255 (canonical header)."""
    samples = np.rint(frame.data * 255.0).astype(np.uint8)
    header = f"P6\n{frame.width} {frame.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + samples.tobytes())


def _read_raw_rgb(path) -> list[Frame]:
    path = Path(path)
    sidecar = path.with_name(path.name + ".json")
    if not sidecar.exists():
        raise MediaError(f"missing sidecar {sidecar}")
    meta = json.loads(sidecar.read_text())
    try:
        height, width, count = int(meta["height"]), int(meta["width"]), int(meta["frames"])
    except KeyError as exc:
        raise MediaError(f"{sidecar}: sidecar missing field {exc}") from exc

    raw = path.read_bytes()
    expected = count * height * width * 3
    if len(raw) != expected:
        raise MediaError(f"{path}: truncated raw_rgb data ({len(raw)} of {expected} bytes)")
    arr = np.frombuffer(raw, dtype=np.uint8).reshape(count, height, width, 3)
    return [Frame(a.astype(np.float32) / 255.0) for a in arr]


def load_frame_sequence(path, format: str = "ppm") -> list[Frame]:
    """Load an ordered frame sequence from disk.

    ``ppm``: ``path`` is a directory of P6 files, ordered lexicographically by
    filename (zero-padded names expected). ``raw_rgb``: ``path`` is a single
    frame-major RGB24 file with a ``<name>.json`` sidecar declaring
    ``{"height", "width", "frames"}``.
    """
    path = Path(path)
    if format == "ppm":
        if not path.is_dir():
            raise MediaError(f"{path}: not a directory of PPM frames")
        files = sorted(p for p in path.iterdir() if p.suffix.lower() == ".ppm")
        if not files:
            raise MediaError(f"{path}: no .ppm files found")
        frames = [read_ppm(p) for p in files]
    elif format == "raw_rgb":
        frames = _read_raw_rgb(path)
    else:
        raise MediaError(f"unknown format {format!r} (expected 'ppm' or 'raw_rgb')")

    shape = frames[0].data.shape
    for i, f in enumerate(frames):
        if f.data.shape != shape:
            raise MediaError(f"inconsistent frame dimensions: frame {i} is "
                             f"{f.data.shape[:2]}, expected {shape[:2]}")
    return frames
