"""Operator command line: build graphs, benchmark generation, train, infer.

Defaults follow the clip windowing (20-frame window, frame stride 2, clip
stride 10), 800 superpixels, 8 inference views, and the tuned augmentation
parameters (sigma_edge 0.4, sigma_node 0.2, p_edge 1.0, p_node 0.8).
"""

from __future__ import annotations

import argparse
import csv
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .augment import AugmentConfig, apply_all, derive_clip_seed
from .bench import run_benchmark, synthetic_clip
from .cache import cached_build
from .graph import VideoGraph, size_report
from .media import MediaError, enumerate_clips, load_frame_sequence
from .model import (AdamState, ModelConfig, RgcnModel, infer_views,
                    load_checkpoint, save_checkpoint, train_step)
from .slic import SlicConfig
from .store import StoreError, read_graph, write_graph, write_graph_json


def _add_window_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--window", type=int, default=20,
                   help="frames per clip")
    p.add_argument("--frame-stride", type=int, default=2,
                   help="stride between frames inside a clip")
    p.add_argument("--clip-stride", type=int, default=10,
                   help="stride between clip start frames")


def _add_augment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--sigma-edge", type=float, default=0.4,
                   help="std-dev of additive edge-attribute noise")
    p.add_argument("--sigma-node", type=float, default=0.2,
                   help="std-dev of additive node-color noise")
    p.add_argument("--p-edge", type=float, default=1.0,
                   help="spatial-edge keep probability")
    p.add_argument("--p-node", type=float, default=0.8,
                   help="superpixel keep probability")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphvid",
        description="Compile video clips into superpixel graphs and run the "
                    "relational graph network on them.")
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p = sub.add_parser("build", formatter_class=fmt,
                       help="build one graph file per sliding-window clip")
    p.add_argument("input", help="frame directory (ppm) or raw_rgb file")
    p.add_argument("--output", required=True, help="output directory for .gvg files")
    p.add_argument("--format", choices=("ppm", "raw_rgb"), default="ppm",
                   help="input frame format")
    p.add_argument("--superpixels", type=int, default=800,
                   help="target superpixels per frame")
    p.add_argument("--d-proximity", type=float, default=None,
                   help="temporal neighborhood radius (default 2/sqrt(S))")
    _add_window_flags(p)
    p.add_argument("--video-id", default=None,
                   help="video id used in output names (default: input name)")
    p.add_argument("--jobs", type=int, default=1, help="parallel clip builds")
    p.add_argument("--augment", action="store_true",
                   help="apply the augmentation pipeline before writing")
    _add_augment_flags(p)
    p.add_argument("--seed", type=int, default=0, help="augmentation seed")
    p.add_argument("--debug-json", action="store_true",
                   help="also write a lossy .json export per graph")

    p = sub.add_parser("bench", formatter_class=fmt,
                       help="time graph generation over a superpixel sweep")
    p.add_argument("--superpixels", type=int, nargs="+",
                   default=[200, 400, 600, 800, 1000, 1200, 1400, 1600, 1800, 2000],
                   help="superpixel counts to sweep")
    p.add_argument("--frames", type=int, default=8, help="synthetic clip length")
    p.add_argument("--height", type=int, default=224, help="synthetic frame height")
    p.add_argument("--width", type=int, default=224, help="synthetic frame width")
    p.add_argument("--frames-dir", default=None,
                   help="use real frames from this directory instead")
    p.add_argument("--format", choices=("ppm", "raw_rgb"), default="ppm",
                   help="format of --frames-dir input")
    p.add_argument("--repetitions", type=int, default=3,
                   help="measured repetitions per superpixel count")
    p.add_argument("--d-proximity", type=float, default=None,
                   help="temporal neighborhood radius (default 2/sqrt(S))")
    p.add_argument("--seed", type=int, default=0, help="synthetic clip seed")
    p.add_argument("--output", default=None,
                   help="write <output>.json and <output>.csv reports")

    p = sub.add_parser("train", formatter_class=fmt,
                       help="train the relational network on graph files")
    p.add_argument("--graphs", required=True, help="directory of .gvg files")
    p.add_argument("--manifest", required=True, help="CSV manifest: file,label")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--lr", type=float, default=1e-3, help="Adam learning rate")
    p.add_argument("--seed", type=int, default=0, help="augmentation/init seed")
    p.add_argument("--no-augment", action="store_true",
                   help="disable the augmentation pipeline")
    _add_augment_flags(p)
    p.add_argument("--embed-dim", type=int, default=256)
    p.add_argument("--hidden-dim", type=int, default=512)
    p.add_argument("--layers", type=int, default=4)
    p.add_argument("--dropout", type=float, default=0.2)
    p.add_argument("--checkpoint", required=True, help="checkpoint output path")

    p = sub.add_parser("infer", formatter_class=fmt,
                       help="multi-view inference from a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--graphs", required=True, help="directory of .gvg files")
    p.add_argument("--manifest", required=True, help="CSV manifest: file,label")
    p.add_argument("--views", type=int, default=8,
                   help="clips sampled per video, evenly spaced")
    return parser


def _load_manifest(path) -> list[tuple[str, int]]:
    rows = []
    with open(path, newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or (i == 0 and row[0].strip().lower() == "file"):
                continue
            if len(row) != 2:
                raise ValueError(f"{path}:{i + 1}: expected 'file,label'")
            try:
                rows.append((row[0].strip(), int(row[1])))
            except ValueError as exc:
                raise ValueError(f"{path}:{i + 1}: bad label {row[1]!r}") from exc
    if not rows:
        raise ValueError(f"{path}: empty manifest")
    return rows


def _video_id_of(filename: str) -> str:
    stem = Path(filename).stem
    head, _, tail = stem.rpartition("_")
    return head if head and tail.isdigit() else stem


def _build_one_clip(clip_frames, clip, args, out_dir: Path) -> tuple[str, int, int]:
    graph = cached_build(clip_frames, SlicConfig(args.superpixels), args.d_proximity)
    if args.augment:
        config = AugmentConfig(args.sigma_edge, args.sigma_node, args.p_edge,
                               args.p_node,
                               derive_clip_seed(args.seed, f"{clip.source_video_id}_{clip.start_frame}"))
        graph, _ = apply_all(graph, config)
    name = f"{clip.source_video_id}_{clip.start_frame}.gvg"
    n_bytes = write_graph(graph, out_dir / name)
    if args.debug_json:
        write_graph_json(graph, out_dir / (name + ".json"))
    report = size_report(graph, clip_frames[0].height, clip_frames[0].width)
    return name, n_bytes, report.value_count


def cmd_build(args) -> int:
    frames = load_frame_sequence(args.input, args.format)
    height, width = frames[0].height, frames[0].width
    if args.superpixels > height * width:
        raise ValueError(f"--superpixels {args.superpixels} exceeds the "
                         f"{height}x{width} pixel count")
    video_id = args.video_id or Path(args.input).stem or "video"
    clips = enumerate_clips(len(frames), args.window, args.frame_stride,
                            args.clip_stride, video_id)
    if not clips:
        print("no clip fits the requested window", file=sys.stderr)
        return 0
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)

    tasks = [([frames[i] for i in clip.frame_indices()], clip) for clip in clips]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = [pool.submit(_build_one_clip, clip_frames, clip, args, out_dir)
                       for clip_frames, clip in tasks]
            results = [f.result() for f in futures]
    else:
        results = [_build_one_clip(clip_frames, clip, args, out_dir)
                   for clip_frames, clip in tasks]

    pixel_values = len(clips[0].frame_indices()) * 3 * height * width
    for name, n_bytes, values in results:
        print(f"{name}: {n_bytes} bytes, {values} values "
              f"({pixel_values / max(1, values):.1f}x smaller than "
              f"{pixel_values} pixel values)")
    total_values = sum(v for _, _, v in results)
    print(f"wrote {len(results)} graphs, {total_values} values total")
    return 0


def cmd_bench(args) -> int:
    if args.frames_dir:
        frames = load_frame_sequence(args.frames_dir, args.format)
    else:
        frames = synthetic_clip(args.frames, args.height, args.width, args.seed)
    report = run_benchmark(args.superpixels, frames, args.repetitions,
                           args.d_proximity)
    print(f"# {report.environment}")
    print(report.to_csv(), end="")
    if args.output:
        Path(args.output + ".json").write_text(report.to_json())
        Path(args.output + ".csv").write_text(report.to_csv())
        print(f"reports written to {args.output}.json / {args.output}.csv")
    return 0


def _load_dataset(graph_dir, manifest_path):
    rows = _load_manifest(manifest_path)
    graph_dir = Path(graph_dir)
    dataset = []
    for filename, label in rows:
        path = graph_dir / filename
        if not path.exists():
            raise ValueError(f"manifest entry {filename!r} not found in {graph_dir}")
        dataset.append((filename, read_graph(path), label))
    return dataset


def cmd_train(args) -> int:
    dataset = _load_dataset(args.graphs, args.manifest)
    num_classes = max(label for _, _, label in dataset) + 1
    config = ModelConfig(num_classes=num_classes, embed_dim=args.embed_dim,
                         hidden_dim=args.hidden_dim, gnn_layers=args.layers,
                         dropout_p=args.dropout)
    model = RgcnModel(config, seed=args.seed)
    adam = AdamState(model)
    rng = np.random.Generator(np.random.PCG64(args.seed))

    for epoch in range(args.epochs):
        order = rng.permutation(len(dataset))
        losses = []
        for start in range(0, len(dataset), args.batch_size):
            batch = [dataset[i] for i in order[start:start + args.batch_size]]
            graphs = []
            for name, graph, _ in batch:
                if args.no_augment:
                    graphs.append(graph)
                else:
                    aug_config = AugmentConfig(
                        args.sigma_edge, args.sigma_node, args.p_edge, args.p_node,
                        derive_clip_seed(args.seed + epoch, name))
                    graphs.append(apply_all(graph, aug_config)[0])
            labels = [label for _, _, label in batch]
            losses.append(train_step(model, graphs, labels, adam, args.lr, rng))
        correct = sum(
            int(np.argmax(model.forward(graph, mode="eval")) == label)
            for _, graph, label in dataset)
        print(f"epoch {epoch + 1}/{args.epochs}: loss {np.mean(losses):.4f} "
              f"train-acc {correct / len(dataset):.3f}")
    save_checkpoint(model, args.checkpoint)
    print(f"checkpoint written to {args.checkpoint}")
    return 0


def cmd_infer(args) -> int:
    model = load_checkpoint(args.checkpoint)
    dataset = _load_dataset(args.graphs, args.manifest)

    videos: dict[str, list] = {}
    video_labels: dict[str, int] = {}
    for name, graph, label in dataset:
        vid = _video_id_of(name)
        videos.setdefault(vid, []).append((name, graph))
        if video_labels.setdefault(vid, label) != label:
            raise ValueError(f"conflicting labels for video {vid!r}")

    top1 = top5 = 0
    k = min(5, model.config.num_classes)
    for vid, members in sorted(videos.items()):
        members.sort(key=lambda m: m[0])
        view = infer_views(model, [g for _, g in members], args.views)
        ranked = np.argsort(view.aggregated)[::-1]
        label = video_labels[vid]
        top1 += int(ranked[0] == label)
        top5 += int(label in ranked[:k])
    n = len(videos)
    print(f"videos: {n}  top-1: {top1 / n:.3f}  top-5: {top5 / n:.3f}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"build": cmd_build, "bench": cmd_bench,
                "train": cmd_train, "infer": cmd_infer}
    try:
        return handlers[args.command](args)
    except (ValueError, MediaError, StoreError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
