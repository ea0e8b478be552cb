"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines. The compression-ratio check is expected to fail (strict xfail): the
source accounting formula counts the per-frame spatial edges only once, so
honestly measured graphs carry about 2.5x more values than the formula
predicts and the claimed >25x ratio is out of reach; the value-count bound
with the per-frame degree caveat does hold.
"""

import math
import time

import numpy as np
import pytest

from graphvid import (AdamState, Frame, ModelConfig, Node, RgcnModel,
                      SlicConfig, apply_agen, apply_all, apply_rrs,
                      AugmentConfig, build_from_segmentations,
                      build_video_graph, centroid_distance, count_flops,
                      count_params, cross_entropy, default_rng,
                      graph_to_bytes, representation_size, run_benchmark,
                      segment, synthetic_clip, train_step, write_ppm)
from graphvid.cli import main as cli_main

from test_graph import brute_force_spatial_pairs, brute_force_temporal
from test_model import dense_forward, random_graph


def ok(name: str, detail: str = "") -> None:
    print(f"[PASS] {name}" + (f": {detail}" if detail else ""))


def test_c01_graph_construction_oracle_equivalence():
    """100 random clips: spatial and temporal edges match brute force exactly."""
    rng = np.random.default_rng(101)
    started = time.perf_counter()
    for trial in range(100):
        h, w = (int(v) for v in rng.integers(8, 33, size=2))
        t_frames = int(rng.integers(2, 7))
        s = int(rng.integers(2, 17))
        d_prox = float(rng.uniform(0.15, 0.8))
        frames = [Frame(rng.random((h, w, 3)).astype(np.float32))
                  for _ in range(t_frames)]

        segs = [segment(f, SlicConfig(s), t) for t, f in enumerate(frames)]
        graph = build_from_segmentations(segs, h, w, d_prox)

        offsets = np.concatenate(
            [[0], np.cumsum([seg.region_count for seg in segs])])
        for t, seg in enumerate(segs):
            got = {(int(a) - offsets[t], int(b) - offsets[t])
                   for (a, b), fa in zip(graph.spatial_edges,
                                         graph.frame_index[graph.spatial_edges[:, 0]])
                   if fa == t}
            assert got == brute_force_spatial_pairs(seg.labels), f"clip {trial}"

        got_temporal = [(int(a), int(b)) for a, b in graph.temporal_edges]
        expected = []
        for t in range(t_frames - 1):
            lo0, hi0 = offsets[t], offsets[t + 1]
            lo1, hi1 = offsets[t + 1], offsets[t + 2]
            matches = brute_force_temporal(
                graph.coords[lo0:hi0], graph.colors[lo0:hi0],
                graph.coords[lo1:hi1], graph.colors[lo1:hi1], d_prox)
            expected += [(i + lo0, j + lo1) for i, j, _ in matches]
        assert got_temporal == expected, f"clip {trial}"
    elapsed = time.perf_counter() - started
    assert elapsed < 60.0, f"oracle sweep took {elapsed:.1f}s"
    ok("graph construction oracle equivalence",
       f"100 clips, {elapsed:.1f}s")


def test_c02_edge_distance_unit_values():
    a = Node(0, 0, 10 / 100, 20 / 100, (0.5, 0.5, 0.5))
    b = Node(1, 0, 40 / 100, 60 / 100, (0.5, 0.5, 0.5))
    assert abs(centroid_distance(a, b) - 0.5) <= 1e-9
    lo = Node(0, 0, 0.0, 0.0, (0, 0, 0))
    hi = Node(1, 0, 1.0, 1.0, (0, 0, 0))
    assert abs(centroid_distance(lo, hi) - math.sqrt(2)) <= 1e-12
    ok("edge distance unit values", "3-4-5 -> 0.5, corners -> sqrt(2)")


def test_c03a_efficiency_value_count(big_synthetic_graph):
    """Measured value count within the accounting bound, 4S edges per frame."""
    s, t, c = 800, 20, 3
    measured = representation_size(big_synthetic_graph)
    literal = 3 * (4 * s + (t - 1) * s) + c * t * s
    caveat_bound = 3 * (4 * s * t + (t - 1) * s) + c * t * s
    assert measured <= caveat_bound, (measured, caveat_bound)
    ok("efficiency value count",
       f"measured {measured} <= per-frame bound {caveat_bound} "
       f"(literal formula {literal})")


@pytest.mark.xfail(
    strict=True,
    reason="accounting formula counts per-frame spatial edges once for the "
           "whole clip; real S=800/T=20 graphs hold ~2.5x more values, so "
           "the >25x ratio cannot be met by an honest measurement "
           "(observed ~11-14x)")
def test_c03b_efficiency_compression_ratio(big_synthetic_graph):
    measured = representation_size(big_synthetic_graph)
    pixel_values = 20 * 3 * 224 * 224
    ratio = pixel_values / measured
    print(f"[FAIL expected] efficiency compression ratio: measured {ratio:.1f}x, "
          f"criterion wants > 25x")
    assert ratio > 25.0


def test_c04_parameter_count():
    config = ModelConfig(num_classes=400)
    total = count_params(config)
    # independent closed form, assembled term by term
    hand = 0
    hand += 3 * 256 + 256              # fc1
    hand += 256 * 256 + 256            # fc2
    dims = [(256, 512)] + [(512, 512)] * 3
    for d_in, d_out in dims:
        hand += 2 * (d_in + 1) * d_out     # one weight per relation, edge dim 1
        hand += d_in * d_out + d_out       # self weight + bias
    hand += 512 * 400 + 400            # head
    assert total == hand
    assert abs(total - 2.99e6) <= 0.05 * 2.99e6
    assert total == RgcnModel(config).param_count()
    ok("parameter count", f"{total} (= {total / 1e6:.2f}M, target 2.99M +-5%)")


def test_c05_flop_scaling():
    # low-texture drift clip: region adjacency stays scale-free, so edge and
    # node counts both scale with S and the counter's ratio tracks the model's
    frames = [Frame(np.full((224, 224, 3), 0.4 + 0.01 * t, dtype=np.float32))
              for t in range(4)]
    g800 = build_video_graph(frames, SlicConfig(800))
    g2000 = build_video_graph(frames, SlicConfig(2000))
    config = ModelConfig(num_classes=400)
    ratio = count_flops(config, g2000) / count_flops(config, g800)
    assert abs(ratio - 2.62) <= 0.30, ratio
    ok("FLOP scaling", f"S=2000/S=800 ratio {ratio:.2f} (target 2.62 +-0.3)")


def test_c06_gradient_fidelity():
    """Central finite differences on every entry of every tensor, float64."""
    started = time.perf_counter()
    config = ModelConfig(num_classes=4, embed_dim=6, hidden_dim=8,
                         gnn_layers=3, dropout_p=0.2)
    model = RgcnModel(config, seed=42, dtype=np.float64)
    graph = random_graph(20, 30, 10, seed=42)
    label = 2

    _, dlogits = cross_entropy(model.forward(graph), label)
    grads = model.backward(dlogits)

    eps = 1e-3
    checked = 0
    for name, param in model.params.items():
        flat = param.ravel()
        analytic = grads[name].ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            up, _ = cross_entropy(model.forward(graph), label)
            flat[i] = orig - eps
            down, _ = cross_entropy(model.forward(graph), label)
            flat[i] = orig
            numeric = (up - down) / (2 * eps)
            tol = 1e-4 * max(abs(numeric), abs(analytic[i])) + 1e-8
            assert abs(numeric - analytic[i]) <= tol, \
                f"{name}[{i}]: analytic {analytic[i]} vs numeric {numeric}"
            checked += 1
    elapsed = time.perf_counter() - started
    assert elapsed < 120.0, f"gradient check took {elapsed:.1f}s"
    ok("gradient fidelity",
       f"{checked} parameters across {len(model.params)} tensors, {elapsed:.1f}s")


def test_c07_dense_sparse_equivalence():
    for seed, nodes in ((1, 30), (2, 50), (3, 12)):
        config = ModelConfig(num_classes=3, embed_dim=5, hidden_dim=7,
                             gnn_layers=3, dropout_p=0.0)
        model = RgcnModel(config, seed=seed, dtype=np.float64)
        graph = random_graph(nodes, 2 * nodes, nodes // 2, seed=seed)
        sparse_logits = model.forward(graph)
        dense_logits, dense_layers = dense_forward(model, graph)
        np.testing.assert_allclose(sparse_logits, dense_logits, rtol=1e-5)
        for got, want in zip((s["h_out"] for s in model._cache["layers"]),
                             dense_layers):
            np.testing.assert_allclose(got, want, rtol=1e-5, atol=1e-12)
    ok("dense/sparse layer equivalence", "graphs of 12, 30, 50 nodes at 1e-5")


def test_c08_augmentation_statistics():
    n_nodes = 10_000
    graph = random_graph(n_nodes, 10_000, 0, seed=8)
    kept, _ = apply_rrs(graph, 0.8, default_rng(88))
    fraction = kept.node_count / n_nodes
    bound = 3 * math.sqrt(0.8 * 0.2 / n_nodes)
    assert abs(fraction - 0.8) <= bound, (fraction, bound)

    noisy = apply_agen(graph, 0.4, default_rng(99))
    sigma = float((noisy.spatial_attr.astype(np.float64)
                   - graph.spatial_attr).std())
    assert abs(sigma - 0.4) <= 0.05 * 0.4, sigma
    ok("augmentation statistics",
       f"RRS keep {fraction:.4f} (0.8 +- {bound:.4f}), AGEN sigma {sigma:.4f}")


def test_c09_generation_time_trend():
    """Mean generation time strictly increases over the superpixel sweep.

    Absolute seconds are hardware-bound and excluded from pass/fail; the
    stage split (graph stage >= segmentation stage at S=2000) is reported
    as a trend note, not asserted.
    """
    frames = synthetic_clip(8, 224, 224, seed=9)
    report = run_benchmark(range(200, 2001, 200), frames, repetitions=3)
    means = [row.mean_seconds for row in report.rows]
    assert all(b > a for a, b in zip(means, means[1:])), means
    top = report.rows[-1]
    split_note = ("graph stage >= segmentation stage at S=2000"
                  if top.graph_seconds >= top.segmentation_seconds
                  else "WARN: segmentation stage dominated at S=2000 on this "
                       "hardware (trend note only)")
    ok("generation time trend",
       f"means {means[0]:.2f}s -> {means[-1]:.2f}s strictly increasing; "
       + split_note)


def _render_motion_clip(shape: str, seed: int, size: int = 32,
                        frames: int = 6) -> list[Frame]:
    rng = np.random.default_rng(seed)
    cy, cx = rng.uniform(10, size - 10, size=2)
    vy, vx = rng.uniform(-2.0, 2.0, size=2)
    ys, xs = np.mgrid[0:size, 0:size]
    clip = []
    for t in range(frames):
        y = np.clip(cy + vy * t, 9, size - 10)
        x = np.clip(cx + vx * t, 9, size - 10)
        img = np.full((size, size, 3), 0.1)
        if shape == "square":
            mask = (np.abs(ys - y) <= 5.5) & (np.abs(xs - x) <= 5.5)
        else:
            mask = (ys - y) ** 2 + (xs - x) ** 2 <= 4.5 ** 2
        img[mask] = 1.0
        clip.append(Frame(img.astype(np.float32)))
    return clip


def _motion_dataset(count: int, seed_offset: int):
    graphs, labels = [], []
    for i in range(count):
        shape = "square" if i % 2 == 0 else "circle"
        clip = _render_motion_clip(shape, seed_offset + i)
        graphs.append(build_video_graph(clip, SlicConfig(32)))
        labels.append(0 if shape == "square" else 1)
    return graphs, labels


def test_c10_desk_scale_learnability():
    """Moving square vs circle: 100% train within 200 Adam steps at lr 1e-3,
    >= 90% on 20 held-out clips."""
    train_graphs, train_labels = _motion_dataset(50, seed_offset=0)
    test_graphs, test_labels = _motion_dataset(20, seed_offset=10_000)

    config = ModelConfig(num_classes=2, embed_dim=16, hidden_dim=24,
                         gnn_layers=4, dropout_p=0.0)
    model = RgcnModel(config, seed=0)
    adam = AdamState(model)

    def train_accuracy():
        return float(np.mean([np.argmax(model.forward(g)) == y
                              for g, y in zip(train_graphs, train_labels)]))

    batch = 25
    reached_at = None
    for step in range(200):
        lo = (step * batch) % len(train_graphs)
        idx = [(lo + k) % len(train_graphs) for k in range(batch)]
        train_step(model, [train_graphs[i] for i in idx],
                   [train_labels[i] for i in idx], adam, lr=1e-3)
        if (step + 1) % 10 == 0 and train_accuracy() == 1.0:
            reached_at = step + 1
            break
    assert reached_at is not None and train_accuracy() == 1.0, \
        f"train accuracy {train_accuracy():.2f} after 200 steps"

    held = float(np.mean([np.argmax(model.forward(g)) == y
                          for g, y in zip(test_graphs, test_labels)]))
    assert held >= 0.90, held
    ok("desk-scale learnability",
       f"100% train at step {reached_at}, held-out {held:.2f}")


def test_c11_determinism(tmp_path):
    rng = np.random.default_rng(12)
    src = tmp_path / "frames"
    src.mkdir()
    base = rng.random((16, 16, 3))
    for i in range(40):
        drift = np.clip(base + 0.003 * i, 0.0, 1.0)
        write_ppm(Frame(drift.astype(np.float32)), src / f"{i:05d}.ppm")

    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    for out in (out1, out2):
        code = cli_main(["build", str(src), "--output", str(out),
                         "--superpixels", "6"])
        assert code == 0
    files1 = sorted(out1.glob("*.gvg"))
    assert files1
    for p in files1:
        assert p.read_bytes() == (out2 / p.name).read_bytes()

    graph = build_video_graph(
        [Frame(rng.random((20, 20, 3)).astype(np.float32)) for _ in range(3)],
        SlicConfig(8))
    config = AugmentConfig(seed=777)
    a, _ = apply_all(graph, config)
    b, _ = apply_all(graph, config)
    assert graph_to_bytes(a) == graph_to_bytes(b)
    ok("determinism", "rebuilds byte-identical, seeded augmentation bit-exact")
