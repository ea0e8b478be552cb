"""Relational graph-convolution engine with explicit reverse-mode gradients.

Architecture: two fully-connected layers with ELU project node colors into an
embedding, four relational convolution layers (separate weights per relation,
edge attribute concatenated to the neighbor message) update node states,
global mean pooling plus dropout feed a linear head that emits raw logits.

The per-node layer update is

    h_i <- ELU( sum_r sum_{j in N_i^r} (1 / c_{i,r}) * W_r [h_j, e_ij]
                + W_0 h_i + b )

with c_{i,r} = |N_i^r| and neighborhoods symmetrized over stored edge
direction. Nodes with no r-neighbors contribute nothing for that relation.

Everything is numpy; float64 is used in tests for gradient checks, float32 is
the production/storage dtype.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass, field

import numpy as np

from .graph import SPATIAL, TEMPORAL, VideoGraph


@dataclass(frozen=True)
class ModelConfig:
    num_classes: int
    input_dim: int = 3
    embed_dim: int = 256
    hidden_dim: int = 512
    gnn_layers: int = 4
    relations: int = 2
    edge_feature_dim: int = 1
    dropout_p: float = 0.2
    attention_heads: int | None = None

    def __post_init__(self):
        if self.attention_heads is not None:
            raise ValueError("attention heads are not supported; this engine "
                             "implements the relational convolution variant only")
        for name in ("num_classes", "input_dim", "embed_dim", "hidden_dim",
                     "gnn_layers", "relations", "edge_feature_dim"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0 <= self.dropout_p < 1:
            raise ValueError("dropout_p must be in [0, 1)")

    def layer_dims(self) -> list[tuple[int, int]]:
        """(in, out) per relational layer; the first expands embed -> hidden."""
        dims = [(self.embed_dim, self.hidden_dim)]
        dims += [(self.hidden_dim, self.hidden_dim)] * (self.gnn_layers - 1)
        return dims


def count_params(config: ModelConfig) -> int:
    """Closed-form parameter count, biases included.

    fc1 + fc2 project input_dim -> embed_dim -> embed_dim; each relational
    layer holds `relations` weight matrices of shape (in + edge_dim, out), a
    self weight (in, out) and one bias; the head maps hidden_dim -> classes.
    """
    c = config
    total = (c.input_dim + 1) * c.embed_dim          # fc1
    total += (c.embed_dim + 1) * c.embed_dim         # fc2
    for d_in, d_out in c.layer_dims():
        total += c.relations * (d_in + c.edge_feature_dim) * d_out
        total += d_in * d_out + d_out                # self weight + bias
    total += (c.hidden_dim + 1) * c.num_classes      # head
    return total


def _elu(x):
    return np.where(x > 0, x, np.expm1(np.minimum(x, 0.0)))


def _elu_grad(x, fx):
    return np.where(x > 0, 1.0, fx + 1.0)


def _sym_indices(graph: VideoGraph, relation: str):
    """Symmetrized (src, dst, attr) message arrays for one relation."""
    pairs, attr = graph._edge_arrays(relation)
    if len(pairs) == 0:
        e = np.zeros(0, dtype=np.int64)
        return e, e, np.zeros(0, dtype=np.float64)
    src = np.concatenate([pairs[:, 0], pairs[:, 1]]).astype(np.int64)
    dst = np.concatenate([pairs[:, 1], pairs[:, 0]]).astype(np.int64)
    a = np.concatenate([attr, attr]).astype(np.float64)
    return src, dst, a


class RgcnModel:
    """Parameter container plus forward/backward over one clip graph."""

    def __init__(self, config: ModelConfig, seed: int = 0,
                 dtype=np.float32):
        self.config = config
        self.dtype = np.dtype(dtype)
        self.params: dict[str, np.ndarray] = {}
        rng = np.random.Generator(np.random.PCG64(seed))
        c = config

        def dense(name, d_in, d_out):
            limit = np.sqrt(6.0 / (d_in + d_out))
            self.params[f"{name}_w"] = rng.uniform(-limit, limit,
                                                   (d_in, d_out)).astype(self.dtype)
            self.params[f"{name}_b"] = np.zeros(d_out, dtype=self.dtype)

        dense("fc1", c.input_dim, c.embed_dim)
        dense("fc2", c.embed_dim, c.embed_dim)
        for layer, (d_in, d_out) in enumerate(c.layer_dims()):
            for rel in range(c.relations):
                limit = np.sqrt(6.0 / (d_in + c.edge_feature_dim + d_out))
                self.params[f"gnn{layer}_rel{rel}_w"] = rng.uniform(
                    -limit, limit, (d_in + c.edge_feature_dim, d_out)).astype(self.dtype)
            limit = np.sqrt(6.0 / (d_in + d_out))
            self.params[f"gnn{layer}_self_w"] = rng.uniform(
                -limit, limit, (d_in, d_out)).astype(self.dtype)
            self.params[f"gnn{layer}_b"] = np.zeros(d_out, dtype=self.dtype)
        dense("head", c.hidden_dim, c.num_classes)
        self._cache = None

    def param_count(self) -> int:
        return sum(p.size for p in self.params.values())

    # ------------------------------------------------------------------ #

    def forward(self, graph: VideoGraph, mode: str = "eval",
                rng: np.random.Generator | None = None) -> np.ndarray:
        """Per-clip logits. ``mode='train'`` activates dropout (needs rng)."""
        if graph.node_count == 0:
            raise ValueError("cannot run the network on an empty graph")
        if mode not in ("train", "eval"):
            raise ValueError(f"unknown mode {mode!r}")
        if self.config.relations != 2:
            raise ValueError("forward pass supports exactly the two relations "
                             "(spatial, temporal)")
        if mode == "train" and rng is None:
            raise ValueError("train mode requires an rng for dropout")
        p = self.params
        cache = {"graph": graph, "mode": mode}

        x0 = graph.colors.astype(self.dtype)
        a1 = x0 @ p["fc1_w"] + p["fc1_b"]
        h1 = _elu(a1)
        a2 = h1 @ p["fc2_w"] + p["fc2_b"]
        h = _elu(a2)
        cache.update(x0=x0, a1=a1, h1=h1, a2=a2)

        relation_index = {}
        n = graph.node_count
        for rel, name in enumerate(RELATION_ORDER):
            src, dst, attr = _sym_indices(graph, name)
            deg = np.bincount(dst, minlength=n).astype(self.dtype)
            relation_index[rel] = (src, dst, attr.astype(self.dtype), deg)
        cache["relation_index"] = relation_index

        layers = []
        for layer, (d_in, d_out) in enumerate(self.config.layer_dims()):
            pre = h @ p[f"gnn{layer}_self_w"] + p[f"gnn{layer}_b"]
            norm_aggs = []
            for rel in range(self.config.relations):
                src, dst, attr, deg = relation_index[rel]
                agg = np.zeros((n, d_in + 1), dtype=self.dtype)
                if len(src):
                    msg = np.concatenate([h[src], attr[:, None]], axis=1)
                    np.add.at(agg, dst, msg)
                norm = agg / np.maximum(deg, 1.0)[:, None]
                pre += norm @ p[f"gnn{layer}_rel{rel}_w"]
                norm_aggs.append(norm)
            h_out = _elu(pre)
            layers.append({"h_in": h, "pre": pre, "norm": norm_aggs, "h_out": h_out})
            h = h_out
        cache["layers"] = layers

        pooled = h.mean(axis=0)
        if mode == "train" and self.config.dropout_p > 0:
            keep = (rng.random(pooled.shape) >= self.config.dropout_p)
            mask = keep.astype(self.dtype) / (1.0 - self.config.dropout_p)
        else:
            mask = np.ones_like(pooled)
        dropped = pooled * mask
        logits = dropped @ p["head_w"] + p["head_b"]
        cache.update(pooled=pooled, mask=mask, dropped=dropped)
        self._cache = cache
        return logits

    def backward(self, dlogits: np.ndarray) -> dict[str, np.ndarray]:
        """Exact gradients of every parameter for the cached forward pass."""
        if self._cache is None:
            raise RuntimeError("backward called without a cached forward pass")
        p = self.params
        cache = self._cache
        graph: VideoGraph = cache["graph"]
        n = graph.node_count
        grads = {}

        dlogits = dlogits.astype(self.dtype)
        grads["head_w"] = np.outer(cache["dropped"], dlogits)
        grads["head_b"] = dlogits.copy()
        dpooled = (p["head_w"] @ dlogits) * cache["mask"]
        dh = np.broadcast_to(dpooled / n, (n, dpooled.shape[0])).astype(self.dtype)

        for layer in reversed(range(self.config.gnn_layers)):
            state = cache["layers"][layer]
            dpre = dh * _elu_grad(state["pre"], state["h_out"])
            grads[f"gnn{layer}_b"] = dpre.sum(axis=0)
            grads[f"gnn{layer}_self_w"] = state["h_in"].T @ dpre
            dh_in = dpre @ p[f"gnn{layer}_self_w"].T
            for rel in range(self.config.relations):
                src, dst, _, deg = cache["relation_index"][rel]
                norm = state["norm"][rel]
                grads[f"gnn{layer}_rel{rel}_w"] = norm.T @ dpre
                if len(src):
                    dnorm = dpre @ p[f"gnn{layer}_rel{rel}_w"].T
                    dagg = dnorm / np.maximum(deg, 1.0)[:, None]
                    np.add.at(dh_in, src, dagg[dst, :-1])
            dh = dh_in

        da2 = dh * _elu_grad(cache["a2"], _elu(cache["a2"]))
        grads["fc2_w"] = cache["h1"].T @ da2
        grads["fc2_b"] = da2.sum(axis=0)
        dh1 = da2 @ p["fc2_w"].T
        da1 = dh1 * _elu_grad(cache["a1"], _elu(cache["a1"]))
        grads["fc1_w"] = cache["x0"].T @ da1
        grads["fc1_b"] = da1.sum(axis=0)
        return grads


RELATION_ORDER = (SPATIAL, TEMPORAL)


def count_flops(config: ModelConfig, graph: VideoGraph) -> int:
    """Deterministic FLOP estimate for one forward pass on ``graph``.

    Dense ops count 2 FLOPs per multiply-add plus the bias add; each
    symmetrized message costs 2 * (in + edge_dim) * out through its relation
    weight; activations and pooling count one FLOP per element.
    """
    c = config
    n = graph.node_count
    msgs = {SPATIAL: 2 * len(graph.spatial_edges),
            TEMPORAL: 2 * len(graph.temporal_edges)}

    def dense(rows, d_in, d_out):
        return rows * (2 * d_in * d_out + d_out)

    total = dense(n, c.input_dim, c.embed_dim) + n * c.embed_dim
    total += dense(n, c.embed_dim, c.embed_dim) + n * c.embed_dim
    for d_in, d_out in c.layer_dims():
        total += dense(n, d_in, d_out)                      # self weight + bias
        for name in RELATION_ORDER:
            total += msgs[name] * 2 * (d_in + c.edge_feature_dim) * d_out
            total += n * (d_in + c.edge_feature_dim)        # degree normalization
        total += n * d_out                                  # ELU
    total += n * c.hidden_dim                               # mean pool
    total += dense(1, c.hidden_dim, c.num_classes)
    return int(total)


# --------------------------------------------------------------------------- #
# training


def cross_entropy(logits: np.ndarray, label: int):
    """Softmax cross-entropy loss and its gradient for one sample."""
    shifted = logits - logits.max()
    log_z = np.log(np.exp(shifted).sum())
    loss = float(log_z - shifted[label])
    probs = np.exp(shifted - log_z)
    dlogits = probs
    dlogits[label] -= 1.0
    return loss, dlogits


class AdamState:
    """Adam moment buffers; standard beta=(0.9, 0.999), eps=1e-8."""

    def __init__(self, model: RgcnModel, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in model.params.items()}
        self.v = {k: np.zeros_like(v) for k, v in model.params.items()}

    def update(self, params: dict[str, np.ndarray],
               grads: dict[str, np.ndarray], lr: float) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for k, g in grads.items():
            self.m[k] = b1 * self.m[k] + (1 - b1) * g
            self.v[k] = b2 * self.v[k] + (1 - b2) * g * g
            m_hat = self.m[k] / (1 - b1 ** self.t)
            v_hat = self.v[k] / (1 - b2 ** self.t)
            params[k] -= (lr * m_hat / (np.sqrt(v_hat) + self.eps)).astype(params[k].dtype)


def train_step(model: RgcnModel, graphs: list[VideoGraph], labels,
               adam: AdamState, lr: float = 1e-3,
               rng: np.random.Generator | None = None) -> float:
    """One Adam step on a batch: mean cross-entropy over the graphs."""
    labels = list(labels)
    if len(graphs) != len(labels):
        raise ValueError("batch size mismatch between graphs and labels")
    for y in labels:
        if not 0 <= y < model.config.num_classes:
            raise ValueError(f"label {y} outside [0, {model.config.num_classes})")

    total_loss = 0.0
    batch_grads: dict[str, np.ndarray] = {}
    mode = "train" if rng is not None else "eval"
    for g, y in zip(graphs, labels):
        logits = model.forward(g, mode=mode, rng=rng)
        loss, dlogits = cross_entropy(logits.astype(np.float64), y)
        total_loss += loss
        grads = model.backward(dlogits / len(graphs))
        for k, v in grads.items():
            if k in batch_grads:
                batch_grads[k] += v
            else:
                batch_grads[k] = v
    mean_loss = total_loss / len(graphs)
    if not np.isfinite(mean_loss):
        raise FloatingPointError(f"non-finite training loss: {mean_loss}")
    adam.update(model.params, batch_grads, lr)
    return mean_loss


# --------------------------------------------------------------------------- #
# inference


@dataclass(frozen=True)
class LogitsView:
    per_view: np.ndarray   # (views, classes)
    aggregated: np.ndarray = field(init=False)  # mean over views

    def __post_init__(self):
        object.__setattr__(self, "aggregated", self.per_view.mean(axis=0))


def view_indices(n_clips: int, num_views: int) -> list[int]:
    """Evenly spaced clip indices: first, last, linear rounding between.

    One view degenerates to the middle clip; more views than clips revisits
    clips (sampling with repetition).
    """
    if n_clips < 1 or num_views < 1:
        raise ValueError("need at least one clip and one view")
    if num_views == 1:
        return [n_clips // 2]
    return [int(k * (n_clips - 1) / (num_views - 1) + 0.5) for k in range(num_views)]


def infer_views(model: RgcnModel, graphs: list[VideoGraph],
                num_views: int) -> LogitsView:
    """Average eval-mode logits over evenly spaced clip views."""
    idx = view_indices(len(graphs), num_views)
    logits = np.stack([model.forward(graphs[i], mode="eval") for i in idx])
    return LogitsView(logits)


# --------------------------------------------------------------------------- #
# checkpoints: u32le header length, JSON header, little-endian float32 data


def save_checkpoint(model: RgcnModel, path) -> None:
    names = sorted(model.params)
    manifest = []
    offset = 0
    blobs = []
    for name in names:
        arr = np.ascontiguousarray(model.params[name], dtype="<f4")
        manifest.append({"name": name, "shape": list(arr.shape), "offset": offset})
        blobs.append(arr.tobytes())
        offset += arr.nbytes
    header = json.dumps({
        "format": "rgcn-checkpoint-v1",
        "config": asdict(model.config),
        "tensors": manifest,
    }).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        for blob in blobs:
            fh.write(blob)


def load_checkpoint(path) -> RgcnModel:
    with open(path, "rb") as fh:
        (header_len,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(header_len).decode("utf-8"))
        data = fh.read()
    if header.get("format") != "rgcn-checkpoint-v1":
        raise ValueError(f"{path}: not a model checkpoint")
    model = RgcnModel(ModelConfig(**header["config"]), dtype=np.float32)
    for entry in header["tensors"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(data, dtype="<f4", count=count,
                            offset=entry["offset"]).reshape(shape)
        if entry["name"] not in model.params:
            raise ValueError(f"{path}: unknown tensor {entry['name']!r}")
        if model.params[entry["name"]].shape != shape:
            raise ValueError(f"{path}: shape mismatch for {entry['name']!r}")
        model.params[entry["name"]] = arr.copy()
    return model
