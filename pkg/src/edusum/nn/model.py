"""Model: pluggable token embeddings, self-attentive span pooling over EDUs,
stacked discourse graph encoder layers per graph, fusion, and a logistic
per-EDU classifier trained with binary cross-entropy.

Hidden size is free (not tied to any pretrained encoder); the token embedding
provider is either a trainable lookup table built from the corpus vocabulary
or fixed vectors loaded from a file.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ..corpus import Document
from ..graphs import document_graphs, message_view
from .autograd import Tensor, concat, softmax

UNK = "<unk>"

GRAPH_CHOICES = ("none", "coref", "rst", "both")


@dataclass(frozen=True)
class ModelConfig:
    d_h: int = 64
    d_ff: int = 128
    layers: int = 2
    dropout_p: float = 0.1
    ln_epsilon: float = 1e-5
    graphs_enabled: str = "both"
    rst_directed_messages: bool = False
    seed: int = 0
    dtype: str = "f64"

    def __post_init__(self):
        if self.d_h <= 0 or self.d_ff <= 0 or self.layers <= 0:
            raise ValueError("d_h, d_ff and layers must be positive")
        if not (0.0 <= self.dropout_p < 1.0):
            raise ValueError("dropout_p must be in [0, 1)")
        if self.graphs_enabled not in GRAPH_CHOICES:
            raise ValueError(f"graphs_enabled must be one of {GRAPH_CHOICES}")
        if self.dtype not in ("f32", "f64"):
            raise ValueError("dtype must be 'f32' or 'f64'")

    @property
    def np_dtype(self):
        return np.float32 if self.dtype == "f32" else np.float64

    def enabled_graphs(self) -> tuple[str, ...]:
        if self.graphs_enabled == "none":
            return ()
        if self.graphs_enabled == "both":
            return ("coref", "rst")
        return (self.graphs_enabled,)


class Vocab:
    """Token-to-index map; index 0 is the unknown token."""

    def __init__(self, tokens: Sequence[str]):
        if not tokens or tokens[0] != UNK:
            tokens = [UNK] + [t for t in tokens if t != UNK]
        self.tokens: tuple[str, ...] = tuple(tokens)
        self._index = {t: i for i, t in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    @classmethod
    def from_corpus(cls, docs: Sequence[Document]) -> "Vocab":
        seen = sorted({t for doc in docs for t in doc.tokens})
        return cls([UNK] + seen)

    def encode(self, tokens: Sequence[str]) -> np.ndarray:
        return np.array([self._index.get(t, 0) for t in tokens], dtype=np.intp)


class ParamStore:
    """Named parameter tensors; iteration order is insertion order."""

    def __init__(self):
        self.tensors: dict[str, Tensor] = {}

    def add(self, name: str, data: np.ndarray, trainable: bool = True) -> Tensor:
        t = Tensor(data, requires_grad=trainable)
        self.tensors[name] = t
        return t

    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]

    def __contains__(self, name: str) -> bool:
        return name in self.tensors

    def names(self) -> list[str]:
        return list(self.tensors)

    def trainable(self) -> list[tuple[str, Tensor]]:
        return [(n, t) for n, t in self.tensors.items() if t.requires_grad]

    def zero_grads(self) -> None:
        for t in self.tensors.values():
            t.grad = None

    def copy_values(self) -> dict[str, np.ndarray]:
        return {n: t.data.copy() for n, t in self.tensors.items()}

    def load_values(self, values: dict[str, np.ndarray]) -> None:
        for n, arr in values.items():
            self.tensors[n].data = arr.copy()


def init_params(
    cfg: ModelConfig,
    vocab_size: int,
    rng: np.random.Generator,
    embed_table: np.ndarray | None = None,
) -> ParamStore:
    """Fresh parameters, uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) throughout.

    Pass ``embed_table`` to install fixed (non-trainable) token vectors in
    place of the trainable lookup table.
    """
    dt = cfg.np_dtype
    params = ParamStore()

    def uniform(shape: tuple[int, ...], fan_in: int) -> np.ndarray:
        bound = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-bound, bound, size=shape).astype(dt)

    if embed_table is not None:
        if embed_table.shape[1] != cfg.d_h:
            raise ValueError(
                f"fixed embeddings have dim {embed_table.shape[1]}, model wants {cfg.d_h}"
            )
        params.add("embed.table", embed_table.astype(dt), trainable=False)
    else:
        params.add("embed.table", uniform((vocab_size, cfg.d_h), cfg.d_h))

    params.add("span.w1", uniform((cfg.d_ff, cfg.d_h), cfg.d_h))
    params.add("span.b1", uniform((cfg.d_ff,), cfg.d_h))
    params.add("span.w2", uniform((1, cfg.d_ff), cfg.d_ff))
    params.add("span.b2", uniform((1,), cfg.d_ff))

    for graph in cfg.enabled_graphs():
        for k in range(cfg.layers):
            p = f"dge.{graph}.{k}"
            params.add(f"{p}.w3", uniform((cfg.d_ff, cfg.d_h), cfg.d_h))
            params.add(f"{p}.b3", uniform((cfg.d_ff,), cfg.d_h))
            params.add(f"{p}.w4", uniform((cfg.d_h, cfg.d_ff), cfg.d_ff))
            params.add(f"{p}.b4", uniform((cfg.d_h,), cfg.d_ff))
            params.add(f"{p}.w5", uniform((cfg.d_h, cfg.d_h), cfg.d_h))
            params.add(f"{p}.b5", uniform((cfg.d_h,), cfg.d_h))
            params.add(f"{p}.ln1_g", np.ones(cfg.d_h, dtype=dt))
            params.add(f"{p}.ln1_b", np.zeros(cfg.d_h, dtype=dt))
            params.add(f"{p}.ln2_g", np.ones(cfg.d_h, dtype=dt))
            params.add(f"{p}.ln2_b", np.zeros(cfg.d_h, dtype=dt))

    if len(cfg.enabled_graphs()) == 2:
        params.add("fuse.w6", uniform((cfg.d_h, 2 * cfg.d_h), 2 * cfg.d_h))
        params.add("fuse.b6", uniform((cfg.d_h,), 2 * cfg.d_h))

    params.add("cls.w7", uniform((1, cfg.d_h), cfg.d_h))
    params.add("cls.b7", uniform((1,), cfg.d_h))
    return params


# -- embedding providers --


def load_embedding_file(path: str | Path, expected_dim: int | None = None) -> tuple[Vocab, np.ndarray]:
    """Read fixed token vectors: JSON {"dim": d, "vectors": {token: [d floats]}}.

    Tokens absent from the file map to the ``<unk>`` row (the file's own
    "<unk>" entry when present, zeros otherwise).
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"embedding file not found: {path}")
    with path.open("r", encoding="utf-8") as fh:
        blob = json.load(fh)
    dim = blob["dim"]
    if expected_dim is not None and dim != expected_dim:
        raise ValueError(f"embedding file dim {dim} != configured hidden size {expected_dim}")
    vectors = blob["vectors"]
    words = sorted(w for w in vectors if w != UNK)
    vocab = Vocab([UNK] + words)
    table = np.zeros((len(vocab), dim), dtype=np.float64)
    if UNK in vectors:
        table[0] = np.asarray(vectors[UNK], dtype=np.float64)
    for i, w in enumerate(words, start=1):
        row = np.asarray(vectors[w], dtype=np.float64)
        if row.shape != (dim,):
            raise ValueError(f"embedding for '{w}' has wrong length")
        table[i] = row
    return vocab, table


def embed_tokens(doc: Document, params: ParamStore, vocab: Vocab) -> Tensor:
    """Per-token vectors: one lookup-table row per document token."""
    return params["embed.table"].take_rows(vocab.encode(doc.tokens))


# -- forward blocks --


def linear(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    return x.matmul(w.T) + b


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float) -> Tensor:
    mu = x.mean(axis=1, keepdims=True)
    centered = x - mu
    var = (centered * centered).mean(axis=1, keepdims=True)
    return (centered / (var + eps).sqrt()) * gain + bias


def dropout(x: Tensor, p: float, rng: np.random.Generator | None, train_mode: bool) -> Tensor:
    if not train_mode or p == 0.0:
        return x
    if rng is None:
        raise ValueError("train-mode dropout needs a random generator")
    keep = (rng.random(x.shape) >= p).astype(x.data.dtype) / (1.0 - p)
    return x * Tensor(keep)


def span_extract(h_span: Tensor, params: ParamStore) -> Tensor:
    """Attention-weighted pooling of one EDU's token vectors -> (1, d_h)."""
    scores = linear(linear(h_span, params["span.w1"], params["span.b1"]).relu(),
                    params["span.w2"], params["span.b2"])
    attn = softmax(scores, axis=0)
    return attn.T.matmul(h_span)


def aggregation_matrix(neighbors: Sequence[Sequence[int]], dtype) -> np.ndarray:
    """Row-normalized neighbor indicator; empty neighborhoods give zero rows."""
    n = len(neighbors)
    mat = np.zeros((n, n), dtype=dtype)
    for i, ns in enumerate(neighbors):
        if ns:
            mat[i, list(ns)] = 1.0 / len(ns)
    return mat


def dge_layer_forward(
    h: Tensor,
    neighbors: Sequence[Sequence[int]],
    params: ParamStore,
    prefix: str,
    cfg: ModelConfig,
    train_mode: bool = False,
    rng: np.random.Generator | None = None,
) -> Tensor:
    """One graph-encoder block: position-wise feed-forward with residual and
    layer norm, then mean neighbor aggregation with residual and layer norm."""
    u = linear(linear(h, params[f"{prefix}.w3"], params[f"{prefix}.b3"]).relu(),
               params[f"{prefix}.w4"], params[f"{prefix}.b4"])
    v = layer_norm(h + dropout(u, cfg.dropout_p, rng, train_mode),
                   params[f"{prefix}.ln1_g"], params[f"{prefix}.ln1_b"], cfg.ln_epsilon)
    agg = Tensor(aggregation_matrix(neighbors, h.data.dtype)).matmul(v)
    w = linear(agg, params[f"{prefix}.w5"], params[f"{prefix}.b5"]).relu()
    return layer_norm(dropout(w, cfg.dropout_p, rng, train_mode) + v,
                      params[f"{prefix}.ln2_g"], params[f"{prefix}.ln2_b"], cfg.ln_epsilon)


def run_dge_stack(
    h: Tensor,
    neighbors: Sequence[Sequence[int]],
    params: ParamStore,
    graph: str,
    cfg: ModelConfig,
    train_mode: bool = False,
    rng: np.random.Generator | None = None,
) -> Tensor:
    for k in range(cfg.layers):
        h = dge_layer_forward(h, neighbors, params, f"dge.{graph}.{k}", cfg, train_mode, rng)
    return h


def fuse_graphs(h_coref: Tensor, h_rst: Tensor, params: ParamStore) -> Tensor:
    return linear(concat([h_coref, h_rst], axis=1), params["fuse.w6"], params["fuse.b6"]).relu()


def predict_scores(h_final: Tensor, params: ParamStore) -> Tensor:
    """Per-EDU selection probabilities in (0, 1), shape (n,)."""
    return linear(h_final, params["cls.w7"], params["cls.b7"]).sigmoid().reshape(-1)


BCE_EPS = 1e-7


def bce_loss(y_hat: Tensor, labels: Sequence[int] | np.ndarray) -> Tensor:
    """Summed binary cross-entropy; predictions clamped away from {0, 1}."""
    y = np.asarray(labels, dtype=y_hat.data.dtype)
    p = y_hat.clip(BCE_EPS, 1.0 - BCE_EPS)
    terms = p.log() * Tensor(y) + (1.0 - p).log() * Tensor(1.0 - y)
    return -terms.sum()


# -- whole-document forward --


def document_views(doc: Document, cfg: ModelConfig) -> dict[str, list[list[int]]]:
    """Neighbor lists per enabled graph, built from the document's tree and
    coreference clusters."""
    views: dict[str, list[list[int]]] = {}
    enabled = cfg.enabled_graphs()
    if not enabled:
        return views
    g_rst, g_coref = document_graphs(doc)
    if "coref" in enabled:
        views["coref"] = message_view(g_coref)
    if "rst" in enabled:
        views["rst"] = message_view(g_rst, directed_messages=cfg.rst_directed_messages)
    return views


def forward_document(
    doc: Document,
    views: dict[str, list[list[int]]],
    params: ParamStore,
    cfg: ModelConfig,
    vocab: Vocab,
    train_mode: bool = False,
    rng: np.random.Generator | None = None,
) -> Tensor:
    """Score every EDU of one document; returns a (n,) tensor of probabilities."""
    h_tokens = embed_tokens(doc, params, vocab)
    edu_vecs = [
        span_extract(h_tokens.slice_rows(span.start, span.end), params) for span in doc.edus
    ]
    h_s = concat(edu_vecs, axis=0)

    enabled = cfg.enabled_graphs()
    if not enabled:
        h_final = h_s
    elif len(enabled) == 1:
        h_final = run_dge_stack(h_s, views[enabled[0]], params, enabled[0], cfg, train_mode, rng)
    else:
        h_c = run_dge_stack(h_s, views["coref"], params, "coref", cfg, train_mode, rng)
        h_r = run_dge_stack(h_s, views["rst"], params, "rst", cfg, train_mode, rng)
        h_final = fuse_graphs(h_c, h_r, params)
    return predict_scores(h_final, params)


# -- checkpoints --

CHECKPOINT_FORMAT = 1


def save_checkpoint(path: str | Path, params: ParamStore, cfg: ModelConfig, vocab: Vocab) -> None:
    blob = {
        "format": CHECKPOINT_FORMAT,
        "config": asdict(cfg),
        "params": {
            name: {"shape": list(t.data.shape), "data": [float(x) for x in t.data.ravel()]}
            for name, t in params.tensors.items()
        },
        "vocab": list(vocab.tokens),
    }
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump(blob, fh, sort_keys=True)
        fh.write("\n")


def load_checkpoint(path: str | Path) -> tuple[ParamStore, ModelConfig, Vocab]:
    with Path(path).open("r", encoding="utf-8") as fh:
        blob = json.load(fh)
    if blob.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"unsupported checkpoint format: {blob.get('format')!r}")
    cfg = ModelConfig(**blob["config"])
    params = ParamStore()
    for name, entry in blob["params"].items():
        arr = np.asarray(entry["data"], dtype=cfg.np_dtype).reshape(entry["shape"])
        params.add(name, arr)
    vocab = Vocab(blob["vocab"])
    return params, cfg, vocab
