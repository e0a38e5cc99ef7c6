"""Minibatch training loop with Adam and bigram-F1 model selection.

All randomness (parameter init, shuffling, dropout) flows from the single
seed in the model config, so a rerun with identical inputs reproduces the
loss curve and the checkpoint bit for bit.  When a dev split is given, the
parameters kept are those of the step with the best mean bigram F1 of the
rendered dev summaries.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..corpus import Document
from ..metrics import rouge_n
from ..rst import parse_rst_sexpr, to_dependency
from ..select import SelectionBudget, select_summary
from .model import (
    ModelConfig,
    ParamStore,
    Vocab,
    bce_loss,
    document_views,
    forward_document,
    init_params,
)
from .optim import AdamState, adam_step


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class TrainResult:
    params: ParamStore
    vocab: Vocab
    config: ModelConfig
    log: list[dict] = field(default_factory=list)
    best_step: int | None = None
    best_dev_r2: float | None = None


def _prepared(docs: Sequence[Document], cfg: ModelConfig):
    return [document_views(doc, cfg) for doc in docs]


def evaluate_dev(
    docs: Sequence[Document],
    params: ParamStore,
    cfg: ModelConfig,
    vocab: Vocab,
    budget: SelectionBudget,
    views: Sequence[dict] | None = None,
) -> float:
    """Mean bigram F1 of rendered summaries against references."""
    if views is None:
        views = _prepared(docs, cfg)
    total = 0.0
    for doc, view in zip(docs, views):
        scores = forward_document(doc, view, params, cfg, vocab).data
        dep = to_dependency(parse_rst_sexpr(doc.rst_tree), doc.edus)
        sel = select_summary(scores, dep, budget, doc)
        total += rouge_n([t.lower() for t in sel.rendered], doc.reference, 2).f1
    return total / len(docs) if docs else 0.0


def train(
    docs: Sequence[Document],
    labels: Sequence[Sequence[int]],
    cfg: ModelConfig,
    dev_docs: Sequence[Document] | None = None,
    steps: int = 500,
    batch_size: int = 8,
    lr: float = 5e-3,
    eval_every: int = 50,
    budget: SelectionBudget = SelectionBudget(),
    embed_table: np.ndarray | None = None,
    vocab: Vocab | None = None,
) -> TrainResult:
    """Train on precomputed per-EDU labels; returns the selected parameters.

    ``embed_table``/``vocab`` install fixed file-loaded vectors; by default a
    trainable lookup table over the corpus vocabulary is used.
    """
    if len(docs) != len(labels):
        raise ValueError("one label sequence per document required")
    for doc, ys in zip(docs, labels):
        if len(ys) != doc.n_edus:
            raise ValueError(f"document '{doc.id}': {len(ys)} labels for {doc.n_edus} EDUs")

    rng = np.random.default_rng(cfg.seed)
    if vocab is None:
        vocab = Vocab.from_corpus(docs)
    params = init_params(cfg, len(vocab), rng, embed_table=embed_table)
    state = AdamState()
    views = _prepared(docs, cfg)
    label_arrays = [np.asarray(ys, dtype=cfg.np_dtype) for ys in labels]

    dev_views = _prepared(dev_docs, cfg) if dev_docs else None
    result = TrainResult(params=params, vocab=vocab, config=cfg)
    best_values: dict[str, np.ndarray] | None = None

    order: list[int] = []
    for step in range(1, steps + 1):
        batch: list[int] = []
        while len(batch) < min(batch_size, len(docs)):
            if not order:
                order = list(rng.permutation(len(docs)))
            batch.append(order.pop())

        params.zero_grads()
        batch_loss = 0.0
        for i in batch:
            scores = forward_document(docs[i], views[i], params, cfg, vocab,
                                      train_mode=True, rng=rng)
            loss = bce_loss(scores, label_arrays[i]) * (1.0 / len(batch))
            loss.backward()
            batch_loss += float(loss.data)
        if not np.isfinite(batch_loss):
            raise TrainingDiverged(f"loss is not finite at step {step}: {batch_loss}")

        grads = {name: t.grad for name, t in params.trainable() if t.grad is not None}
        adam_step(params, grads, state, lr)
        result.log.append({"step": step, "loss": batch_loss})

        if dev_docs and (step % eval_every == 0 or step == steps):
            dev_r2 = evaluate_dev(dev_docs, params, cfg, vocab, budget, dev_views)
            result.log.append({"step": step, "dev_r2": dev_r2})
            if result.best_dev_r2 is None or dev_r2 > result.best_dev_r2:
                result.best_dev_r2 = dev_r2
                result.best_step = step
                best_values = params.copy_values()

    if best_values is not None:
        params.load_values(best_values)
    return result
