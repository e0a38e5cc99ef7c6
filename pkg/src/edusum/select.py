"""Inference-time EDU selection under dependency closure and length budgets,
plus summary rendering and the leading-sentences baseline.

Candidates are visited in descending score order; accepting one pulls in its
whole head-chain, and a candidate whose closure would overflow the budget is
skipped outright rather than truncated (partial closures defeat the
grammaticality constraint the closure exists for).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import Document
from .rst import DependencyTree, dependency_closure

LEADING_CONNECTIVES = ("and", "but", "or")
TERMINAL_PUNCT = ".!?"


@dataclass(frozen=True)
class SelectionBudget:
    max_edus: int | None = 6
    max_tokens: int | None = None


@dataclass(frozen=True)
class Selection:
    edus: tuple[int, ...]  # document order
    forced: frozenset[int]  # members pulled in by closure, not by score
    rendered: tuple[str, ...]


def render_summary(doc: Document, selected: Sequence[int]) -> list[str]:
    """Selected EDU tokens in document order, lightly post-processed.

    EDUs from the same source sentence form one rendered sentence: a leading
    connective is dropped when an EDU opens a rendered sentence, the first
    token is capitalized, and a period is appended when the sentence-final
    run lacks terminal punctuation.
    """
    ordered = sorted(set(selected))
    groups: list[list[int]] = []
    for i in ordered:
        sent = doc.edus[i].sentence_index
        if groups and doc.edus[groups[-1][-1]].sentence_index == sent:
            groups[-1].append(i)
        else:
            groups.append([i])

    out: list[str] = []
    for group in groups:
        tokens: list[str] = []
        for i in group:
            tokens.extend(doc.edu_tokens(i))
        if len(tokens) > 1 and tokens[0] in LEADING_CONNECTIVES:
            tokens = tokens[1:]
        if tokens:
            tokens[0] = tokens[0][0].upper() + tokens[0][1:]
            if tokens[-1][-1] not in TERMINAL_PUNCT:
                tokens.append(".")
        out.extend(tokens)
    return out


def select_summary(
    scores: Sequence[float] | np.ndarray,
    dep: DependencyTree,
    budget: SelectionBudget,
    doc: Document | None = None,
) -> Selection:
    """Greedy descending-score selection with closure enforcement.

    ``doc`` is required when a token budget is set (the check measures the
    rendered output) and for filling ``rendered``; without it the rendered
    field is left empty.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.shape != (dep.n,):
        raise ValueError(f"scores shape {scores.shape} does not match {dep.n} EDUs")
    if budget.max_tokens is not None and doc is None:
        raise ValueError("token budget requires the document")

    # Stable order: descending score, ties toward the lower index.
    order = sorted(range(dep.n), key=lambda i: (-scores[i], i))
    selected: set[int] = set()
    forced: set[int] = set()
    for cand in order:
        if cand in selected:
            continue
        if budget.max_edus is not None and len(selected) >= budget.max_edus:
            break
        increment = dependency_closure({cand}, dep) - selected
        trial = selected | increment
        if budget.max_edus is not None and len(trial) > budget.max_edus:
            continue
        if budget.max_tokens is not None:
            if len(render_summary(doc, trial)) > budget.max_tokens:
                continue
        selected = trial
        forced |= increment - {cand}

    ordered = tuple(sorted(selected))
    rendered = tuple(render_summary(doc, ordered)) if doc is not None else ()
    return Selection(edus=ordered, forced=frozenset(forced), rendered=rendered)


def lead3(doc: Document) -> Selection:
    """Baseline: every EDU of the first three sentences, in order.

    Ignores discourse structure, so no closure is applied.
    """
    picked = tuple(i for i, span in enumerate(doc.edus) if span.sentence_index < 3)
    return Selection(
        edus=picked,
        forced=frozenset(),
        rendered=tuple(render_summary(doc, picked)),
    )
