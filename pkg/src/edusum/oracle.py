"""Greedy EDU-level training labels under dependency closure.

Extraction targets are built per document by greedily growing a selection:
each step adds the unselected EDU (together with its head-chain ancestors)
whose inclusion yields the largest strictly positive unigram-F1 gain against
the reference, and stops when no candidate improves the score.  Candidate
cost counts the whole closure, so a deeply nested satellite competes fairly
against a root-level nucleus.  Ties break toward the lowest EDU index.
"""
from __future__ import annotations

from dataclasses import dataclass

from .corpus import Document
from .metrics import rouge_n
from .rst import DependencyTree, dependency_closure


@dataclass(frozen=True)
class OracleLabels:
    labels: tuple[int, ...]
    achieved_r1: float

    @property
    def positives(self) -> tuple[int, ...]:
        return tuple(i for i, y in enumerate(self.labels) if y)


def render_selection(doc: Document, selected) -> list[str]:
    """Concatenate the selected EDUs' tokens in document order, unmodified."""
    out: list[str] = []
    for i in sorted(selected):
        out.extend(doc.edu_tokens(i))
    return out


def make_oracle_labels(doc: Document, dep: DependencyTree) -> OracleLabels:
    """Greedy closure-aware label construction maximizing unigram F1."""
    if not doc.reference:
        raise ValueError(f"document '{doc.id}' has an empty reference summary")
    n = doc.n_edus
    selected: set[int] = set()
    best_f1 = 0.0
    while True:
        best_gain = 0.0
        best_candidate: int | None = None
        best_trial: set[int] = set()
        best_trial_f1 = best_f1
        for i in range(n):
            if i in selected:
                continue
            trial = selected | dependency_closure({i}, dep)
            f1 = rouge_n(render_selection(doc, trial), doc.reference, 1).f1
            gain = f1 - best_f1
            if gain > best_gain:
                best_gain = gain
                best_candidate = i
                best_trial = trial
                best_trial_f1 = f1
        if best_candidate is None:
            break
        selected = best_trial
        best_f1 = best_trial_f1
    labels = tuple(1 if i in selected else 0 for i in range(n))
    return OracleLabels(labels=labels, achieved_r1=best_f1)
