"""Token-level ROUGE: clipped n-gram overlap and longest common subsequence.

No stemming or stopword filtering; candidates and references are flat
lowercase token sequences (the summary is scored as one sequence, not per
sentence).  This keeps oracle construction deterministic and reproducible.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float
    overlap: int  # matched n-grams, or LCS length


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: Sequence[str], reference: Sequence[str], n: int) -> RougeScore:
    """Clipped n-gram overlap: each reference n-gram is credited at most its
    reference multiplicity."""
    cand = _ngrams(candidate, n)
    ref = _ngrams(reference, n)
    cand_total = sum(cand.values())
    ref_total = sum(ref.values())
    if cand_total == 0 or ref_total == 0:
        return RougeScore(0.0, 0.0, 0.0, 0)
    overlap = sum(min(count, ref[gram]) for gram, count in cand.items())
    p = overlap / cand_total
    r = overlap / ref_total
    return RougeScore(p, r, _f1(p, r), overlap)


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Dynamic-programming LCS over token sequences."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> RougeScore:
    """LCS-based score over the full flat sequences."""
    if not candidate or not reference:
        return RougeScore(0.0, 0.0, 0.0, 0)
    ell = lcs_length(candidate, reference)
    p = ell / len(candidate)
    r = ell / len(reference)
    return RougeScore(p, r, _f1(p, r), ell)
