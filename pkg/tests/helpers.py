"""Shared fixtures and random generators for the test suite."""
from __future__ import annotations

import numpy as np

from edusum.corpus import Cluster, Document, EduSpan
from edusum.rst import DependencyTree, Leaf, Node, RstTree, format_rst_sexpr

RELATIONS = ("elaboration", "attribution", "joint", "contrast", "background")
WORD_POOL = (
    "report city plan storm river bridge market garden window music paper "
    "meeting harbor light street signal farmer doctor engine valley"
).split()


# -- the five-EDU worked fixture --
#
# One sentence, five units.  Satellites: 0 and 3; nuclei: 1, 2, 4.
# Expected heads: whole span -> 1, span 2..4 -> 2.
# Expected dependency map {0->1, 3->4, 4->2, 2->1}, root 1.

FIG_TREE = (
    "(S/N circumstance (leaf 0) "
    "(N/S elaboration (leaf 1) "
    "(N/S elaboration (leaf 2) "
    "(S/N attribution (leaf 3) (leaf 4)))))"
)

FIG_EDU_TOKENS = [
    "after months of delay ,".split(),
    "the council approved the harbor bridge plan".split(),
    "which sets the plan 's budget".split(),
    "reviewed by outside engineers ,".split(),
    "and funding three new ramps .".split(),
]


def fig_document(reference: list[str] | None = None) -> Document:
    tokens: list[str] = []
    edus: list[EduSpan] = []
    for toks in FIG_EDU_TOKENS:
        edus.append(EduSpan(len(tokens), len(tokens) + len(toks), 0))
        tokens.extend(toks)
    # "the harbor bridge plan" (EDU 1) corefers with "the plan" (EDU 2)
    clusters = (Cluster(((8, 12), (14, 16))),)
    if reference is None:
        reference = "funding three new ramps .".split()
    return Document(
        id="fig",
        tokens=tuple(tokens),
        sentences=((0, len(tokens)),),
        edus=tuple(edus),
        rst_tree=FIG_TREE,
        coref_clusters=clusters,
        reference=tuple(reference),
    )


FIG_HEADS = (1, None, 1, 4, 2)
FIG_ROOT = 1
FIG_RST_EDGES = {(1, 0), (1, 2), (2, 4), (4, 3)}


# -- random structure generators --


def random_rst_tree(rng: np.random.Generator, n: int, p_nn: float = 0.4) -> RstTree:
    """Random binary tree over leaves 0..n-1 with random nuclearity."""

    def build(lo: int, hi: int) -> RstTree:
        if hi - lo == 1:
            return Leaf(lo)
        split = lo + 1 + int(rng.integers(hi - lo - 1))
        if rng.random() < p_nn:
            left_nuc = right_nuc = "N"
        else:
            left_nuc, right_nuc = ("N", "S") if rng.random() < 0.5 else ("S", "N")
        rel = RELATIONS[int(rng.integers(len(RELATIONS)))]
        return Node(build(lo, split), build(split, hi), left_nuc, right_nuc, rel)

    return build(0, n)


def random_document(
    rng: np.random.Generator,
    n_edus: int,
    doc_id: str = "doc",
    subject_rate: float = 0.0,
    max_clusters: int = 3,
    reference_len: int = 6,
) -> Document:
    """A structurally valid document with random tree, clusters and tokens.

    ``subject_rate`` > 0 marks random EDUs as subject-bearing, which can break
    nucleus-nucleus dependency edges and yield multi-root forests.
    """
    tokens: list[str] = []
    edus: list[EduSpan] = []
    lengths = [1 + int(rng.integers(4)) for _ in range(n_edus)]

    # group consecutive EDUs into sentences of 1..3
    sent_of_edu: list[int] = []
    sent_index = 0
    left_in_sentence = 1 + int(rng.integers(3))
    for _ in range(n_edus):
        if left_in_sentence == 0:
            sent_index += 1
            left_in_sentence = 1 + int(rng.integers(3))
        sent_of_edu.append(sent_index)
        left_in_sentence -= 1

    for k, length in enumerate(lengths):
        words = [WORD_POOL[int(rng.integers(len(WORD_POOL)))] for _ in range(length)]
        edus.append(
            EduSpan(
                len(tokens),
                len(tokens) + length,
                sent_of_edu[k],
                has_subject=bool(rng.random() < subject_rate),
            )
        )
        tokens.extend(words)

    sentences: list[tuple[int, int]] = []
    for k, span in enumerate(edus):
        if sent_of_edu[k] == len(sentences):
            sentences.append((span.start, span.end))
        else:
            sentences[-1] = (sentences[-1][0], span.end)

    clusters: list[Cluster] = []
    for _ in range(int(rng.integers(max_clusters + 1))):
        size = 2 + int(rng.integers(3))
        hosts = rng.choice(n_edus, size=min(size, n_edus), replace=False)
        mentions = tuple((edus[int(h)].start, edus[int(h)].start + 1) for h in hosts)
        clusters.append(Cluster(mentions))

    reference = tuple(
        WORD_POOL[int(rng.integers(len(WORD_POOL)))] for _ in range(reference_len)
    )
    return Document(
        id=doc_id,
        tokens=tuple(tokens),
        sentences=tuple(sentences),
        edus=tuple(edus),
        rst_tree=format_rst_sexpr(random_rst_tree(rng, n_edus)),
        coref_clusters=tuple(clusters),
        reference=reference,
    )


# Hand-derived overlap fixtures: (variant, candidate, reference, P, R, F1).
# Variant is the n-gram order or "L" for longest common subsequence.
ROUGE_CASES = [
    (1, "the cat sat", "the cat sat", 1.0, 1.0, 1.0),
    (1, "a b c", "d e f", 0.0, 0.0, 0.0),
    (1, "the cat sat", "the cat ate fish", 2 / 3, 1 / 2, 4 / 7),
    (1, "a a a", "a a", 2 / 3, 1.0, 4 / 5),
    (1, "a a", "a a a", 1.0, 2 / 3, 4 / 5),
    (1, "a b a", "b a b", 2 / 3, 2 / 3, 2 / 3),
    (1, "x", "x", 1.0, 1.0, 1.0),
    (1, "x", "y", 0.0, 0.0, 0.0),
    (1, "", "a b", 0.0, 0.0, 0.0),
    (1, "a b", "", 0.0, 0.0, 0.0),
    (2, "the cat sat", "the cat sat", 1.0, 1.0, 1.0),
    (2, "the cat sat on", "the cat ate", 1 / 3, 1 / 2, 2 / 5),
    (2, "a", "a b", 0.0, 0.0, 0.0),
    (2, "a b a b", "a b a", 2 / 3, 1.0, 4 / 5),
    (2, "b c d", "a b c d e", 1.0, 1 / 2, 2 / 3),
    ("L", "a b c", "a b c", 1.0, 1.0, 1.0),
    ("L", "a b c d", "a c b d", 3 / 4, 3 / 4, 3 / 4),
    ("L", "", "a", 0.0, 0.0, 0.0),
    ("L", "a x b y c", "a b c", 3 / 5, 1.0, 3 / 4),
    ("L", "c b a", "a b c", 1 / 3, 1 / 3, 1 / 3),
]


def rouge_case_score(variant, candidate: list[str], reference: list[str]):
    from edusum.metrics import rouge_l, rouge_n

    if variant == "L":
        return rouge_l(candidate, reference)
    return rouge_n(candidate, reference, variant)


def naive_closure(selected: set[int], dep: DependencyTree) -> set[int]:
    """Repeated one-step head expansion until fixpoint."""
    out = set(selected)
    while True:
        grown = out | {dep.heads[i] for i in out if dep.heads[i] is not None}
        if grown == out:
            return out
        out = grown


# -- synthetic training corpora --

MARKER = "keystone"
SEED_MARKER = "hubword"
FILLER_POOL = tuple(w for w in WORD_POOL if w not in (MARKER, SEED_MARKER))


def _flat_tree(n: int) -> str:
    """Left-branching all-nucleus chain; with subject-bearing EDUs it adds no
    dependency edges at all."""
    if n == 1:
        return "(leaf 0)"
    leaves = " ".join(f"(leaf {i})" for i in range(n))
    return f"(N/N joint {leaves})"


def _one_edu_per_sentence_doc(
    doc_id: str,
    edu_token_lists: list[list[str]],
    clusters: tuple[Cluster, ...],
    reference: tuple[str, ...],
) -> Document:
    tokens: list[str] = []
    edus: list[EduSpan] = []
    sentences: list[tuple[int, int]] = []
    for k, toks in enumerate(edu_token_lists):
        start = len(tokens)
        tokens.extend(toks)
        edus.append(EduSpan(start, len(tokens), k, has_subject=True))
        sentences.append((start, len(tokens)))
    return Document(
        id=doc_id,
        tokens=tuple(tokens),
        sentences=tuple(sentences),
        edus=tuple(edus),
        rst_tree=_flat_tree(len(edus)),
        coref_clusters=clusters,
        reference=reference,
    )


def marker_corpus(
    rng: np.random.Generator,
    n_docs: int,
    n_edus: int = 8,
    n_pos: int = 3,
    edu_len: int = 4,
    prefix: str = "m",
) -> tuple[list[Document], list[list[int]]]:
    """Separable corpus: an EDU is positive iff it contains the marker token.

    Every EDU is its own sentence ending in a period, and the reference is the
    exact concatenation of the positive EDUs, so a perfect selection renders
    to F1 = 1.
    """
    docs: list[Document] = []
    labels: list[list[int]] = []
    for d in range(n_docs):
        pos = set(int(i) for i in rng.choice(n_edus, size=n_pos, replace=False))
        edu_tokens: list[list[str]] = []
        for k in range(n_edus):
            words = [FILLER_POOL[int(rng.integers(len(FILLER_POOL)))] for _ in range(edu_len - 1)]
            if k in pos:
                words[1] = MARKER
            edu_tokens.append(words + ["."])
        reference = tuple(t for k in sorted(pos) for t in edu_tokens[k])
        docs.append(_one_edu_per_sentence_doc(f"{prefix}{d}", edu_tokens, (), reference))
        labels.append([1 if k in pos else 0 for k in range(n_edus)])
    return docs, labels


def coref_link_corpus(
    rng: np.random.Generator,
    n_docs: int,
    n_edus: int = 8,
    n_linked: int = 3,
    edu_len: int = 4,
    prefix: str = "c",
) -> tuple[list[Document], list[list[int]]]:
    """Corpus where labels are visible only through the coreference graph.

    EDU 0 carries a distinctive seed token.  Every other EDU contains the
    pronoun 'it' in its mention slot, but only a random subset is actually
    linked to the seed's cluster; exactly those EDUs (plus the seed) are
    positive.  Token distributions of linked and unlinked EDUs are identical,
    so a graph-free model cannot separate them.
    """
    docs: list[Document] = []
    labels: list[list[int]] = []
    for d in range(n_docs):
        linked = set(int(i) for i in rng.choice(np.arange(1, n_edus), size=n_linked, replace=False))
        edu_tokens: list[list[str]] = []
        for k in range(n_edus):
            words = [FILLER_POOL[int(rng.integers(len(FILLER_POOL)))] for _ in range(edu_len - 1)]
            words[1] = SEED_MARKER if k == 0 else "it"
            edu_tokens.append(words + ["."])
        doc = _one_edu_per_sentence_doc(f"{prefix}{d}", edu_tokens, (), ())
        mention_slot = lambda k: (doc.edus[k].start + 1, doc.edus[k].start + 2)
        cluster = Cluster(tuple(mention_slot(k) for k in [0] + sorted(linked)))
        positives = {0} | linked
        reference = tuple(t for k in sorted(positives) for t in edu_tokens[k])
        docs.append(
            Document(
                id=doc.id,
                tokens=doc.tokens,
                sentences=doc.sentences,
                edus=doc.edus,
                rst_tree=doc.rst_tree,
                coref_clusters=(cluster,),
                reference=reference,
            )
        )
        labels.append([1 if k in positives else 0 for k in range(n_edus)])
    return docs, labels
