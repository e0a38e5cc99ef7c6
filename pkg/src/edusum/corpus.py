"""Data model and JSONL ingestion for pre-segmented, pre-parsed documents.

A document arrives fully preprocessed: tokenized (lowercase), split into
sentences and elementary discourse units (EDUs), with a serialized discourse
constituency tree and coreference clusters attached.  This module only
validates and carries that structure; it never runs a segmenter, parser or
coreference resolver itself.

All spans are half-open token-index ranges ``[start, end)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence


class CorpusError(Exception):
    """Malformed corpus file or schema violation, with line context."""


@dataclass(frozen=True)
class EduSpan:
    """One elementary discourse unit: a contiguous token span inside a sentence.

    ``has_subject`` records whether the unit contains a grammatical subject;
    it gates one of the tree-conversion rules and defaults to False, which
    keeps converted dependency structures fully connected.
    """

    start: int
    end: int
    sentence_index: int
    has_subject: bool = False

    def __len__(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class Cluster:
    """A coreference cluster: token spans of all mentions of one entity."""

    mentions: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class Document:
    id: str
    tokens: tuple[str, ...]
    sentences: tuple[tuple[int, int], ...]
    edus: tuple[EduSpan, ...]
    rst_tree: str
    coref_clusters: tuple[Cluster, ...]
    reference: tuple[str, ...]

    @property
    def n_edus(self) -> int:
        return len(self.edus)

    def edu_tokens(self, index: int) -> tuple[str, ...]:
        span = self.edus[index]
        return self.tokens[span.start : span.end]


def edu_hosting(doc_edus: Sequence[EduSpan], start: int, end: int) -> int | None:
    """Index of the EDU fully containing ``[start, end)``, or None."""
    for k, span in enumerate(doc_edus):
        if span.start <= start and end <= span.end:
            return k
    return None


def validate_document(doc: Document) -> list[str]:
    """Return every violated structural invariant; empty list iff valid."""
    violations: list[str] = []
    n_tok = len(doc.tokens)

    for k, tok in enumerate(doc.tokens):
        if not tok:
            violations.append(f"token {k} is empty")

    prev_end = 0
    for k, span in enumerate(doc.edus):
        if span.start >= span.end:
            violations.append(f"edu {k} is empty (start {span.start} >= end {span.end})")
        if span.start < prev_end:
            violations.append(f"edus overlap at index {k}")
        elif span.start > prev_end:
            violations.append(f"edus gap at index {k}")
        prev_end = max(prev_end, span.end)
    if doc.edus and doc.edus[-1].end != n_tok:
        violations.append(
            f"edus cover {doc.edus[-1].end} of {n_tok} tokens"
        )
    if not doc.edus and n_tok:
        violations.append("document has tokens but no edus")

    prev = 0
    for k, (s, e) in enumerate(doc.sentences):
        if not (0 <= s < e <= n_tok):
            violations.append(f"sentence {k} range ({s},{e}) out of bounds")
        if s < prev:
            violations.append(f"sentence {k} overlaps previous")
        prev = max(prev, e)

    for k, span in enumerate(doc.edus):
        if not (0 <= span.sentence_index < len(doc.sentences)):
            violations.append(f"edu {k} sentence_index {span.sentence_index} out of range")
            continue
        ss, se = doc.sentences[span.sentence_index]
        if not (ss <= span.start and span.end <= se):
            violations.append(f"edu {k} crosses its sentence range")

    # Tree must parse and carry one leaf per EDU.
    from . import rst

    try:
        tree = rst.parse_rst_sexpr(doc.rst_tree)
    except rst.RstParseError as err:
        violations.append(f"rst_tree: {err}")
    else:
        n_leaves = rst.leaf_count(tree)
        if n_leaves != len(doc.edus):
            violations.append(
                f"leaf/EDU count mismatch: tree has {n_leaves} leaves, document has {len(doc.edus)} edus"
            )

    for c, cluster in enumerate(doc.coref_clusters):
        if not cluster.mentions:
            violations.append(f"cluster {c} has no mentions")
        for s, e in cluster.mentions:
            if not (0 <= s < e <= n_tok):
                violations.append(f"cluster {c} mention ({s},{e}) out of bounds")
            elif edu_hosting(doc.edus, s, e) is None:
                violations.append(f"cluster {c} mention ({s},{e}) crosses an EDU boundary")

    return violations


_REQUIRED_FIELDS = ("id", "tokens", "sentences", "edus", "rst_tree", "coref", "reference")


def _document_from_json(obj: dict, where: str) -> Document:
    if not isinstance(obj, dict):
        raise CorpusError(f"{where}: expected a JSON object")
    for name in _REQUIRED_FIELDS:
        if name not in obj:
            raise CorpusError(f"{where}: missing field '{name}'")

    def fail(fieldname: str, why: str):
        raise CorpusError(f"{where}: field '{fieldname}' {why}")

    if not isinstance(obj["id"], str):
        fail("id", "must be a string")
    tokens = obj["tokens"]
    if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
        fail("tokens", "must be a list of strings")
    sentences = obj["sentences"]
    if not isinstance(sentences, list):
        fail("sentences", "must be a list of [start, end] pairs")
    sent_ranges: list[tuple[int, int]] = []
    for k, pair in enumerate(sentences):
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(v, int) for v in pair)
        ):
            fail(f"sentences[{k}]", "must be an [int, int] pair")
        sent_ranges.append((pair[0], pair[1]))

    edus: list[EduSpan] = []
    if not isinstance(obj["edus"], list):
        fail("edus", "must be a list")
    for k, e in enumerate(obj["edus"]):
        if not isinstance(e, dict):
            fail(f"edus[{k}]", "must be an object")
        for key in ("start", "end", "sent"):
            if key not in e or not isinstance(e[key], int):
                fail(f"edus[{k}].{key}", "must be an integer")
        has_subject = e.get("has_subject", False)
        if not isinstance(has_subject, bool):
            fail(f"edus[{k}].has_subject", "must be a boolean")
        edus.append(EduSpan(e["start"], e["end"], e["sent"], has_subject))

    if not isinstance(obj["rst_tree"], str):
        fail("rst_tree", "must be a string")

    clusters: list[Cluster] = []
    if not isinstance(obj["coref"], list):
        fail("coref", "must be a list of clusters")
    for c, cl in enumerate(obj["coref"]):
        if not isinstance(cl, list):
            fail(f"coref[{c}]", "must be a list of [start, end] mentions")
        mentions: list[tuple[int, int]] = []
        for m, pair in enumerate(cl):
            if (
                not isinstance(pair, list)
                or len(pair) != 2
                or not all(isinstance(v, int) for v in pair)
            ):
                fail(f"coref[{c}][{m}]", "must be an [int, int] pair")
            mentions.append((pair[0], pair[1]))
        clusters.append(Cluster(tuple(mentions)))

    reference = obj["reference"]
    if not isinstance(reference, list) or not all(isinstance(t, str) for t in reference):
        fail("reference", "must be a list of strings")

    return Document(
        id=obj["id"],
        tokens=tuple(tokens),
        sentences=tuple(sent_ranges),
        edus=tuple(edus),
        rst_tree=obj["rst_tree"],
        coref_clusters=tuple(clusters),
        reference=tuple(reference),
    )


def document_to_json(doc: Document) -> dict:
    """Inverse of the loader: a dict that reparses to an equal Document."""
    return {
        "id": doc.id,
        "tokens": list(doc.tokens),
        "sentences": [[s, e] for s, e in doc.sentences],
        "edus": [
            {"start": e.start, "end": e.end, "sent": e.sentence_index, "has_subject": e.has_subject}
            for e in doc.edus
        ],
        "rst_tree": doc.rst_tree,
        "coref": [[[s, e] for s, e in c.mentions] for c in doc.coref_clusters],
        "reference": list(doc.reference),
    }


def load_corpus(path: str | Path, max_tokens: int | None = None) -> list[Document]:
    """Load a JSONL corpus, validating every document.

    Raises CorpusError naming the offending line for malformed JSON, schema
    violations and structural-invariant violations.  When ``max_tokens`` is
    set, documents longer than the cap are truncated by dropping trailing
    EDUs whole (the discourse tree is pruned to match).
    """
    path = Path(path)
    docs: list[Document] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as err:
                raise CorpusError(f"line {lineno}: invalid JSON: {err.msg}") from err
            doc = _document_from_json(obj, where=f"line {lineno}")
            violations = validate_document(doc)
            if violations:
                raise CorpusError(f"line {lineno}: " + "; ".join(violations))
            if max_tokens is not None and len(doc.tokens) > max_tokens:
                doc = truncate_document(doc, max_tokens)
            docs.append(doc)
    return docs


def save_corpus(docs: Iterable[Document], path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(document_to_json(doc), sort_keys=True) + "\n")


def truncate_document(doc: Document, max_tokens: int) -> Document:
    """Drop trailing EDUs whole until the document fits in ``max_tokens``.

    The discourse tree is pruned to the surviving leaves, sentence ranges are
    clamped, and coreference mentions falling past the cut are discarded.
    """
    from . import rst

    keep = 0
    for span in doc.edus:
        if span.end <= max_tokens:
            keep += 1
        else:
            break
    if keep == 0:
        raise CorpusError(f"document '{doc.id}': first EDU alone exceeds max_tokens={max_tokens}")
    if keep == len(doc.edus):
        return doc

    cut = doc.edus[keep - 1].end
    tree = rst.parse_rst_sexpr(doc.rst_tree)
    pruned = rst.prune_to_leaves(tree, keep)
    sentences = tuple(
        (s, min(e, cut)) for s, e in doc.sentences if s < cut
    )
    clusters = []
    for cluster in doc.coref_clusters:
        mentions = tuple(m for m in cluster.mentions if m[1] <= cut)
        if mentions:
            clusters.append(Cluster(mentions))
    return Document(
        id=doc.id,
        tokens=doc.tokens[:cut],
        sentences=sentences,
        edus=doc.edus[:keep],
        rst_tree=rst.format_rst_sexpr(pruned),
        coref_clusters=tuple(clusters),
        reference=doc.reference,
    )
