"""Discourse graphs over EDUs: head-dependency edges and coreference cliques.

Two adjacency conventions, fixed here once:

* dependency graph -- directed, entry[i][j] = 1 iff EDU i is the head of
  EDU j; the diagonal is all zero.
* coreference graph -- symmetric; every pair of EDUs hosting mentions of a
  common cluster is connected both ways, and every node carries a self-loop.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import Cluster, Document, EduSpan, edu_hosting
from .rst import DependencyTree, parse_rst_sexpr, to_dependency


@dataclass(frozen=True)
class AdjacencyMatrix:
    n: int
    entries: np.ndarray  # (n, n) uint8
    directed: bool

    def edge_count(self) -> int:
        """Directed graphs: number of arcs. Undirected: pairs, self-loops excluded."""
        total = int(self.entries.sum())
        if self.directed:
            return total
        loops = int(np.trace(self.entries))
        return (total - loops) // 2


def build_rst_graph(dep: DependencyTree) -> AdjacencyMatrix:
    """Directed head-to-dependent adjacency; edge count is n minus root count."""
    n = dep.n
    entries = np.zeros((n, n), dtype=np.uint8)
    for j, head in enumerate(dep.heads):
        if head is not None:
            entries[head, j] = 1
    return AdjacencyMatrix(n=n, entries=entries, directed=True)


def build_coref_graph(clusters: Sequence[Cluster], edus: Sequence[EduSpan]) -> AdjacencyMatrix:
    """Connect all EDUs sharing a coreference cluster; self-loops everywhere.

    Mentions that do not fall inside a single EDU are rejected upstream by
    document validation.
    """
    n = len(edus)
    entries = np.zeros((n, n), dtype=np.uint8)
    for cluster in clusters:
        hosts = []
        for s, e in cluster.mentions:
            k = edu_hosting(edus, s, e)
            if k is None:
                raise ValueError(f"mention ({s},{e}) does not lie inside a single EDU")
            hosts.append(k)
        for j in hosts:
            for k in hosts:
                entries[j, k] = 1
    np.fill_diagonal(entries, 1)
    return AdjacencyMatrix(n=n, entries=entries, directed=False)


def message_view(g: AdjacencyMatrix, directed_messages: bool = False) -> list[list[int]]:
    """Per-node neighbor lists for mean aggregation.

    Undirected (coreference) graphs: the stored row, self included.  Directed
    graphs are symmetrized by default (union of in- and out-edges, self
    excluded); with ``directed_messages`` a node sees only its in-neighbors,
    i.e. messages travel along edge direction.
    """
    if not g.directed:
        mat = g.entries
    elif directed_messages:
        mat = g.entries.T
    else:
        mat = g.entries | g.entries.T
    return [[int(j) for j in np.flatnonzero(mat[i])] for i in range(g.n)]


@dataclass(frozen=True)
class GraphStats:
    documents: int
    sentences: float
    edus: float
    tokens: float
    rst_edges: float
    coref_edges: float


def document_graphs(doc: Document) -> tuple[AdjacencyMatrix, AdjacencyMatrix]:
    """Build both graphs for a document from its serialized tree and clusters."""
    dep = to_dependency(parse_rst_sexpr(doc.rst_tree), doc.edus)
    return build_rst_graph(dep), build_coref_graph(doc.coref_clusters, doc.edus)


def graph_stats(docs: Sequence[Document]) -> GraphStats:
    """Corpus means: sentences, EDUs, tokens, dependency arcs, coref pairs."""
    if not docs:
        return GraphStats(0, 0.0, 0.0, 0.0, 0.0, 0.0)
    sents = edus = toks = rst_e = coref_e = 0
    for doc in docs:
        g_r, g_c = document_graphs(doc)
        sents += len(doc.sentences)
        edus += len(doc.edus)
        toks += len(doc.tokens)
        rst_e += g_r.edge_count()
        coref_e += g_c.edge_count()
    m = len(docs)
    return GraphStats(m, sents / m, edus / m, toks / m, rst_e / m, coref_e / m)
