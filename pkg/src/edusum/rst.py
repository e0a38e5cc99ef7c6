"""Discourse constituency trees: parsing, head derivation, dependency conversion.

A serialized tree follows the grammar

    tree := "(" "leaf" INT ")"
          | "(" NUC "/" NUC REL tree tree+ ")"

with NUC one of N (nucleus) or S (satellite) and REL a relation identifier.
Whitespace is insignificant.  N-ary nodes are binarized left-branching at
parse time, each synthetic node copying the parent's nuclearity pair and
relation label.  Relation labels are stored but never interpreted.

Heads are inherited upward: a leaf heads itself; a node with one nucleus
child inherits that child's head; a node with two nucleus children inherits
the left one's.  Conversion to a dependency structure adds, per internal
node, an edge from the satellite child's head to the nucleus child's head,
or between two nucleus heads when the right head's unit carries no subject.
Selecting an EDU therefore commits you to its whole head-chain up to a root,
which is what ``dependency_closure`` computes.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from .corpus import EduSpan


class RstParseError(Exception):
    """Serialized tree does not match the grammar; message carries a position."""


@dataclass(frozen=True)
class Leaf:
    edu_index: int


@dataclass(frozen=True)
class Node:
    left: "RstTree"
    right: "RstTree"
    left_nuclearity: str  # "N" | "S"
    right_nuclearity: str
    relation: str


RstTree = Union[Leaf, Node]

_TOKEN_RE = re.compile(r"\(|\)|/|[^\s()/]+")
_REL_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_\-]*\Z")


def _tokenize(text: str) -> list[tuple[str, int]]:
    return [(m.group(0), m.start()) for m in _TOKEN_RE.finditer(text)]


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def error(self, msg: str) -> RstParseError:
        at = self.tokens[self.pos][1] if self.pos < len(self.tokens) else len(self.text)
        return RstParseError(f"{msg} at position {at}")

    def peek(self) -> str | None:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos][0]
        return None

    def take(self) -> str:
        if self.pos >= len(self.tokens):
            raise self.error("unexpected end of input")
        tok = self.tokens[self.pos][0]
        self.pos += 1
        return tok

    def expect(self, want: str):
        tok = self.take()
        if tok != want:
            self.pos -= 1
            raise self.error(f"expected '{want}', found '{tok}'")

    def parse_tree(self) -> RstTree:
        self.expect("(")
        head = self.take()
        if head == "leaf":
            idx_tok = self.take()
            if not idx_tok.isdigit():
                self.pos -= 1
                raise self.error(f"expected leaf index, found '{idx_tok}'")
            self.expect(")")
            return Leaf(int(idx_tok))

        left_nuc = head
        if left_nuc not in ("N", "S"):
            self.pos -= 1
            raise self.error(f"unknown nuclearity tag '{left_nuc}'")
        self.expect("/")
        right_nuc = self.take()
        if right_nuc not in ("N", "S"):
            self.pos -= 1
            raise self.error(f"unknown nuclearity tag '{right_nuc}'")
        if left_nuc == "S" and right_nuc == "S":
            self.pos -= 1
            raise self.error("S/S node: at least one child must be a nucleus")
        relation = self.take()
        if not _REL_RE.match(relation):
            self.pos -= 1
            raise self.error(f"invalid relation label '{relation}'")

        children: list[RstTree] = []
        while self.peek() == "(":
            children.append(self.parse_tree())
        self.expect(")")
        if len(children) < 2:
            raise self.error("node needs at least two children")

        # Left-branching binarization; synthetic nodes copy the parent's
        # nuclearity pair and relation.
        tree = children[0]
        for child in children[1:]:
            tree = Node(tree, child, left_nuc, right_nuc, relation)
        return tree


def parse_rst_sexpr(text: str) -> RstTree:
    """Parse a serialized discourse tree; leaves must read 0..n-1 left to right."""
    parser = _Parser(text)
    tree = parser.parse_tree()
    if parser.pos != len(parser.tokens):
        raise parser.error("trailing content after tree")
    leaves = leaf_indices(tree)
    if list(leaves) != list(range(len(leaves))):
        raise RstParseError(
            f"leaf index gap: expected 0..{len(leaves) - 1} in order, found {list(leaves)}"
        )
    return tree


def format_rst_sexpr(tree: RstTree) -> str:
    if isinstance(tree, Leaf):
        return f"(leaf {tree.edu_index})"
    return (
        f"({tree.left_nuclearity}/{tree.right_nuclearity} {tree.relation} "
        f"{format_rst_sexpr(tree.left)} {format_rst_sexpr(tree.right)})"
    )


def leaf_indices(tree: RstTree) -> tuple[int, ...]:
    if isinstance(tree, Leaf):
        return (tree.edu_index,)
    return leaf_indices(tree.left) + leaf_indices(tree.right)


def leaf_count(tree: RstTree) -> int:
    return len(leaf_indices(tree))


def prune_to_leaves(tree: RstTree, keep: int) -> RstTree:
    """Remove all leaves with index >= keep, collapsing emptied nodes."""
    if keep < 1:
        raise ValueError("must keep at least one leaf")

    def rec(t: RstTree) -> RstTree | None:
        if isinstance(t, Leaf):
            return t if t.edu_index < keep else None
        left, right = rec(t.left), rec(t.right)
        if left is not None and right is not None:
            return Node(left, right, t.left_nuclearity, t.right_nuclearity, t.relation)
        return left if left is not None else right

    pruned = rec(tree)
    assert pruned is not None
    return pruned


def derive_heads(tree: RstTree) -> dict[tuple[int, int], int]:
    """Head EDU of every node, keyed by the node's inclusive leaf span.

    Leaves head themselves.  A nucleus-satellite pair is headed by the
    nucleus child's head; a nucleus-nucleus pair by the left child's head.
    """
    heads: dict[tuple[int, int], int] = {}

    def rec(t: RstTree) -> tuple[int, int, int]:
        # returns (first leaf, last leaf, head)
        if isinstance(t, Leaf):
            heads[(t.edu_index, t.edu_index)] = t.edu_index
            return t.edu_index, t.edu_index, t.edu_index
        l_first, l_last, l_head = rec(t.left)
        r_first, r_last, r_head = rec(t.right)
        if t.left_nuclearity == "N":
            head = l_head  # covers N/S and N/N (left wins)
        else:
            head = r_head  # S/N
        heads[(l_first, r_last)] = head
        return l_first, r_last, head

    rec(tree)
    return heads


@dataclass(frozen=True)
class DependencyTree:
    """Head map over EDUs; ``heads[i]`` is None exactly for roots."""

    heads: tuple[int | None, ...]
    root: int

    @property
    def n(self) -> int:
        return len(self.heads)

    @property
    def roots(self) -> tuple[int, ...]:
        return tuple(i for i, h in enumerate(self.heads) if h is None)


def to_dependency(tree: RstTree, edus: Sequence[EduSpan]) -> DependencyTree:
    """Convert a constituency tree to a head map over its EDUs.

    Per internal node: with a nucleus and satellite child, the satellite's
    head depends on the nucleus's head.  With two nucleus children, the right
    head depends on the left head only when the right head's EDU has no
    subject; otherwise no edge is added, which can leave extra roots.
    """
    n = leaf_count(tree)
    heads: list[int | None] = [None] * n

    def rec(t: RstTree) -> int:
        if isinstance(t, Leaf):
            return t.edu_index
        l_head = rec(t.left)
        r_head = rec(t.right)
        pair = t.left_nuclearity + t.right_nuclearity
        if pair == "NS":
            heads[r_head] = l_head
            return l_head
        if pair == "SN":
            heads[l_head] = r_head
            return r_head
        # N/N: edge only when the right head's unit lacks a subject
        if not edus[r_head].has_subject:
            heads[r_head] = l_head
        return l_head

    root = rec(tree)
    return DependencyTree(heads=tuple(heads), root=root)


def dependency_closure(selected: Iterable[int], dep: DependencyTree) -> set[int]:
    """Selected EDUs plus every head-chain ancestor up to a root.

    Idempotent and monotone in the input set.
    """
    out: set[int] = set()
    for i in selected:
        if not (0 <= i < dep.n):
            raise IndexError(f"EDU index {i} out of range for {dep.n} EDUs")
        while i not in out:
            out.add(i)
            head = dep.heads[i]
            if head is None:
                break
            i = head
    return out
