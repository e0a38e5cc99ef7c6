"""Discourse-unit extractive summarization: dependency-constrained selection
over elementary discourse units with graph-convolutional encoding."""

__version__ = "0.1.0"

from .corpus import Cluster, Document, EduSpan, load_corpus, validate_document
from .rst import DependencyTree, dependency_closure, parse_rst_sexpr, to_dependency

__all__ = [
    "Cluster",
    "Document",
    "EduSpan",
    "DependencyTree",
    "load_corpus",
    "validate_document",
    "parse_rst_sexpr",
    "to_dependency",
    "dependency_closure",
]
