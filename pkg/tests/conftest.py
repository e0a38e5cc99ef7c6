from __future__ import annotations

import pytest

from edusum.corpus import save_corpus

from tests.helpers import fig_document


@pytest.fixture
def fig_doc():
    return fig_document()


@pytest.fixture
def fig_corpus_path(tmp_path):
    path = tmp_path / "fig.jsonl"
    save_corpus([fig_document()], path)
    return path
