import json

import numpy as np
import pytest

TINY_DOCS = [
    ("apples/a1", "apples", "apple banana apple cherry"),
    ("apples/a2", "apples", "apple cherry date apple"),
    ("birds/b1", "birds", "egg fig grape egg"),
    ("birds/b2", "birds", "fig grape honey kiwi"),
]


def interior_point(rng, size, floor=1e-3):
    """Random interior simplex point whose coordinates are at least about `floor`."""
    x = rng.dirichlet(np.ones(size)) + floor
    return x / x.sum()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def tiny_corpus_dir(tmp_path):
    root = tmp_path / "corpus"
    for doc_id, label, text in TINY_DOCS:
        path = root / f"{doc_id}.txt"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    return root


@pytest.fixture
def tiny_corpus_jsonl(tmp_path):
    path = tmp_path / "corpus.jsonl"
    lines = [json.dumps({"id": doc_id, "label": label, "text": text}) for doc_id, label, text in TINY_DOCS]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
