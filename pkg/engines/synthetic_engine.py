"""
Synthetic two-class corpus where term frequency and document frequency disagree.

Every document mixes three kinds of terms over a fixed 200-term vocabulary:

    stop   20 terms, present in every document with many tokens (IDF 0)
    topic  2 x 20 terms, a few single tokens from the document's own class
    common 140 class-independent terms, a dozen per document with repeated counts

Topic and common terms have similar document frequencies, so IDF weights them
alike and the common-term overlap between two documents swamps the class signal.
Common terms carry several times more token mass than topic terms, which is what a
metric learned from term frequencies can separate.
"""
import logging

import numpy as np
import pandas as pd

import config
from engines.corpus_engine import Vocabulary
from errors import DataError

LOGGER = logging.getLogger(__name__)

CLASSES = ("alpha", "beta")
N_STOP = 20
N_TOPIC = 20
N_COMMON = 140

STOP_EXTRA_TOKENS = 20      # on top of one token per stop term
TOPIC_TOKENS = 4
COMMON_PER_DOC = 12
COMMON_EXTRA_MEAN = 3.0     # Poisson extra tokens per chosen common term


def synthetic_terms():
    """Sorted term list of the synthetic vocabulary (even size, no padding needed)."""
    terms = [f"stop{i:02d}" for i in range(N_STOP)]
    terms += [f"{cls}{i:02d}" for cls in CLASSES for i in range(N_TOPIC)]
    terms += [f"common{i:03d}" for i in range(N_COMMON)]
    return sorted(terms)


def synthetic_vocabulary():
    return Vocabulary(tuple(synthetic_terms()), padded=False)


def _document_tokens(label, rng):
    tokens = []
    stop_counts = 1 + rng.multinomial(STOP_EXTRA_TOKENS, np.full(N_STOP, 1.0 / N_STOP))
    for i, count in enumerate(stop_counts):
        tokens += [f"stop{i:02d}"] * int(count)

    for i in rng.integers(0, N_TOPIC, size=TOPIC_TOKENS):
        tokens.append(f"{label}{i:02d}")

    for i in rng.choice(N_COMMON, size=COMMON_PER_DOC, replace=False):
        tokens += [f"common{i:03d}"] * int(1 + rng.poisson(COMMON_EXTRA_MEAN))

    rng.shuffle(tokens)
    return tokens


def make_synthetic_corpus(n_docs=400, seed=config.DEFAULT_SEED):
    """
    Balanced corpus of `n_docs` documents (COLS_CORPUS layout), labels alternating
    between the two classes. Reproducible for a given seed.
    """
    if n_docs < 2 * len(CLASSES):
        raise DataError(f"Synthetic corpus needs at least {2 * len(CLASSES)} documents, got {n_docs}")
    rng = np.random.default_rng(seed)
    records = []
    for j in range(n_docs):
        label = CLASSES[j % len(CLASSES)]
        records.append({"id": f"{label}/{j:04d}", "label": label, "text": " ".join(_document_tokens(label, rng))})
    LOGGER.info("Generated %d synthetic documents over %d terms", n_docs, len(synthetic_terms()))
    return pd.DataFrame(records, columns=config.COLS_CORPUS)
