"""
Text to simplex points and to the TFIDF / L2 baselines.

Documents are tokenized, counted against a sorted vocabulary and embedded as
smoothed term-frequency vectors (MAP estimate with pseudocount alpha). When
padding is on, a dummy term that no token can match keeps the vocabulary size
even, as the likelihood engine needs n = V - 1 odd.
"""
import logging
import re
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import sparse

import config
from engines.geometry_engine import SimplexPoint, as_simplex_point
from errors import DataError, DomainError

LOGGER = logging.getLogger(__name__)

TOKEN_SPLIT = re.compile(r"[\W_]+")


# --- Domain Types ---

@dataclass(frozen=True)
class Vocabulary:
    terms: tuple
    padded: bool = False
    index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {term: i for i, term in enumerate(self.terms)})

    def __len__(self):
        return len(self.terms)

    @property
    def pad_index(self):
        return len(self.terms) - 1 if self.padded else None

    @property
    def real_terms(self):
        return self.terms[:-1] if self.padded else self.terms


@dataclass(frozen=True)
class DocumentVector:
    counts: dict
    label: str
    id: str

    @property
    def total(self):
        return sum(self.counts.values())


@dataclass(frozen=True)
class EmbeddingConfig:
    alpha: float = config.DEFAULT_ALPHA

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"Smoothing pseudocount must be positive, got {self.alpha}")


@dataclass(frozen=True, eq=False)
class IdfWeights:
    values: np.ndarray


# --- Tokens & Vocabulary ---

def tokenize(text):
    """Lowercase, split on runs of non-alphanumerics, drop empties. No stopword removal."""
    return [tok for tok in TOKEN_SPLIT.split(text.lower()) if tok]


def build_vocabulary(token_lists, min_count=config.DEFAULT_MIN_COUNT, pad=config.DEFAULT_PAD):
    """Terms with corpus frequency >= min_count, sorted; PAD_TERM appended iff pad and the size is odd."""
    token_lists = list(token_lists)
    if not token_lists:
        raise DataError("Cannot build a vocabulary from an empty corpus")
    freq = Counter()
    for tokens in token_lists:
        freq.update(tokens)
    terms = sorted(term for term, count in freq.items() if count >= min_count)
    if not terms:
        raise DataError(f"Vocabulary is empty after filtering with min_count={min_count}")
    padded = pad and len(terms) % 2 == 1
    if padded:
        terms.append(config.PAD_TERM)
    LOGGER.info("Vocabulary: %d terms%s", len(terms), " (with padding term)" if padded else "")
    return Vocabulary(tuple(terms), padded)


def count_document(tokens, vocab, label="", doc_id=""):
    """Counts in-vocabulary tokens; out-of-vocabulary tokens are dropped."""
    counts = Counter(vocab.index[tok] for tok in tokens if tok in vocab.index and tok != config.PAD_TERM)
    return DocumentVector(dict(sorted(counts.items())), label, doc_id)


def vectorize_corpus(df, vocab):
    """DocumentVectors for every corpus row with at least one in-vocabulary token."""
    docs = []
    for row in df.itertuples(index=False):
        doc = count_document(tokenize(row.text), vocab, row.label, row.id)
        if doc.total > 0:
            docs.append(doc)
        else:
            LOGGER.warning("Dropping document %s: no in-vocabulary tokens", row.id)
    if not docs:
        raise DataError("No document has an in-vocabulary token")
    return docs


def count_matrix(docs, vocab):
    """Sparse (N, V) document-term counts."""
    rows, cols, vals = [], [], []
    for r, doc in enumerate(docs):
        for idx, count in doc.counts.items():
            rows.append(r)
            cols.append(idx)
            vals.append(count)
    return sparse.csr_matrix((vals, (rows, cols)), shape=(len(docs), len(vocab)), dtype=float)


# --- Embedding ---

def embed_document(doc, vocab, cfg=None):
    """x_i = (count_i + alpha) / (total + alpha V); strictly interior."""
    cfg = cfg or EmbeddingConfig()
    total = doc.total
    if total <= 0:
        raise DataError(f"Document {doc.id!r} has no in-vocabulary tokens")
    counts = np.zeros(len(vocab))
    for idx, count in doc.counts.items():
        counts[idx] = count
    return SimplexPoint.from_values((counts + cfg.alpha) / (total + cfg.alpha * len(vocab)))


def embed_documents(docs, vocab, cfg=None):
    """(N, V) matrix whose rows are embed_document of each document."""
    cfg = cfg or EmbeddingConfig()
    counts = count_matrix(docs, vocab).toarray()
    totals = counts.sum(axis=1, keepdims=True)
    if np.any(totals <= 0):
        raise DataError("Every document needs at least one in-vocabulary token")
    return (counts + cfg.alpha) / (totals + cfg.alpha * len(vocab))


# --- Baselines ---

def idf_weights(docs, vocab):
    """IDF_k = ln(N / df_k); terms in no document (the padding term included) get 0."""
    docs = list(docs)
    if not docs:
        raise DataError("IDF needs at least one document")
    present = count_matrix(docs, vocab) > 0
    df = np.asarray(present.sum(axis=0)).ravel()
    values = np.zeros(len(vocab))
    seen = df > 0
    values[seen] = np.log(len(docs) / df[seen])
    return IdfWeights(values)


def tfidf_rows(counts, idf):
    """Unit-length TF*IDF rows of a sparse count matrix; a zero-norm row is a domain error."""
    weighted = sparse.csr_matrix(counts).multiply(idf.values[None, :]).tocsr()
    norms = np.sqrt(np.asarray(weighted.multiply(weighted).sum(axis=1)).ravel())
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise DomainError(f"TFIDF vector of row {zero[0]} has zero norm (all its terms have IDF 0)")
    return sparse.diags(1.0 / norms) @ weighted


def _tfidf_vector(doc, idf):
    vec = {idx: count * idf.values[idx] for idx, count in doc.counts.items()}
    norm = np.sqrt(sum(v * v for v in vec.values()))
    if norm == 0:
        raise DomainError(f"TFIDF vector of document {doc.id!r} has zero norm")
    return {idx: v / norm for idx, v in vec.items()}


def tfidf_cosine_distance(a, b, idf):
    """1 - cosine similarity of the TF*IDF vectors; in [0, 1] for nonnegative counts."""
    u, v = _tfidf_vector(a, idf), _tfidf_vector(b, idf)
    dot = sum(val * v[idx] for idx, val in u.items() if idx in v)
    return float(min(1.0, max(0.0, 1.0 - dot)))


def tf_l2_distance(a, b):
    a, b = as_simplex_point(a), as_simplex_point(b)
    if a.coords.size != b.coords.size:
        raise DomainError(f"Dimension mismatch: {a.coords.size} vs {b.coords.size}")
    return float(np.linalg.norm(a.coords - b.coords))


# --- Prepared Corpus ---

@dataclass(frozen=True, eq=False)
class EmbeddedCorpus:
    """Everything the evaluation harness needs, aligned by document row."""
    vocab: Vocabulary
    docs: list
    labels: np.ndarray
    tf: np.ndarray
    counts: sparse.csr_matrix
    idf: IdfWeights
    embedding: EmbeddingConfig

    def __len__(self):
        return len(self.docs)


def prepare_corpus(df, min_count=config.DEFAULT_MIN_COUNT, pad=config.DEFAULT_PAD, cfg=None, vocab=None):
    """Tokenize, build (or reuse) the vocabulary, embed, and compute corpus-wide IDF."""
    cfg = cfg or EmbeddingConfig()
    if vocab is None:
        vocab = build_vocabulary((tokenize(text) for text in df["text"]), min_count=min_count, pad=pad)
    docs = vectorize_corpus(df, vocab)
    return EmbeddedCorpus(
        vocab=vocab,
        docs=docs,
        labels=np.array([doc.label for doc in docs]),
        tf=embed_documents(docs, vocab, cfg),
        counts=count_matrix(docs, vocab),
        idf=idf_weights(docs, vocab),
        embedding=cfg,
    )


# --- Exports ---

def export_ranked_scores(scores, vocab, include_pad=False):
    """Rows (rank, term, score) sorted by descending score; ties break lexicographically by term."""
    scores = np.asarray(scores, dtype=float)
    if scores.size != len(vocab):
        raise DataError(f"Expected {len(vocab)} scores, got {scores.size}")
    table = pd.DataFrame({"term": list(vocab.terms), "score": scores})
    if vocab.padded and not include_pad:
        table = table.drop(index=vocab.pad_index)
    table = table.sort_values(["score", "term"], ascending=[False, True], kind="mergesort")
    table.insert(0, "rank", np.arange(1, len(table) + 1))
    return table.reset_index(drop=True)[config.COLS_RANKED]


def vocabulary_table(docs, vocab):
    """Per-term document frequency and corpus count, in vocabulary order."""
    counts = count_matrix(docs, vocab)
    return pd.DataFrame({
        "index": np.arange(len(vocab)),
        "term": list(vocab.terms),
        "df": np.asarray((counts > 0).sum(axis=0)).ravel().astype(int),
        "count": np.asarray(counts.sum(axis=0)).ravel().astype(int),
    })[config.COLS_VOCAB]
