"""
Nearest-neighbor classification under the learned geodesic, Fisher, TFIDF-cosine
and TF-L2 distances, and the repeated random-split experiment.
"""
import json
import logging
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.spatial.distance import cdist
from tqdm import tqdm

import config
from analytics.statistics import calculate_distribution_stats, jaccard
from engines.corpus_engine import export_ranked_scores, tfidf_rows
from engines.geometry_engine import MetricParam, as_metric_param, sphere_map_rows
from engines.optimizer_engine import OptimizerConfig, estimate_theta
from errors import DataError, DomainError

LOGGER = logging.getLogger(__name__)


# --- Distance Kinds ---

@dataclass(frozen=True)
class DistanceKind:
    """
    name is one of DISTANCE_KINDS. A "learned" kind with param=None is refit on every
    training split; with a param it uses that fixed metric parameter.
    """
    name: str
    param: tuple = None

    def __post_init__(self):
        if self.name not in config.DISTANCE_KINDS:
            raise ValueError(f"Unknown distance kind {self.name!r}, expected one of {config.DISTANCE_KINDS}")
        if self.param is not None:
            if self.name != "learned":
                raise ValueError(f"Only the learned kind takes a metric parameter, not {self.name!r}")
            object.__setattr__(self, "param", tuple(float(v) for v in as_metric_param(self.param).coords))

    @classmethod
    def learned(cls, lam=None):
        return cls("learned", None if lam is None else tuple(as_metric_param(lam).coords))

    @property
    def metric_param(self):
        return None if self.param is None else MetricParam.from_values(self.param)


def pairwise_distances(kind, corpus, query_rows, ref_rows, lam=None):
    """
    (len(query_rows), len(ref_rows)) distance matrix between corpus documents.
    `lam` supplies the metric parameter of a learned kind.
    """
    query_rows, ref_rows = np.asarray(query_rows), np.asarray(ref_rows)
    if kind.name in ("learned", "fisher"):
        if kind.name == "fisher":
            lam = MetricParam.uniform(corpus.tf.shape[1] - 1)
        elif lam is None:
            lam = kind.metric_param
        if lam is None:
            raise DomainError("Learned distance needs a metric parameter")
        lam = as_metric_param(lam)
        if lam.coords.size != corpus.tf.shape[1]:
            raise DomainError(f"Metric parameter has {lam.coords.size} coordinates, vocabulary {corpus.tf.shape[1]}")
        q = sphere_map_rows(lam, corpus.tf[query_rows])
        r = sphere_map_rows(lam, corpus.tf[ref_rows])
        # chord form of arccos(q . r); keeps precision for nearly identical documents
        chord = cdist(q, r, metric="euclidean")
        return 2.0 * np.arcsin(np.clip(chord / 2.0, 0.0, 1.0))
    if kind.name == "tfidf":
        q = tfidf_rows(corpus.counts[query_rows], corpus.idf)
        r = tfidf_rows(corpus.counts[ref_rows], corpus.idf)
        return np.clip(1.0 - (q @ r.T).toarray(), 0.0, 1.0)
    return cdist(corpus.tf[query_rows], corpus.tf[ref_rows], metric="euclidean")


# --- Classification ---

def _vote(distances, labels, neighbors):
    """Majority label among the nearest `neighbors`; ties go to the label seen first by distance."""
    order = np.argsort(distances, kind="stable")[:neighbors]
    if neighbors == 1:
        return labels[order[0]]
    counts = Counter(labels[i] for i in order)
    best = max(counts.values())
    for i in order:
        if counts[labels[i]] == best:
            return labels[i]


def nn_classify(train, query, distance, neighbors=config.DEFAULT_NEIGHBORS):
    """
    Label of the nearest training item under `distance(query, item)`.
    `train` is a sequence of (item, label); distance ties go to the smaller training index.
    """
    train = list(train)
    if not train:
        raise DataError("Nearest-neighbor classification needs a nonempty training set")
    distances = np.array([distance(query, item) for item, _ in train])
    labels = [label for _, label in train]
    return _vote(distances, labels, neighbors)


def classify_rows(distance_matrix, train_labels, neighbors=config.DEFAULT_NEIGHBORS):
    return np.array([_vote(row, train_labels, neighbors) for row in distance_matrix])


# --- Sampling ---

def stratified_sample(labels, size, rng):
    """
    Indices of a training set of `size` documents, allocated to labels in proportion to
    their frequency with at least one per label (largest remainders get the leftovers).
    """
    labels = np.asarray(labels)
    classes, class_counts = np.unique(labels, return_counts=True)
    if size >= labels.size:
        raise DataError(f"Training size {size} must be smaller than the corpus ({labels.size} documents)")
    if size < classes.size:
        raise DataError(f"Training size {size} cannot represent all {classes.size} labels")

    exact = size * class_counts / labels.size
    alloc = np.maximum(np.floor(exact).astype(int), 1)
    while alloc.sum() > size:
        alloc[np.argmax(np.where(alloc > 1, alloc - exact, -np.inf))] -= 1
    order = np.argsort(-(exact - alloc), kind="stable")
    while alloc.sum() < size:
        for idx in order:
            if alloc.sum() == size:
                break
            if alloc[idx] < class_counts[idx]:
                alloc[idx] += 1

    chosen = []
    for cls, take in zip(classes, alloc):
        members = np.flatnonzero(labels == cls)
        chosen.extend(rng.choice(members, size=take, replace=False).tolist())
    return np.sort(np.array(chosen))


# --- Experiment ---

@dataclass
class ExperimentReport:
    table: pd.DataFrame
    per_repeat: dict
    seed: int
    settings: dict = field(default_factory=dict)

    def to_csv(self, path):
        self.table.to_csv(path, index=False, float_format="%.17g")

    def to_json(self, path):
        payload = {
            "seed": self.seed,
            "settings": self.settings,
            "rows": json.loads(self.table.to_json(orient="records")),
            "per_repeat": {f"{size}:{kind}": errors for (size, kind), errors in sorted(self.per_repeat.items())},
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)


def _canonical(kinds):
    """Deduplicated kinds in DISTANCE_KINDS order, so the report does not depend on input order."""
    unique = list(dict.fromkeys(kinds))
    return sorted(unique, key=lambda k: (config.DISTANCE_KINDS.index(k.name), k.param or ()))


def run_experiment(corpus, sizes, repeats, seed, kinds, neighbors=config.DEFAULT_NEIGHBORS, optimizer_cfg=None):
    """
    For each training size and repeat: draw a stratified training split with the
    generator seeded by (seed + repeat, size), test on the rest, and record the
    nearest-neighbor error of every distance kind. A learned kind without a fixed
    parameter refits theta on the training split and uses its group inverse.
    """
    if repeats < 1:
        raise DataError(f"repeats must be at least 1, got {repeats}")
    kinds = _canonical(kinds)
    optimizer_cfg = optimizer_cfg or OptimizerConfig(seed=seed)
    per_repeat = {}

    for size in sorted(set(int(s) for s in sizes)):
        for repeat in tqdm(range(repeats), desc=f"size {size}", disable=not LOGGER.isEnabledFor(logging.INFO)):
            rng = np.random.default_rng([seed + repeat, size])
            train = stratified_sample(corpus.labels, size, rng)
            test = np.setdiff1d(np.arange(len(corpus)), train)
            train_labels = corpus.labels[train]

            fitted = None
            for kind in kinds:
                lam = None
                if kind.name == "learned" and kind.param is None:
                    if fitted is None:
                        fitted = estimate_theta(corpus.tf[train], optimizer_cfg).lambda_metric
                    lam = fitted
                distances = pairwise_distances(kind, corpus, test, train, lam=lam)
                predicted = classify_rows(distances, train_labels, neighbors)
                error = float(np.mean(predicted != corpus.labels[test]))
                per_repeat.setdefault((size, _kind_label(kind)), []).append(error)

        LOGGER.info(
            "size %d: %s", size,
            ", ".join(f"{_kind_label(k)}={np.mean(per_repeat[(size, _kind_label(k))]):.4f}" for k in kinds),
        )

    rows = []
    for (size, label), errors in per_repeat.items():
        summary = calculate_distribution_stats(errors)
        rows.append({
            "size": size,
            "kind": label,
            "mean_error": summary["Mean"],
            "std_error": summary["Std Dev"],
            "repeats": summary["Count"],
            "seed": seed,
        })
    table = pd.DataFrame(rows, columns=config.COLS_REPORT)
    settings = {
        "sizes": sorted(set(int(s) for s in sizes)),
        "repeats": repeats,
        "kinds": [_kind_label(k) for k in kinds],
        "neighbors": neighbors,
        "alpha": corpus.embedding.alpha,
        "vocabulary_size": len(corpus.vocab),
        "optimizer": {
            "step": optimizer_cfg.step,
            "backtrack": optimizer_cfg.backtrack,
            "tol": optimizer_cfg.tol,
            "max_iter": optimizer_cfg.max_iter,
        },
    }
    return ExperimentReport(table, per_repeat, seed, settings)


def _kind_label(kind):
    return kind.name if kind.param is None else f"{kind.name}(fixed)"


# --- Score Comparison ---

def score_comparison(lam_metric, idf, vocab, top_k=config.DEFAULT_TOP_K):
    """
    Top-k and bottom-k terms under the learned metric parameter and under IDF, side by
    side, with the Jaccard overlap of the two top sets and of the two bottom sets.
    """
    lam_metric = as_metric_param(lam_metric)
    n_terms = len(vocab.real_terms)
    if top_k > n_terms:
        raise DataError(f"top_k={top_k} exceeds the vocabulary size {n_terms}")
    if lam_metric.coords.size != len(vocab) or idf.values.size != len(vocab):
        raise DomainError("Score vectors must match the vocabulary size")

    lam_ranked = export_ranked_scores(lam_metric.coords, vocab)
    idf_ranked = export_ranked_scores(idf.values, vocab)
    table = pd.DataFrame({
        "rank": np.arange(1, top_k + 1),
        "lambda_top": lam_ranked["term"].iloc[:top_k].to_numpy(),
        "idf_top": idf_ranked["term"].iloc[:top_k].to_numpy(),
        "lambda_bottom": lam_ranked["term"].iloc[::-1].iloc[:top_k].to_numpy(),
        "idf_bottom": idf_ranked["term"].iloc[::-1].iloc[:top_k].to_numpy(),
    })
    return {
        "table": table,
        "jaccard_top": jaccard(table["lambda_top"], table["idf_top"]),
        "jaccard_bottom": jaccard(table["lambda_bottom"], table["idf_bottom"]),
    }
