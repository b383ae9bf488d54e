"""Tests for nearest-neighbor classification, the split experiment and score comparison."""
import json

import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_allclose

import config
from analytics.statistics import calculate_distribution_stats, jaccard, pooled_std, rank_value_trend
from conftest import TINY_DOCS
from engines.corpus_engine import (
    IdfWeights,
    Vocabulary,
    prepare_corpus,
    tf_l2_distance,
    tfidf_cosine_distance,
)
from engines.evaluation_engine import (
    DistanceKind,
    classify_rows,
    nn_classify,
    pairwise_distances,
    run_experiment,
    score_comparison,
    stratified_sample,
)
from engines.geometry_engine import fisher_distance, geodesic_distance
from engines.optimizer_engine import OptimizerConfig, estimate_theta
from engines.synthetic_engine import make_synthetic_corpus, synthetic_vocabulary
from errors import DataError


def _two_cluster_df(per_class=6):
    rows = []
    for j in range(per_class):
        rows.append((f"a{j}", "a", f"apple apple pear {'plum ' * (j % 3)}common"))
        rows.append((f"b{j}", "b", f"kiwi kiwi lime {'fig ' * (j % 3)}common"))
    return pd.DataFrame(rows, columns=config.COLS_CORPUS)


@pytest.fixture
def small_corpus():
    return prepare_corpus(_two_cluster_df())


class TestDistanceKind:
    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            DistanceKind("cosine")

    def test_param_only_for_learned(self):
        with pytest.raises(ValueError):
            DistanceKind("fisher", (0.5, 0.5))

    def test_fixed_learned_param(self):
        kind = DistanceKind.learned([0.25, 0.75])
        assert_allclose(kind.metric_param.coords, [0.25, 0.75])


class TestNearestNeighbor:
    def test_query_equal_to_training_point(self):
        train = [([0.2, 0.8], "x"), ([0.7, 0.3], "y")]
        assert nn_classify(train, [0.7, 0.3], fisher_distance) == "y"

    def test_nearer_point_wins(self):
        train = [([0.9, 0.1], "A"), ([0.1, 0.9], "B")]
        assert nn_classify(train, [0.8, 0.2], fisher_distance) == "A"

    def test_tie_goes_to_lower_index(self):
        train = [([0.3, 0.7], "first"), ([0.7, 0.3], "second")]
        assert nn_classify(train, [0.5, 0.5], fisher_distance) == "first"

    def test_empty_training_set(self):
        with pytest.raises(DataError):
            nn_classify([], [0.5, 0.5], fisher_distance)

    def test_k_neighbors_majority(self):
        distances = np.array([[0.1, 0.2, 0.3, 0.4]])
        assert classify_rows(distances, np.array(["a", "b", "b", "a"]), neighbors=3)[0] == "b"

    def test_k_neighbors_vote_tie_goes_to_nearest(self):
        distances = np.array([[0.4, 0.1, 0.2, 0.3]])
        assert classify_rows(distances, np.array(["a", "b", "a", "b"]), neighbors=2)[0] == "b"


class TestPairwiseDistances:
    """Vectorized matrices agree with the scalar distances."""

    def test_learned_matches_scalar(self, small_corpus, rng):
        lam = rng.dirichlet(np.ones(len(small_corpus.vocab)))
        lam = (lam + 0.01) / (lam + 0.01).sum()
        matrix = pairwise_distances(DistanceKind("learned"), small_corpus, [0, 1, 2], [3, 4], lam=lam)
        for i, q in enumerate([0, 1, 2]):
            for j, r in enumerate([3, 4]):
                expected = geodesic_distance(lam, small_corpus.tf[q], small_corpus.tf[r])
                assert matrix[i, j] == pytest.approx(expected, abs=1e-12)

    def test_fisher_tfidf_l2_match_scalar(self, small_corpus):
        fisher = pairwise_distances(DistanceKind("fisher"), small_corpus, [0], [1, 2])
        tfidf = pairwise_distances(DistanceKind("tfidf"), small_corpus, [0], [1, 2])
        l2 = pairwise_distances(DistanceKind("l2"), small_corpus, [0], [1, 2])
        docs, tf = small_corpus.docs, small_corpus.tf
        for j, r in enumerate([1, 2]):
            assert fisher[0, j] == pytest.approx(fisher_distance(tf[0], tf[r]), abs=1e-12)
            assert tfidf[0, j] == pytest.approx(tfidf_cosine_distance(docs[0], docs[r], small_corpus.idf), abs=1e-12)
            assert l2[0, j] == pytest.approx(tf_l2_distance(tf[0], tf[r]), abs=1e-12)

    def test_identical_documents_at_zero(self, small_corpus):
        matrix = pairwise_distances(DistanceKind("fisher"), small_corpus, [0], [0])
        assert matrix[0, 0] == pytest.approx(0.0, abs=1e-12)


class TestStratifiedSample:
    def test_every_label_represented(self, rng):
        labels = np.array(["a"] * 18 + ["b"] * 2)
        chosen = stratified_sample(labels, 5, rng)
        assert chosen.size == 5
        assert set(labels[chosen]) == {"a", "b"}

    def test_proportional(self, rng):
        labels = np.array(["a"] * 30 + ["b"] * 10)
        chosen = stratified_sample(labels, 8, rng)
        assert list(np.unique(labels[chosen], return_counts=True)[1]) == [6, 2]

    def test_size_must_leave_a_test_set(self, rng):
        with pytest.raises(DataError):
            stratified_sample(np.array(["a", "b"]), 2, rng)

    def test_size_below_label_count(self, rng):
        with pytest.raises(DataError):
            stratified_sample(np.array(["a", "b", "c", "a"]), 2, rng)


class TestRunExperiment:
    """Repeated random-split experiment on a small two-cluster corpus."""

    def test_report_shape_and_ranges(self, small_corpus):
        report = run_experiment(small_corpus, [4, 6], 3, 7, [DistanceKind("fisher"), DistanceKind("l2")])
        assert list(report.table.columns) == config.COLS_REPORT
        assert len(report.table) == 4
        assert report.table["mean_error"].between(0, 1).all()
        assert (report.table["repeats"] == 3).all()

    def test_mean_is_arithmetic_mean_of_repeats(self, small_corpus):
        report = run_experiment(small_corpus, [4], 5, 1, [DistanceKind("tfidf")])
        errors = report.per_repeat[(4, "tfidf")]
        assert report.table["mean_error"].iloc[0] == sum(errors) / len(errors)

    def test_duplicate_kinds_collapse(self, small_corpus):
        report = run_experiment(small_corpus, [4], 2, 0, [DistanceKind("fisher"), DistanceKind("fisher")])
        assert len(report.table) == 1

    def test_kind_order_does_not_matter(self, small_corpus):
        kinds = [DistanceKind("l2"), DistanceKind("fisher"), DistanceKind("tfidf")]
        a = run_experiment(small_corpus, [4], 3, 11, kinds)
        b = run_experiment(small_corpus, [4], 3, 11, kinds[::-1])
        pd.testing.assert_frame_equal(a.table, b.table)

    def test_reproducible_csv(self, small_corpus, tmp_path):
        kinds = [DistanceKind("learned"), DistanceKind("tfidf")]
        cfg = OptimizerConfig(max_iter=20)
        for name in ("one.csv", "two.csv"):
            run_experiment(small_corpus, [4], 1, 3, kinds, optimizer_cfg=cfg).to_csv(tmp_path / name)
        assert (tmp_path / "one.csv").read_bytes() == (tmp_path / "two.csv").read_bytes()

    def test_single_repeat_has_zero_std(self, small_corpus):
        report = run_experiment(small_corpus, [4], 1, 0, [DistanceKind("l2")])
        assert report.table["std_error"].iloc[0] == 0.0

    def test_fixed_learned_kind(self, small_corpus):
        lam = np.full(len(small_corpus.vocab), 1.0 / len(small_corpus.vocab))
        report = run_experiment(small_corpus, [4], 2, 0, [DistanceKind.learned(lam), DistanceKind("fisher")])
        by_kind = report.table.set_index("kind")["mean_error"]
        assert by_kind["learned(fixed)"] == by_kind["fisher"]

    def test_json_mirror(self, small_corpus, tmp_path):
        report = run_experiment(small_corpus, [4], 2, 0, [DistanceKind("l2")])
        report.to_json(tmp_path / "report.json")
        payload = json.loads((tmp_path / "report.json").read_text())
        assert payload["seed"] == 0
        assert len(payload["per_repeat"]["4:l2"]) == 2

    def test_invalid_repeats(self, small_corpus):
        with pytest.raises(DataError):
            run_experiment(small_corpus, [4], 0, 0, [DistanceKind("l2")])

    def test_separable_clusters_classified(self, small_corpus):
        report = run_experiment(small_corpus, [6], 3, 0, [DistanceKind("tfidf")])
        assert report.table["mean_error"].iloc[0] == 0.0


class TestScoreComparison:
    def _vocab(self):
        return Vocabulary(("a", "b", "c", "d"))

    def test_identical_scores(self):
        scores = np.array([0.4, 0.3, 0.2, 0.1])
        result = score_comparison(scores, IdfWeights(scores), self._vocab(), top_k=2)
        assert result["jaccard_top"] == 1.0 and result["jaccard_bottom"] == 1.0

    def test_reversed_scores_swap(self):
        scores = np.array([0.4, 0.3, 0.2, 0.1])
        result = score_comparison(scores, IdfWeights(scores[::-1].copy()), self._vocab(), top_k=2)
        table = result["table"]
        assert set(table["lambda_top"]) == set(table["idf_bottom"]) == {"a", "b"}
        assert result["jaccard_top"] == 0.0

    def test_top_k_too_large(self):
        with pytest.raises(DataError):
            score_comparison(np.full(4, 0.25), IdfWeights(np.ones(4)), self._vocab(), top_k=5)


class TestStatistics:
    def test_distribution_stats(self):
        stats = calculate_distribution_stats([0.1, 0.3])
        assert stats["Mean"] == pytest.approx(0.2)
        assert stats["Std Dev"] == pytest.approx(np.std([0.1, 0.3], ddof=1))
        assert stats["Count"] == 2

    def test_pooled_std(self):
        assert pooled_std([3.0, 4.0]) == pytest.approx(np.sqrt(12.5))

    def test_jaccard(self):
        assert jaccard(["a", "b"], ["b", "c"]) == pytest.approx(1 / 3)

    def test_power_law_trend(self):
        ranks = np.arange(1, 51)
        trend = rank_value_trend(3.0 * ranks ** -1.5)
        assert trend["slope"] == pytest.approx(-1.5)
        assert trend["r_squared"] == pytest.approx(1.0)


@pytest.fixture(scope="module")
def synthetic_corpus():
    df = make_synthetic_corpus(400, seed=0)
    return prepare_corpus(df, vocab=synthetic_vocabulary())


@pytest.fixture(scope="module")
def synthetic_report(synthetic_corpus):
    kinds = [DistanceKind("learned"), DistanceKind("tfidf"), DistanceKind("l2")]
    cfg = OptimizerConfig(tol=1e-5, max_iter=60)
    return run_experiment(synthetic_corpus, [20, 40, 80], 20, 0, kinds, optimizer_cfg=cfg)


@pytest.mark.slow
class TestSyntheticBenchmark:
    """Two-class corpus where stopwords dominate and common terms hide the class signal."""

    def test_vocabulary_layout(self, synthetic_corpus):
        assert len(synthetic_corpus.vocab) == 200 and not synthetic_corpus.vocab.padded
        stops = [i for i, term in enumerate(synthetic_corpus.vocab.terms) if term.startswith("stop")]
        assert np.all(synthetic_corpus.idf.values[stops] == 0.0)

    def test_learned_beats_tfidf_beats_l2(self, synthetic_report):
        table = synthetic_report.table[synthetic_report.table["size"] == 80].set_index("kind")
        spread = pooled_std(table["std_error"])
        assert table.loc["learned", "mean_error"] <= table.loc["tfidf", "mean_error"]
        assert table.loc["tfidf", "mean_error"] <= table.loc["l2", "mean_error"] + spread

    def test_error_does_not_grow_with_size(self, synthetic_report):
        for kind, rows in synthetic_report.table.groupby("kind"):
            rows = rows.sort_values("size")
            means, stds = rows["mean_error"].to_numpy(), rows["std_error"].to_numpy()
            for i in range(1, len(rows)):
                assert means[i] <= means[i - 1] + max(stds[i], stds[i - 1]), kind

    def test_common_terms_agree_more_than_rare_terms(self, synthetic_corpus):
        fit = estimate_theta(synthetic_corpus.tf[:100], OptimizerConfig(tol=1e-5, max_iter=60))
        result = score_comparison(fit.lambda_metric, synthetic_corpus.idf, synthetic_corpus.vocab, top_k=20)
        assert result["jaccard_bottom"] > result["jaccard_top"]
