import json

import numpy as np
import pytest

from data.model_file import ModelFile, load_model, save_model
from engines.corpus_engine import EmbeddingConfig, IdfWeights
from engines.geometry_engine import MetricParam, invert_param
from errors import DataError


def _model(theta=(0.1, 0.2, 0.3, 0.4)):
    theta = MetricParam.from_values(np.array(theta) / np.sum(theta))
    return ModelFile(
        terms=("a", "b", "c", "<pad>"),
        padded=True,
        theta_hat=theta,
        lambda_metric=invert_param(theta),
        idf=IdfWeights(np.array([0.5, np.log(3.0), 0.0, 0.0])),
        embedding=EmbeddingConfig(alpha=0.01),
        iterations=12,
        final_loglikelihood=-3.25,
        seed=0,
    )


class TestModelFile:
    def test_round_trip_is_bit_exact(self, tmp_path, rng):
        model = _model(rng.dirichlet(np.ones(4)))
        path = tmp_path / "model.json"
        save_model(model, path)
        loaded = load_model(path)
        assert np.array_equal(loaded.theta_hat.coords, model.theta_hat.coords)
        assert np.array_equal(loaded.lambda_metric.coords, model.lambda_metric.coords)
        assert np.array_equal(loaded.idf.values, model.idf.values)
        assert loaded.terms == model.terms and loaded.padded

    def test_save_is_deterministic(self, tmp_path):
        save_model(_model(), tmp_path / "one.json")
        save_model(_model(), tmp_path / "two.json")
        assert (tmp_path / "one.json").read_bytes() == (tmp_path / "two.json").read_bytes()

    def test_length_mismatch(self):
        theta = MetricParam.from_values([0.5, 0.5])
        with pytest.raises(DataError):
            ModelFile(("a", "b", "c"), False, theta, invert_param(theta), IdfWeights(np.zeros(2)),
                      EmbeddingConfig(), 1, 0.0, 0)

    def test_lambda_must_invert_theta(self):
        theta = MetricParam.from_values([0.25, 0.75])
        with pytest.raises(DataError):
            ModelFile(("a", "b"), False, theta, theta, IdfWeights(np.zeros(2)), EmbeddingConfig(), 1, 0.0, 0)

    def test_unknown_version(self, tmp_path):
        path = tmp_path / "model.json"
        save_model(_model(), path)
        payload = json.loads(path.read_text())
        payload["version"] = 99
        path.write_text(json.dumps(payload))
        with pytest.raises(DataError, match="version"):
            load_model(path)

    def test_missing_field(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text(json.dumps({"version": 1, "terms": ["a", "b"]}))
        with pytest.raises(DataError):
            load_model(path)

    def test_not_json(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text("{oops")
        with pytest.raises(DataError):
            load_model(path)

    def test_vocab_property(self):
        vocab = _model().vocab
        assert vocab.padded and vocab.pad_index == 3

    def test_not_utf8(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_bytes(b'{"terms": ["caf\xe9"]}')
        with pytest.raises(DataError, match="UTF-8"):
            load_model(path)
