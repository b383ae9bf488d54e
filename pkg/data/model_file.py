"""
JSON persistence for a fitted metric.

Floats go through Python's float repr (shortest string that reads back to the same
double, never more than 17 significant digits), so save -> load is bit-exact.
"""
import json
import logging
from dataclasses import dataclass

import numpy as np

import config
from engines.corpus_engine import EmbeddingConfig, IdfWeights, Vocabulary
from engines.geometry_engine import MetricParam, invert_param
from errors import DataError

LOGGER = logging.getLogger(__name__)

INVERSE_TOL = 1e-12


def _exact_param(values):
    """Validated metric parameter holding exactly the stored doubles (no renormalization)."""
    MetricParam.from_values(values)
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return MetricParam(arr)


@dataclass(frozen=True, eq=False)
class ModelFile:
    terms: tuple
    padded: bool
    theta_hat: MetricParam
    lambda_metric: MetricParam
    idf: IdfWeights
    embedding: EmbeddingConfig
    iterations: int
    final_loglikelihood: float
    seed: int
    version: int = config.FORMAT_VERSION

    def __post_init__(self):
        sizes = {len(self.terms), self.theta_hat.coords.size, self.lambda_metric.coords.size, self.idf.values.size}
        if len(sizes) != 1:
            raise DataError(f"Model vectors disagree in length: {sorted(sizes)}")
        if self.version != config.FORMAT_VERSION:
            raise DataError(f"Unsupported model format version {self.version!r} (expected {config.FORMAT_VERSION})")
        gap = np.max(np.abs(invert_param(self.theta_hat).coords - self.lambda_metric.coords))
        if gap > INVERSE_TOL:
            raise DataError(f"lambda_metric is not the group inverse of theta_hat (max gap {gap:.3g})")

    @property
    def vocab(self):
        return Vocabulary(tuple(self.terms), self.padded)

    @classmethod
    def from_fit(cls, fit, vocab, idf, embedding):
        return cls(
            terms=tuple(vocab.terms),
            padded=vocab.padded,
            theta_hat=fit.theta_hat,
            lambda_metric=fit.lambda_metric,
            idf=idf,
            embedding=embedding,
            iterations=fit.iterations,
            final_loglikelihood=fit.final_loglikelihood,
            seed=fit.seed,
        )

    def to_dict(self):
        return {
            "version": self.version,
            "terms": list(self.terms),
            "padded": self.padded,
            "theta_hat": [float(v) for v in self.theta_hat.coords],
            "lambda_metric": [float(v) for v in self.lambda_metric.coords],
            "idf": [float(v) for v in self.idf.values],
            "embedding": {"alpha": self.embedding.alpha},
            "fit": {
                "iterations": self.iterations,
                "final_loglikelihood": float(self.final_loglikelihood),
                "seed": self.seed,
            },
        }


def save_model(model, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_dict(), fh, indent=1, allow_nan=False)
        fh.write("\n")
    LOGGER.info("Wrote model with %d terms to %s", len(model.terms), path)


def load_model(path):
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataError(f"Model file {path} is not valid JSON: {exc.msg}", line=exc.lineno) from exc
    except UnicodeDecodeError as exc:
        raise DataError(f"Model file {path} is not valid UTF-8 ({exc.reason})") from exc

    try:
        return ModelFile(
            terms=tuple(str(t) for t in payload["terms"]),
            padded=bool(payload["padded"]),
            theta_hat=_exact_param(payload["theta_hat"]),
            lambda_metric=_exact_param(payload["lambda_metric"]),
            idf=IdfWeights(np.array(payload["idf"], dtype=float)),
            embedding=EmbeddingConfig(alpha=float(payload["embedding"]["alpha"])),
            iterations=int(payload["fit"]["iterations"]),
            final_loglikelihood=float(payload["fit"]["final_loglikelihood"]),
            seed=int(payload["fit"]["seed"]),
            version=payload["version"],
        )
    except DataError:
        raise
    except (KeyError, TypeError) as exc:
        raise DataError(f"Model file {path} is missing or mistypes field {exc}") from exc
    except ValueError as exc:
        raise DataError(f"Model file {path} holds an invalid value: {exc}") from exc
