"""
simplex-metric: learn a Riemannian metric on the multinomial simplex from a text
corpus and compare its geodesic distance with TFIDF-cosine and TF-L2 distances.
"""
import argparse
import json
import logging
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from tqdm import tqdm

import config
from analytics.statistics import rank_value_trend
from data.model_file import ModelFile, load_model, save_model
from data.validation import load_corpus
from engines.corpus_engine import (
    EmbeddingConfig,
    build_vocabulary,
    count_document,
    embed_document,
    export_ranked_scores,
    idf_weights,
    prepare_corpus,
    tf_l2_distance,
    tfidf_cosine_distance,
    tokenize,
    vectorize_corpus,
    vocabulary_table,
)
from engines.evaluation_engine import DistanceKind, run_experiment, score_comparison
from engines.geometry_engine import fisher_distance, geodesic_distance
from engines.optimizer_engine import OptimizerConfig, estimate_theta
from engines.partition_engine import half_dimension, log_partition, log_partition_gradient
from engines.profile_engine import volume_profile
from engines.synthetic_engine import make_synthetic_corpus
from errors import DataError, DomainError, NumericError, ToolkitError, UsageError

LOGGER = logging.getLogger("simplex_metric")

BENCH_DEFAULT_NS = [1, 63, 511]
BENCH_REPEATS = 3


# --- Parser ---

class CliParser(argparse.ArgumentParser):
    """argparse exits with 2 on bad arguments; usage errors here exit with EXIT_USAGE."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(config.EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _corpus_flags(parser, required=True):
    parser.add_argument("--corpus", required=required, help="corpus directory (<label>/<doc>.txt) or JSONL file")
    parser.add_argument("--format", dest="fmt", choices=config.CORPUS_FORMATS, help="corpus format (default: detect)")
    parser.add_argument("--min-count", type=int, default=config.DEFAULT_MIN_COUNT, help="minimum corpus frequency of a term")
    parser.add_argument("--no-pad", dest="pad", action="store_false", help="do not pad an odd vocabulary with a dummy term")


def _optimizer_flags(parser):
    parser.add_argument("--step", type=float, default=config.DEFAULT_STEP, help="initial exponentiated-gradient step")
    parser.add_argument("--tol", type=float, default=config.DEFAULT_TOL, help="relative loglikelihood tolerance")
    parser.add_argument("--max-iter", type=int, default=config.DEFAULT_MAX_ITER)


def build_parser():
    parser = CliParser(prog=config.APP_TITLE, description=config.APP_SUBTITLE)
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings only")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=CliParser)

    learn = sub.add_parser("learn", help="fit theta on a corpus and write a model file")
    _corpus_flags(learn)
    learn.add_argument("--alpha", type=float, default=config.DEFAULT_ALPHA, help="smoothing pseudocount")
    learn.add_argument("--seed", type=int, default=config.DEFAULT_SEED)
    _optimizer_flags(learn)
    learn.add_argument("--out", default=config.MODEL_FILE, help="model file to write")

    dist = sub.add_parser("dist", help="distance between two text documents under a saved model")
    dist.add_argument("--model", required=True)
    dist.add_argument("--kind", choices=config.DISTANCE_KINDS, default="learned")
    dist.add_argument("docs", nargs=2, metavar="DOC", help="plain-text document files")

    ev = sub.add_parser("eval", help="nearest-neighbor error over repeated random splits")
    _corpus_flags(ev)
    ev.add_argument("--alpha", type=float, default=config.DEFAULT_ALPHA)
    ev.add_argument("--sizes", type=int, nargs="+", default=config.DEFAULT_SIZES)
    ev.add_argument("--repeats", type=int, default=config.DEFAULT_REPEATS)
    ev.add_argument("--seed", type=int, default=config.DEFAULT_SEED)
    ev.add_argument("--kinds", nargs="+", choices=config.DISTANCE_KINDS, default=config.DEFAULT_KINDS)
    ev.add_argument("--neighbors", type=int, default=config.DEFAULT_NEIGHBORS)
    ev.add_argument("--model", help="use this model's fixed metric instead of refitting per split")
    _optimizer_flags(ev)
    ev.add_argument("--out", default=config.REPORT_FILE, help="report CSV")
    ev.add_argument("--json", dest="json_out", help="optional JSON mirror of the report")

    scores = sub.add_parser("scores", help="rank terms by learned lambda and by IDF")
    scores.add_argument("--model", required=True)
    _corpus_flags(scores)
    scores.add_argument("--top-k", type=int, default=config.DEFAULT_TOP_K)
    scores.add_argument("--out", default=".", help="output directory")

    bench = sub.add_parser("bench-z", help="time the partition function and its gradient")
    bench.add_argument("--ns", type=int, nargs="+", default=BENCH_DEFAULT_NS, help="odd simplex dimensions")
    bench.add_argument("--seed", type=int, default=config.DEFAULT_SEED)
    bench.add_argument("--out", help="CSV file (default: stdout)")

    vocab = sub.add_parser("vocab", help="write the corpus vocabulary")
    _corpus_flags(vocab)
    vocab.add_argument("--out", help="CSV file (default: stdout)")

    profile = sub.add_parser("profile", help="inverse volume and geodesic distance along P_1")
    profile.add_argument("--grid", type=int, default=config.PROFILE_GRID)
    profile.add_argument("--out", help="CSV file (default: stdout)")

    synth = sub.add_parser("synth", help="write the synthetic two-class benchmark corpus as JSONL")
    synth.add_argument("--docs", dest="n_docs", type=int, default=400)
    synth.add_argument("--seed", type=int, default=config.DEFAULT_SEED)
    synth.add_argument("--out", help="JSONL file (default: stdout)")
    return parser


# --- Configuration ---

@dataclass(frozen=True)
class CliConfig:
    command: str
    corpus: str = None
    fmt: str = None
    alpha: float = config.DEFAULT_ALPHA
    min_count: int = config.DEFAULT_MIN_COUNT
    pad: bool = config.DEFAULT_PAD
    sizes: tuple = tuple(config.DEFAULT_SIZES)
    repeats: int = config.DEFAULT_REPEATS
    seed: int = config.DEFAULT_SEED
    kinds: tuple = tuple(config.DEFAULT_KINDS)
    neighbors: int = config.DEFAULT_NEIGHBORS
    model: str = None
    out: str = None
    json_out: str = None
    kind: str = "learned"
    docs: tuple = ()
    top_k: int = config.DEFAULT_TOP_K
    ns: tuple = tuple(BENCH_DEFAULT_NS)
    grid: int = config.PROFILE_GRID
    n_docs: int = 400
    optimizer: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.alpha <= 0:
            raise UsageError(f"--alpha must be positive, got {self.alpha}")
        if self.min_count < 1:
            raise UsageError(f"--min-count must be at least 1, got {self.min_count}")
        if self.repeats < 1:
            raise UsageError(f"--repeats must be at least 1, got {self.repeats}")
        if self.neighbors < 1:
            raise UsageError(f"--neighbors must be at least 1, got {self.neighbors}")
        if any(s < 1 for s in self.sizes):
            raise UsageError(f"--sizes must be positive, got {list(self.sizes)}")
        if self.top_k < 1:
            raise UsageError(f"--top-k must be at least 1, got {self.top_k}")
        if self.grid < 1:
            raise UsageError(f"--grid must be at least 1, got {self.grid}")
        if self.seed < 0:
            raise UsageError(f"--seed must be nonnegative, got {self.seed}")
        even = [n for n in self.ns if n < 1 or n % 2 == 0]
        if even:
            raise UsageError(f"bench-z needs odd positive n (n + 1 even), got {even}")
        try:
            OptimizerConfig(seed=self.seed, **self.optimizer)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc

    @classmethod
    def from_args(cls, args):
        values = dict(vars(args))
        values.pop("verbose", None)
        values.pop("quiet", None)
        optimizer = {key: values.pop(key) for key in ("step", "tol", "max_iter") if key in values}
        for key in ("sizes", "kinds", "docs", "ns"):
            if key in values:
                values[key] = tuple(values[key])
        return cls(optimizer=optimizer, **values)

    @property
    def optimizer_config(self):
        return OptimizerConfig(seed=self.seed, **self.optimizer)

    @property
    def embedding(self):
        return EmbeddingConfig(alpha=self.alpha)


# --- Output Helpers ---

def _write_table(df, path):
    if path is None:
        df.to_csv(sys.stdout, index=False, float_format="%.17g")
        return
    df.to_csv(path, index=False, float_format="%.17g")
    LOGGER.info("Wrote %d rows to %s", len(df), path)


def _read_text(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except UnicodeDecodeError as exc:
        raise DataError(f"{path} is not valid UTF-8 ({exc.reason})") from exc


# --- Commands ---

def cmd_learn(cfg):
    df = load_corpus(cfg.corpus, cfg.fmt)
    corpus = prepare_corpus(df, min_count=cfg.min_count, pad=cfg.pad, cfg=cfg.embedding)
    fit = estimate_theta(corpus.tf, cfg.optimizer_config)
    model = ModelFile.from_fit(fit, corpus.vocab, corpus.idf, corpus.embedding)
    save_model(model, cfg.out)
    print(f"loglikelihood {fit.final_loglikelihood!r}")
    print(f"iterations {fit.iterations}")
    return model


def cmd_dist(cfg):
    model = load_model(cfg.model)
    vocab = model.vocab
    docs = [count_document(tokenize(_read_text(path)), vocab, doc_id=path) for path in cfg.docs]
    if cfg.kind == "tfidf":
        value = tfidf_cosine_distance(docs[0], docs[1], model.idf)
    else:
        a, b = (embed_document(doc, vocab, model.embedding) for doc in docs)
        if cfg.kind == "learned":
            value = geodesic_distance(model.lambda_metric, a, b)
        elif cfg.kind == "fisher":
            value = fisher_distance(a, b)
        else:
            value = tf_l2_distance(a, b)
    print(f"{value:.12g}")
    return value


def cmd_eval(cfg):
    df = load_corpus(cfg.corpus, cfg.fmt)
    model = load_model(cfg.model) if cfg.model else None
    vocab = model.vocab if model else None
    corpus = prepare_corpus(df, min_count=cfg.min_count, pad=cfg.pad, cfg=cfg.embedding, vocab=vocab)

    kinds = []
    for name in cfg.kinds:
        if name == "learned" and model is not None:
            kinds.append(DistanceKind.learned(model.lambda_metric))
        else:
            kinds.append(DistanceKind(name))
    if any(k.name == "learned" and k.param is None for k in kinds):
        half_dimension(len(corpus.vocab))

    report = run_experiment(
        corpus, cfg.sizes, cfg.repeats, cfg.seed, kinds,
        neighbors=cfg.neighbors, optimizer_cfg=cfg.optimizer_config,
    )
    report.to_csv(cfg.out)
    LOGGER.info("Wrote report to %s", cfg.out)
    if cfg.json_out:
        report.to_json(cfg.json_out)
        LOGGER.info("Wrote report JSON to %s", cfg.json_out)
    return report


def cmd_scores(cfg):
    model = load_model(cfg.model)
    vocab = model.vocab
    df = load_corpus(cfg.corpus, cfg.fmt)
    idf = idf_weights(vectorize_corpus(df, vocab), vocab)

    os.makedirs(cfg.out, exist_ok=True)
    lam_ranked = export_ranked_scores(model.lambda_metric.coords, vocab)
    idf_ranked = export_ranked_scores(idf.values, vocab)
    _write_table(lam_ranked, os.path.join(cfg.out, config.LAMBDA_RANKING_FILE))
    _write_table(idf_ranked, os.path.join(cfg.out, config.IDF_RANKING_FILE))

    top_k = cfg.top_k
    n_terms = len(vocab.real_terms)
    if top_k > n_terms:
        LOGGER.warning("--top-k %d exceeds the %d model terms; using %d", top_k, n_terms, n_terms)
        top_k = n_terms
    comparison = score_comparison(model.lambda_metric, idf, vocab, top_k=top_k)
    _write_table(comparison["table"], os.path.join(cfg.out, "comparison.csv"))
    summary = {
        "jaccard_top": comparison["jaccard_top"],
        "jaccard_bottom": comparison["jaccard_bottom"],
        "lambda_trend": rank_value_trend(lam_ranked["score"]),
        "idf_trend": rank_value_trend(idf_ranked["score"]),
    }
    print(json.dumps(summary, indent=2, sort_keys=True))
    return summary


def cmd_bench_z(cfg):
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for n in tqdm(cfg.ns, desc="bench-z", disable=not LOGGER.isEnabledFor(logging.INFO)):
        lam = rng.dirichlet(np.ones(n + 1))
        lam = np.maximum(lam, 1e-12)
        lam /= lam.sum()
        timings = {}
        for name, func in (("partition_ms", log_partition), ("gradient_ms", log_partition_gradient)):
            best = np.inf
            for _ in range(BENCH_REPEATS):
                start = time.perf_counter()
                result = func(lam)
                best = min(best, time.perf_counter() - start)
            if not np.all(np.isfinite(getattr(result, "value", result))):
                raise NumericError(f"Non-finite {name[:-3]} result at n = {n}")
            timings[name] = max(best * 1000.0, np.finfo(float).tiny)
        rows.append({"n": n, **timings})
    table = pd.DataFrame(rows, columns=config.COLS_BENCH)
    _write_table(table, cfg.out)
    return table


def cmd_vocab(cfg):
    df = load_corpus(cfg.corpus, cfg.fmt)
    vocab = build_vocabulary((tokenize(text) for text in df["text"]), min_count=cfg.min_count, pad=cfg.pad)
    table = vocabulary_table(vectorize_corpus(df, vocab), vocab)
    _write_table(table, cfg.out)
    return table


def cmd_profile(cfg):
    table = volume_profile(grid=cfg.grid)
    _write_table(table, cfg.out)
    return table


def cmd_synth(cfg):
    df = make_synthetic_corpus(cfg.n_docs, seed=cfg.seed)
    text = df.to_json(orient="records", lines=True)
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        LOGGER.info("Wrote %d documents to %s", len(df), cfg.out)
    return df


COMMANDS = {
    "learn": cmd_learn,
    "dist": cmd_dist,
    "eval": cmd_eval,
    "scores": cmd_scores,
    "bench-z": cmd_bench_z,
    "vocab": cmd_vocab,
    "profile": cmd_profile,
    "synth": cmd_synth,
}


# --- Entry Point ---

def configure_logging(verbose=False, quiet=False):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv=None):
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    try:
        cfg = CliConfig.from_args(args)
        COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        LOGGER.error("%s", exc)
        return config.EXIT_USAGE
    except NumericError as exc:
        LOGGER.error("Numeric failure: %s", exc)
        return config.EXIT_NUMERIC
    except (DataError, DomainError, OSError) as exc:
        LOGGER.error("%s", exc)
        return config.EXIT_DATA
    except ToolkitError as exc:
        LOGGER.error("%s", exc)
        return config.EXIT_DATA
    return config.EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
