import json
import logging
import os

import pandas as pd

import config
from errors import DataError

LOGGER = logging.getLogger(__name__)


def validate_dataframe(df, expected_cols):
    """General validation logic for any corpus dataframe."""
    missing_cols = [col for col in expected_cols if col not in df.columns]
    if missing_cols:
        raise DataError(f"Missing columns: {missing_cols}")
    before = len(df)
    df = df.dropna(subset=[expected_cols[0], expected_cols[1]])  # Drop rows missing key identifiers
    if len(df) < before:
        LOGGER.warning("Dropped %d documents without id or label", before - len(df))

    df = df.astype({"id": str, "label": str})
    df["text"] = df["text"].fillna("").astype(str)
    duplicated = df["id"][df["id"].duplicated()]
    if not duplicated.empty:
        raise DataError(f"Duplicate document ids: {sorted(duplicated.unique())[:5]}")
    if df.empty:
        raise DataError("Corpus contains no documents")
    return df.reset_index(drop=True)


def load_corpus_dir(root):
    """Loads a <root>/<label>/<docid>.txt tree; labels and ids are taken from the path."""
    if not os.path.isdir(root):
        raise DataError(f"Corpus directory not found: {root}")
    records = []
    for label in sorted(os.listdir(root)):
        label_dir = os.path.join(root, label)
        if not os.path.isdir(label_dir):
            continue
        for name in sorted(os.listdir(label_dir)):
            if not name.endswith(".txt"):
                continue
            path = os.path.join(label_dir, name)
            try:
                with open(path, encoding="utf-8") as fh:
                    text = fh.read()
            except UnicodeDecodeError as exc:
                raise DataError(f"{path} is not valid UTF-8 ({exc.reason} at byte {exc.start})") from exc
            records.append({"id": f"{label}/{name[:-4]}", "label": label, "text": text})
    return validate_dataframe(pd.DataFrame(records, columns=config.COLS_CORPUS), config.COLS_CORPUS)


def load_corpus_jsonl(path):
    """Loads one {"id", "label", "text"} object per line; a bad line raises DataError with its number."""
    records = []
    with open(path, "rb") as fh:
        for line_no, raw in enumerate(fh, start=1):
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise DataError(f"{path} is not valid UTF-8 ({exc.reason})", line=line_no) from exc
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"invalid JSON ({exc.msg})", line=line_no) from exc
            if not isinstance(obj, dict):
                raise DataError("expected a JSON object", line=line_no)
            missing = [col for col in config.COLS_CORPUS if col not in obj]
            if missing:
                raise DataError(f"missing fields {missing}", line=line_no)
            records.append({col: obj[col] for col in config.COLS_CORPUS})
    return validate_dataframe(pd.DataFrame(records, columns=config.COLS_CORPUS), config.COLS_CORPUS)


def load_corpus(path, fmt=None):
    """Dispatches on --format; without one, directories load as trees and files as JSONL."""
    if fmt is None:
        fmt = "dir" if os.path.isdir(path) else "jsonl"
    if fmt not in config.CORPUS_FORMATS:
        raise DataError(f"Unknown corpus format {fmt!r}, expected one of {config.CORPUS_FORMATS}")
    df = load_corpus_dir(path) if fmt == "dir" else load_corpus_jsonl(path)
    LOGGER.info("Loaded %d documents in %d classes from %s", len(df), df["label"].nunique(), path)
    return df
