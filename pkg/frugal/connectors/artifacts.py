"""
Artifact store. Every file goes through `write_text`, which writes a temp file
next to the target and renames it into place, so a crashed run never leaves a
half-written result behind.
"""
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, List, Sequence, Union

import numpy as np
import pandas as pd

from frugal.errors import DatasetError
from frugal.models import (
    Corpus, Cue, Direction, ExitPolicy, FeatureMatrix, FrugalTree, Goal, LdaConfig, LinearModel, RunRecord,
    TopicModel, Vocabulary,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

RESULT_COLUMNS = ["dataset", "method", "repeat", "fold", "metric", "value", "runtime_ms"]


def write_text(path: PathLike, text: str) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    logger.debug(f"Wrote {target}")
    return target


def save_json(path: PathLike, payload: Any) -> Path:
    # thresholds may be +inf (pass-through cues)
    return write_text(path, json.dumps(payload, indent=2, allow_nan=True))


def load_json(path: PathLike) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise DatasetError(f"artifact not found: {path}")
    except json.JSONDecodeError as e:
        raise DatasetError(f"corrupt artifact {path}: {e}") from e


def save_frame(path: PathLike, frame: pd.DataFrame) -> Path:
    return write_text(path, frame.to_csv(index=False, lineterminator="\n"))


# --- corpus ---

def corpus_to_dict(corpus: Corpus) -> dict:
    return corpus.model_dump()


def save_corpus(path: PathLike, corpus: Corpus) -> Path:
    return save_json(path, corpus_to_dict(corpus))


def load_corpus(path: PathLike) -> Corpus:
    return Corpus.model_validate(load_json(path))


# --- topic model / features ---

def save_topic_model(path: PathLike, model: TopicModel) -> Path:
    return save_json(path, {
        "config": model.config.model_dump(),
        "vocabulary": model.vocabulary.model_dump(),
        "topic_word_counts": model.topic_word_counts.tolist(),
        "doc_topic": model.doc_topic.tolist(),
    })


def load_topic_model(path: PathLike) -> TopicModel:
    data = load_json(path)
    return TopicModel(
        config=LdaConfig.model_validate(data["config"]),
        vocabulary=Vocabulary.model_validate(data["vocabulary"]),
        topic_word_counts=np.asarray(data["topic_word_counts"], dtype=np.int64),
        doc_topic=np.asarray(data["doc_topic"], dtype=np.float64),
    )


def features_frame(matrix: FeatureMatrix) -> pd.DataFrame:
    """Header `doc_id,f0..f{n-1}`; column i holds feature i."""
    frame = pd.DataFrame(matrix.values, columns=[f"f{i}" for i in range(matrix.n_features)])
    frame.insert(0, "doc_id", matrix.doc_ids)
    return frame


def save_features(path: PathLike, matrix: FeatureMatrix) -> Path:
    return save_frame(path, features_frame(matrix))


# --- classifiers ---

def tree_to_dict(tree: FrugalTree) -> dict:
    return {
        "policy": tree.policy.as_string(),
        "cues": [{"feature": c.feature, "direction": c.direction.value, "threshold": c.threshold} for c in tree.cues],
        "goal": tree.goal.value,
        "training_score": tree.training_score,
        "n_features": tree.n_features,
    }


def tree_from_dict(data: dict) -> FrugalTree:
    return FrugalTree(
        policy=ExitPolicy.from_string(data["policy"]),
        cues=[Cue(feature=c["feature"], direction=Direction(c["direction"]), threshold=float(c["threshold"]))
              for c in data["cues"]],
        goal=Goal(data["goal"]),
        training_score=float(data["training_score"]),
        n_features=int(data.get("n_features", 0)),
    )


def save_tree(path: PathLike, tree: FrugalTree) -> Path:
    return save_json(path, tree_to_dict(tree))


def load_tree(path: PathLike) -> FrugalTree:
    return tree_from_dict(load_json(path))


def save_svm(path: PathLike, model: LinearModel) -> Path:
    return save_json(path, {
        "weights": model.weights.tolist(),
        "bias": model.bias,
        "lambda": model.lam,
        "epochs": model.epochs,
        "seed": model.seed,
    })


def load_svm(path: PathLike) -> LinearModel:
    data = load_json(path)
    return LinearModel(
        weights=np.asarray(data["weights"], dtype=np.float64),
        bias=float(data["bias"]),
        lam=float(data["lambda"]),
        epochs=int(data["epochs"]),
        seed=int(data["seed"]),
    )


# --- experiment outputs ---

def results_frame(records: Sequence[RunRecord]) -> pd.DataFrame:
    rows = [{**r.model_dump(), "metric": r.metric.value} for r in sorted(records, key=lambda r: r.sort_key())]
    return pd.DataFrame(rows, columns=RESULT_COLUMNS)


def save_results(path: PathLike, records: Sequence[RunRecord]) -> Path:
    return save_frame(path, results_frame(records))


def load_results(path: PathLike) -> List[RunRecord]:
    try:
        frame = pd.read_csv(path, dtype={"dataset": str, "method": str, "metric": str})
    except FileNotFoundError:
        raise DatasetError(f"results file not found: {path}")
    missing = [c for c in RESULT_COLUMNS if c not in frame.columns]
    if missing:
        raise DatasetError(f"results file {path} lacks column(s): {', '.join(missing)}")
    return [
        RunRecord(dataset=row.dataset, method=row.method, repeat=int(row.repeat), fold=int(row.fold),
                  metric=Goal(row.metric), value=float(row.value), runtime_ms=float(row.runtime_ms))
        for row in frame.itertuples(index=False)
    ]


def load_frame(path: PathLike) -> pd.DataFrame:
    try:
        return pd.read_csv(path, dtype={"dataset": str, "method": str, "metric": str})
    except FileNotFoundError:
        raise DatasetError(f"file not found: {path}")
