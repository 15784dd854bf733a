import logging
from typing import Sequence

import numpy as np

from frugal.errors import DegenerateDataError, ShapeError
from frugal.models import LinearModel

logger = logging.getLogger(__name__)

DEFAULT_LAMBDA = 1e-4
DEFAULT_EPOCHS = 100


def _signed(y: np.ndarray) -> np.ndarray:
    return np.where(np.asarray(y, dtype=bool), 1.0, -1.0)


def svm_fit(X: np.ndarray, y: np.ndarray, lam: float = DEFAULT_LAMBDA, epochs: int = DEFAULT_EPOCHS,
            seed: int = 1) -> LinearModel:
    """
    Linear max-margin classifier, Pegasos-style hinge-loss SGD.

    Step t uses learning rate 1/(lam * t). The bias is learned as the weight of
    a constant input so it shrinks with the rest of w, and after every step w
    is projected onto the ball of radius 1/sqrt(lam).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=bool)
    if X.ndim != 2 or X.shape[1] < 1:
        raise ShapeError("SVM needs at least one feature")
    if X.shape[0] != len(y):
        raise ShapeError(f"{X.shape[0]} rows but {len(y)} labels")
    if len(y) == 0 or y.all() or not y.any():
        raise DegenerateDataError("SVM training data has a single class")

    signs = _signed(y)
    Xa = np.hstack([X, np.ones((X.shape[0], 1))])
    w = np.zeros(Xa.shape[1])
    radius = 1.0 / np.sqrt(lam)
    rng = np.random.default_rng(seed)

    t = 0
    for _ in range(epochs):
        for i in rng.permutation(X.shape[0]):
            t += 1
            eta = 1.0 / (lam * t)
            margin = signs[i] * (w @ Xa[i])
            w *= 1.0 - eta * lam
            if margin < 1.0:
                w += eta * signs[i] * Xa[i]
            norm = np.linalg.norm(w)
            if norm > radius:
                w *= radius / norm

    logger.debug(f"SVM fit on {X.shape[0]} rows x {X.shape[1]} features, |w|={np.linalg.norm(w):.4g}")
    return LinearModel(weights=w[:-1].copy(), bias=float(w[-1]), lam=lam, epochs=epochs, seed=seed)


def decision_function(model: LinearModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != model.n_features:
        raise ShapeError(f"row has {X.shape[1]} features, model was trained on {model.n_features}")
    return X @ model.weights + model.bias


def svm_predict(model: LinearModel, row: Sequence[float]) -> bool:
    # non-positive scores are the negative class
    return bool(decision_function(model, row)[0] > 0)


def svm_predict_many(model: LinearModel, X: np.ndarray) -> np.ndarray:
    return decision_function(model, X) > 0


def hinge_objective(model: LinearModel, X: np.ndarray, y: np.ndarray) -> float:
    """lam/2 * |w|^2 + mean hinge loss, bias included in w as during training."""
    margins = _signed(y) * decision_function(model, X)
    w_sq = float(model.weights @ model.weights) + model.bias ** 2
    return 0.5 * model.lam * w_sq + float(np.mean(np.maximum(0.0, 1.0 - margins)))
