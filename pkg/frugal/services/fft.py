"""
Fast-and-Frugal Trees.

A tree of depth d asks d questions in order. Every question has an exit:
rows that satisfy the cue leave with that level's exit label, the rest fall
through. Rows that survive all d questions get the opposite of the last exit.

    if topic 1 > 0.80 then false
    else if topic 7 > 0.60 then true
    else if topic 3 > 0.65 then true
    else if topic 5 <= 0.50 then true
    else false

Training grows one tree per exit policy (2^d of them) and keeps the best one
on the training data.
"""
import itertools
import logging
import re
from typing import Dict, List, Optional, Sequence

import numpy as np

from frugal.errors import ConfigError, DegenerateDataError, ShapeError
from frugal.models import Cue, Direction, ExitPolicy, FrugalTree, Goal

logger = logging.getLogger(__name__)

DEFAULT_DEPTH = 4
MAX_DEPTH = 10
PERCENTILES = np.arange(10, 100, 10)
TOPIC_WORDS_PER_LINE = 8

PASS_THROUGH = Cue(feature=0, direction=Direction.GT, threshold=float("inf"))

# A precision tree must flag at least this share of the training positives.
MIN_PRECISION_SUPPORT = 0.25


def score(goal: Goal, actual: np.ndarray, predicted: np.ndarray) -> float:
    """
    Training score of a whole tree. Precision is 0 when the tree flags fewer
    rows than MIN_PRECISION_SUPPORT times the number of positives.
    """
    tp = int(np.sum(actual & predicted))
    if goal == Goal.PRECISION:
        denom = int(np.sum(predicted))
        if denom < MIN_PRECISION_SUPPORT * int(np.sum(actual)):
            return 0.0
    else:
        denom = int(np.sum(actual))
    return tp / denom if denom else 0.0


def enumerate_policies(d: int) -> List[ExitPolicy]:
    if d < 1:
        raise ConfigError(f"FFT depth must be >= 1, got {d}")
    if d > MAX_DEPTH:
        raise ConfigError(f"FFT depth {d} exceeds the limit of {MAX_DEPTH}")
    return [ExitPolicy(bits=list(bits)) for bits in itertools.product([False, True], repeat=d)]


def _level_scores(exit_masks: np.ndarray, y: np.ndarray, exit_label: bool, goal: Goal) -> np.ndarray:
    """Goal metric for each candidate mask (rows = candidates)."""
    predicted = exit_masks if exit_label else ~exit_masks
    tp = (predicted & y).sum(axis=1)
    denom = predicted.sum(axis=1) if goal == Goal.PRECISION else np.full(len(predicted), y.sum())
    return np.divide(tp, denom, out=np.zeros(len(predicted)), where=denom > 0)


def learn_level_cue(X: np.ndarray, y: np.ndarray, exit_label: bool, goal: Goal) -> Cue:
    """
    Scans feature x direction x percentile-threshold candidates over the rows
    still in play. Exit side gets `exit_label`, the other side its negation.
    Ties: lower feature, then smaller threshold, then '>' before '<='.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=bool)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise DegenerateDataError("cue learning needs at least one row and one feature")

    if np.all(X == X[0]):
        return Cue(feature=0, direction=Direction.GT, threshold=float(X[0, 0]))

    best: Optional[Cue] = None
    best_score = -1.0
    for f in range(X.shape[1]):
        col = X[:, f]
        thresholds = np.unique(np.percentile(col, PERCENTILES))
        gt = col[None, :] > thresholds[:, None]
        # candidate order: (t0, >), (t0, <=), (t1, >), ...
        masks = np.empty((2 * len(thresholds), len(col)), dtype=bool)
        masks[0::2] = gt
        masks[1::2] = ~gt
        scores = _level_scores(masks, y, exit_label, goal)
        i = int(np.argmax(scores))
        if scores[i] > best_score:
            best_score = float(scores[i])
            best = Cue(
                feature=f,
                direction=Direction.GT if i % 2 == 0 else Direction.LE,
                threshold=float(thresholds[i // 2]),
            )
    return best


def _cue_mask(X: np.ndarray, cue: Cue) -> np.ndarray:
    col = X[:, cue.feature]
    return col > cue.threshold if cue.direction == Direction.GT else col <= cue.threshold


def predict_many(tree: FrugalTree, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    out = np.full(X.shape[0], tree.policy.final_label, dtype=bool)
    undecided = np.ones(X.shape[0], dtype=bool)
    for cue, bit in zip(tree.cues, tree.policy.bits):
        fire = undecided & _cue_mask(X, cue)
        out[fire] = bit
        undecided &= ~fire
    return out


def exit_counts(tree: FrugalTree, X: np.ndarray) -> List[int]:
    """Rows leaving at each level, plus the final leaf as the last entry."""
    X = np.asarray(X, dtype=np.float64)
    undecided = np.ones(X.shape[0], dtype=bool)
    counts = []
    for cue in tree.cues:
        fire = undecided & _cue_mask(X, cue)
        counts.append(int(fire.sum()))
        undecided &= ~fire
    counts.append(int(undecided.sum()))
    return counts


def _check_train(X: np.ndarray, y: np.ndarray) -> None:
    if len(y) == 0 or y.all() or not y.any():
        raise DegenerateDataError("degenerate training fold")
    if X.shape[0] != len(y):
        raise ShapeError(f"{X.shape[0]} rows but {len(y)} labels")


def grow_tree(X: np.ndarray, y: np.ndarray, policy: ExitPolicy, goal: Goal) -> FrugalTree:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=bool)
    _check_train(X, y)

    cues: List[Cue] = []
    remaining = np.ones(len(y), dtype=bool)
    for bit in policy.bits:
        if not remaining.any():
            cues.append(PASS_THROUGH)
            continue
        cue = learn_level_cue(X[remaining], y[remaining], bit, goal)
        cues.append(cue)
        remaining &= ~_cue_mask(X, cue)

    tree = FrugalTree(policy=policy, cues=cues, goal=goal, training_score=0.0, n_features=X.shape[1])
    tree.training_score = score(goal, y, predict_many(tree, X))
    return tree


def grow_all(X: np.ndarray, y: np.ndarray, d: int = DEFAULT_DEPTH, goal: Goal = Goal.RECALL) -> List[FrugalTree]:
    return [grow_tree(X, y, policy, goal) for policy in enumerate_policies(d)]


def train_best(X: np.ndarray, y: np.ndarray, d: int = DEFAULT_DEPTH, goal: Goal = Goal.RECALL) -> FrugalTree:
    """
    Grows all 2^d trees and keeps the best training score.
    Policies come in lexicographic order, so strict '>' keeps the smallest on ties.
    """
    best: Optional[FrugalTree] = None
    for tree in grow_all(X, y, d, goal):
        if best is None or tree.training_score > best.training_score:
            best = tree
    logger.debug(f"Best FFT {best.policy.as_string()} {goal.value}={best.training_score:.3f}")
    return best


def predict(tree: FrugalTree, row: Sequence[float]) -> bool:
    row = np.asarray(row, dtype=np.float64)
    if tree.n_features and row.shape[0] != tree.n_features:
        raise ShapeError(f"row has {row.shape[0]} features, tree was trained on {tree.n_features}")
    for cue, bit in zip(tree.cues, tree.policy.bits):
        if cue.feature >= row.shape[0]:
            raise ShapeError(f"row has {row.shape[0]} features, cue needs feature {cue.feature}")
        if cue.matches(row[cue.feature]):
            return bit
    return tree.policy.final_label


# --- rule text ---

def _label(value: bool) -> str:
    return "true" if value else "false"


def _format_threshold(value: float, decimals: Optional[int]) -> str:
    if decimals is None:
        return repr(float(value))
    return f"{value:.{decimals}f}"


def render_rules(tree: FrugalTree, feature_names: Sequence[str],
                 topic_top_words: Optional[Dict[int, List[str]]] = None,
                 decimals: Optional[int] = 2) -> str:
    """
    d if/else-if lines plus a final else. With topic words, a blank line and
    one 'Topic i: w1 ... w8' line per topic the tree references.
    decimals=None prints thresholds at full precision.
    """
    lines = []
    for level, (cue, bit) in enumerate(zip(tree.cues, tree.policy.bits)):
        keyword = "if" if level == 0 else "else if"
        threshold = _format_threshold(cue.threshold, decimals)
        lines.append(f"{keyword} {feature_names[cue.feature]} {cue.direction.value} {threshold} then {_label(bit)}")
    lines.append(f"else {_label(tree.policy.final_label)}")

    if topic_top_words is not None:
        lines.append("")
        for f in tree.referenced_features():
            words = topic_top_words.get(f, [])[:TOPIC_WORDS_PER_LINE]
            lines.append(f"Topic {f}: {' '.join(words)}")
    return "\n".join(lines) + "\n"


_RULE = re.compile(r"^(?:if|else if) (.+) (>|<=) (\S+) then (true|false)$")
_ELSE = re.compile(r"^else (true|false)$")


def parse_rules(text: str, feature_names: Sequence[str]) -> FrugalTree:
    """
    Reads the rule block written by render_rules back into a tree.
    Topic-word lines after the blank line are ignored.
    """
    index = {name: i for i, name in enumerate(feature_names)}
    cues: List[Cue] = []
    bits: List[bool] = []
    final: Optional[bool] = None
    for line in text.splitlines():
        line = line.strip()
        if not line:
            break
        m = _RULE.match(line)
        if m:
            name, op, threshold, label = m.groups()
            if name not in index:
                raise ConfigError(f"unknown feature in rules: {name}")
            cues.append(Cue(feature=index[name], direction=Direction(op), threshold=float(threshold)))
            bits.append(label == "true")
            continue
        m = _ELSE.match(line)
        if m:
            final = m.group(1) == "true"
            break
        raise ConfigError(f"unreadable rule line: {line}")

    if not cues or final is None or final == bits[-1]:
        raise ConfigError("rule block must end with an else that negates the last exit")
    return FrugalTree(policy=ExitPolicy(bits=bits), cues=cues, goal=Goal.RECALL, training_score=0.0,
                      n_features=len(feature_names))
