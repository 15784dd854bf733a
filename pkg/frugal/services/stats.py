"""
Method ranking: Scott-Knott clustering gated by a bootstrap test and the A12
effect size. Two groups are only split when the difference is significant at
`conf` AND not small (A12 >= 0.6 in either direction).
"""
import logging
from collections import defaultdict
from typing import Dict, List, Mapping, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from frugal.models import Goal, MethodSummary, RankGroup, Ranking, RunRecord

logger = logging.getLogger(__name__)

DEFAULT_BOOTSTRAPS = 1000
DEFAULT_CONFIDENCE = 0.95
SMALL_EFFECT = 0.6

RANKING_COLUMNS = ["dataset", "metric", "rank", "method", "median", "iqr"]


def a12(x: Sequence[float], y: Sequence[float]) -> float:
    """Probability that a draw from x beats a draw from y, ties counting half."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    greater = np.sum(x[:, None] > y[None, :])
    equal = np.sum(x[:, None] == y[None, :])
    return float((greater + 0.5 * equal) / (len(x) * len(y)))


def _rng(seed: Union[int, np.random.Generator, None]) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def bootstrap_differs(left: Sequence[float], right: Sequence[float], b: int = DEFAULT_BOOTSTRAPS,
                      conf: float = DEFAULT_CONFIDENCE, seed: Union[int, np.random.Generator, None] = 0) -> bool:
    """
    Bootstrap test of the mean difference: both samples are shifted onto the
    pooled mean (so the null holds), resampled `b` times, and equality is
    rejected when resampled differences reach the observed one in fewer than
    (1 - conf) of the draws.
    """
    left = np.asarray(left, dtype=np.float64)
    right = np.asarray(right, dtype=np.float64)
    observed = abs(left.mean() - right.mean())
    pooled = np.concatenate([left, right]).mean()
    left0 = left - left.mean() + pooled
    right0 = right - right.mean() + pooled

    rng = _rng(seed)
    left_means = left0[rng.integers(len(left0), size=(b, len(left0)))].mean(axis=1)
    right_means = right0[rng.integers(len(right0), size=(b, len(right0)))].mean(axis=1)
    p_value = np.mean(np.abs(left_means - right_means) >= observed)
    return bool(p_value < 1.0 - conf)


def significant_split(left: Sequence[float], right: Sequence[float], b: int = DEFAULT_BOOTSTRAPS,
                      conf: float = DEFAULT_CONFIDENCE, seed: Union[int, np.random.Generator, None] = 0) -> bool:
    effect = max(a12(left, right), a12(right, left))
    if effect < SMALL_EFFECT:
        return False
    return bootstrap_differs(left, right, b, conf, seed)


def summarize(samples: Sequence[float]) -> Tuple[float, float]:
    """(median, IQR = 75th - 25th percentile)"""
    values = np.asarray(samples, dtype=np.float64)
    q25, q50, q75 = np.percentile(values, [25, 50, 75])
    return float(q50), float(q75 - q25)


def _best_cut(parts: List[np.ndarray]) -> Tuple[int, float]:
    """Cut index maximizing the between-group sum of squares of means, and that sum."""
    sizes = np.array([len(p) for p in parts], dtype=np.float64)
    sums = np.array([p.sum() for p in parts])
    total_n, total = sizes.sum(), sums.sum()
    mu = total / total_n
    best, best_ss = 1, -1.0
    for cut in range(1, len(parts)):
        n_left, s_left = sizes[:cut].sum(), sums[:cut].sum()
        n_right, s_right = total_n - n_left, total - s_left
        ss = n_left * (s_left / n_left - mu) ** 2 + n_right * (s_right / n_right - mu) ** 2
        if ss > best_ss:
            best, best_ss = cut, float(ss)
    return best, best_ss


def _cut_is_significant(parts: List[np.ndarray], cut: int, observed_ss: float, b: int, conf: float,
                        rng: np.random.Generator) -> bool:
    """
    Like significant_split, but the bootstrap null repeats the cut search:
    every group is shifted onto the grand mean and resampled, and the best
    cut of the resample is compared with the observed best cut. For two
    groups this is exactly the mean-difference bootstrap.
    """
    left = np.concatenate(parts[:cut])
    right = np.concatenate(parts[cut:])
    if max(a12(left, right), a12(right, left)) < SMALL_EFFECT:
        return False

    grand = np.concatenate(parts).mean()
    centered = [p - p.mean() + grand for p in parts]
    reached = 0
    for _ in range(b):
        resampled = [c[rng.integers(len(c), size=len(c))] for c in centered]
        if _best_cut(resampled)[1] >= observed_ss:
            reached += 1
    return reached / b < 1.0 - conf


def scott_knott(groups: Mapping[str, Sequence[float]], b: int = DEFAULT_BOOTSTRAPS,
                conf: float = DEFAULT_CONFIDENCE, seed: int = 1) -> Ranking:
    """
    Methods are sorted by descending median (name breaks ties), so rank 0 is
    the best group. Splits use means; reporting uses median and IQR.

    A cut is kept when the pooled sides differ by A12 >= 0.6 and pass
    _cut_is_significant, whose bootstrap null repeats the cut search over
    all groups. With two groups this is the same test as significant_split.
    """
    order = sorted(groups, key=lambda m: (-float(np.median(groups[m])), m))
    samples = {m: np.asarray(groups[m], dtype=np.float64) for m in order}
    rng = np.random.default_rng(seed)

    segments: List[List[str]] = []

    def divide(names: List[str]) -> None:
        if len(names) < 2:
            segments.append(names)
            return
        parts = [samples[n] for n in names]
        cut, ss = _best_cut(parts)
        if _cut_is_significant(parts, cut, ss, b, conf, rng):
            divide(names[:cut])
            divide(names[cut:])
        else:
            segments.append(names)

    if order:
        divide(order)

    ranked = []
    for rank, names in enumerate(segments):
        summaries = []
        for name in names:
            median, iqr = summarize(samples[name])
            summaries.append(MethodSummary(method=name, median=median, iqr=iqr))
        ranked.append(RankGroup(rank=rank, methods=summaries))
    return Ranking(groups=ranked)


def rank_records(records: Sequence[RunRecord], b: int = DEFAULT_BOOTSTRAPS, conf: float = DEFAULT_CONFIDENCE,
                 seed: int = 1) -> Dict[Tuple[str, Goal], Ranking]:
    grouped: Dict[Tuple[str, Goal], Dict[str, List[float]]] = defaultdict(lambda: defaultdict(list))
    for r in records:
        grouped[(r.dataset, r.metric)][r.method].append(r.value)

    rankings = {}
    for (dataset, metric), by_method in sorted(grouped.items(), key=lambda kv: (kv[0][0], kv[0][1].value)):
        rankings[(dataset, metric)] = scott_knott(by_method, b, conf, seed)
        logger.info(f"[{dataset}] {metric.value}: {rankings[(dataset, metric)].n_ranks} rank(s)")
    return rankings


def rankings_frame(rankings: Mapping[Tuple[str, Goal], Ranking]) -> pd.DataFrame:
    rows = []
    for (dataset, metric), ranking in rankings.items():
        for group in ranking.groups:
            for m in group.methods:
                rows.append({
                    "dataset": dataset, "metric": Goal(metric).value, "rank": group.rank,
                    "method": m.method, "median": m.median, "iqr": m.iqr,
                })
    return pd.DataFrame(rows, columns=RANKING_COLUMNS)


def rankings_from_frame(frame: pd.DataFrame) -> Dict[Tuple[str, Goal], Ranking]:
    rankings: Dict[Tuple[str, Goal], Ranking] = {}
    for (dataset, metric), part in frame.groupby(["dataset", "metric"], sort=True):
        groups = []
        for rank, rows in part.groupby("rank", sort=True):
            groups.append(RankGroup(rank=int(rank), methods=[
                MethodSummary(method=str(row.method), median=float(row.median), iqr=float(row.iqr))
                for row in rows.itertuples(index=False)
            ]))
        rankings[(str(dataset), Goal(metric))] = Ranking(groups=groups)
    return rankings
