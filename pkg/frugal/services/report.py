"""
Markdown experiment report.

Rank columns come only from the rankings frame, so a report can be rebuilt
offline from rankings.csv. Runtimes are wall-clock totals over every
(repeat, fold) cell of a method, LDADE tuning included, shown in minutes
rounded up as "<N".
"""
import logging
import math
from typing import List, Mapping, Optional, Sequence

import pandas as pd
from pydantic import BaseModel

from frugal.config import ExperimentConfig
from frugal.models import Corpus, FrugalTree, Goal, LdaConfig, RunRecord, TopicModel
from frugal.services import fft
from frugal.services.evalrig import method_runtimes
from frugal.services.features import lda_fit, top_words

logger = logging.getLogger(__name__)

RUNTIME_COLUMNS = ["dataset", "method", "total_ms", "minutes"]

# (challenger, baseline) pairs worth a sentence in the notes
DIRECTIONAL_PAIRS = [("fft_k10", "ldade_svm"), ("fft_k10", "tfidf_svm"), ("ldade_fft", "fft_k10")]


def runtime_minutes(ms: float) -> str:
    return f"<{math.floor(ms / 60000.0) + 1}"


def runtime_frame(records: Sequence[RunRecord]) -> pd.DataFrame:
    totals = method_runtimes(records)
    rows = [
        {"dataset": dataset, "method": method, "total_ms": ms, "minutes": runtime_minutes(ms)}
        for (dataset, method), ms in sorted(totals.items())
    ]
    return pd.DataFrame(rows, columns=RUNTIME_COLUMNS)


def _table(header: List[str], rows: List[List[str]]) -> List[str]:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines.extend("| " + " | ".join(row) + " |" for row in rows)
    return lines


def directional_notes(rankings: pd.DataFrame) -> List[str]:
    """Median comparisons between named method pairs; reported, never gated."""
    notes = []
    for (dataset, metric), part in rankings.groupby(["dataset", "metric"], sort=True):
        by_method = {row.method: row for row in part.itertuples(index=False)}
        for challenger, baseline in DIRECTIONAL_PAIRS:
            if challenger not in by_method or baseline not in by_method:
                continue
            a, b = by_method[challenger], by_method[baseline]
            delta = a.median - b.median
            verdict = "ahead of" if delta > 0 else "behind" if delta < 0 else "level with"
            notes.append(
                f"{dataset} {metric}: {challenger} is {verdict} {baseline} by {abs(delta):.3f} "
                f"(rank {int(a.rank)} vs {int(b.rank)})"
            )
    return notes


def render_report(rankings: pd.DataFrame, runtimes: Optional[pd.DataFrame] = None,
                  summaries: Optional[Mapping[str, str]] = None, title: str = "Experiment report") -> str:
    lines = [f"# {title}", ""]

    if summaries:
        lines += ["## Datasets", ""]
        lines += _table(["dataset", "summary"], [[name, summaries[name]] for name in sorted(summaries)])
        lines.append("")

    lines += [
        "## Results", "",
        "Rank 0 is the best Scott-Knott group. Methods sharing a rank are not "
        "distinguishable (bootstrap at the configured confidence plus A12 >= 0.6). "
        "Groups are split on means and reported by median and IQR.", "",
    ]
    for (dataset, metric), part in rankings.groupby(["dataset", "metric"], sort=True):
        part = part.sort_values(["rank", "median", "method"], ascending=[True, False, True])
        lines += [f"### {dataset} / {metric}", ""]
        lines += _table(
            ["rank", "method", "median", "iqr"],
            [[str(int(r.rank)), r.method, f"{r.median:.3f}", f"{r.iqr:.3f}"] for r in part.itertuples(index=False)],
        )
        lines.append("")

    if runtimes is not None and not runtimes.empty:
        datasets = sorted(runtimes["dataset"].unique())
        lines += ["## Runtime (minutes)", "",
                  "Total wall-clock time over all repeats and folds, tuning included.", ""]
        rows = []
        for method in sorted(runtimes["method"].unique()):
            cells = []
            for dataset in datasets:
                hit = runtimes[(runtimes["dataset"] == dataset) & (runtimes["method"] == method)]
                cells.append(hit["minutes"].iloc[0] if not hit.empty else "-")
            rows.append([method] + cells)
        lines += _table(["method"] + datasets, rows)
        lines.append("")

    notes = directional_notes(rankings)
    if notes:
        lines += ["## Notes", ""]
        lines += [f"- {n}" for n in notes]
        lines.append("")

    return "\n".join(lines)


# --- rule files ---

class RuleSet(BaseModel):
    model: TopicModel
    tree: FrugalTree
    text: str


def fit_rules(corpus: Corpus, k: int, goal: Goal, cfg: ExperimentConfig,
              seed: Optional[int] = None) -> RuleSet:
    """
    LDA(K=k) + FFT on the whole corpus. Returns the topic model, the tree and
    the rule text with the top words of every topic the tree uses.
    """
    seed = cfg.seed if seed is None else seed
    lda_cfg = LdaConfig.with_defaults(k, cfg.lda_alpha, cfg.lda_beta, cfg.lda_iterations, seed)
    model = lda_fit(corpus, lda_cfg)
    tree = fft.train_best(model.doc_topic, corpus.labels(), cfg.fft_depth, goal)
    text = rules_text(tree, model)
    logger.info(f"[{corpus.name}] rules for K={k}, goal={goal.value}: training score {tree.training_score:.3f}")
    return RuleSet(model=model, tree=tree, text=text)


def rules_text(tree: FrugalTree, model: TopicModel, decimals: Optional[int] = 2) -> str:
    names = [f"topic {i}" for i in range(model.k)]
    words = {t: top_words(model, t, fft.TOPIC_WORDS_PER_LINE) for t in tree.referenced_features()}
    return fft.render_rules(tree, names, words, decimals=decimals)
