import asyncio
import logging
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import BaseModel

from frugal.config import ExperimentConfig
from frugal.connectors import artifacts
from frugal.connectors.dataset import CsvDatasetReader
from frugal.models import Corpus, FoldPlan, RunRecord
from frugal.services.corpus import load_stopwords, summary
from frugal.services.evalrig import parse_method, run_matrix, stratified_folds
from frugal.services.report import render_report, runtime_frame
from frugal.services.stats import rank_records, rankings_frame

logger = logging.getLogger(__name__)


class ExperimentOutcome(BaseModel):
    records: List[RunRecord] = []
    summaries: Dict[str, str] = {}
    failed: Dict[str, str] = {}

    @property
    def ok(self) -> bool:
        return not self.failed


def load_dataset(path: str, cfg: ExperimentConfig) -> Corpus:
    """A prepared corpus artifact (.json) or a raw bug-report CSV."""
    if Path(path).suffix.lower() == ".json":
        return artifacts.load_corpus(path)
    stopwords = load_stopwords(Path(cfg.stopwords)) if cfg.stopwords else None
    return CsvDatasetReader(path).load_corpus(min_doc_freq=cfg.min_doc_freq, stopwords=stopwords)


class ExperimentScheduler:
    """
    Runs dataset x method cells on a bounded pool: each cell is a blocking
    run_matrix call pushed to a thread, at most `workers` at a time. The
    coordinating coroutine collects every record; only it writes files.
    """

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.workers = max(1, cfg.workers)
        self._semaphore: Optional[asyncio.Semaphore] = None

    async def _run_cell(self, corpus: Corpus, method: str, plan: FoldPlan, dataset: str) -> List[RunRecord]:
        async with self._semaphore:
            logger.info(f"[{dataset}] {method}: started")
            records = await asyncio.to_thread(run_matrix, corpus, [method], plan, self.cfg.goal, self.cfg, dataset)
            logger.info(f"[{dataset}] {method}: {len(records)} records")
            return records

    async def run_dataset(self, path: str, outcome: ExperimentOutcome) -> None:
        try:
            corpus = await asyncio.to_thread(load_dataset, path, self.cfg)
            dataset = corpus.name
            plan = stratified_folds(corpus.labels(), self.cfg.repeats, self.cfg.bins, self.cfg.seed)
        except Exception as e:
            logger.error(f"[{path}] dataset aborted: {e}")
            outcome.failed[path] = str(e)
            return

        results = await asyncio.gather(
            *(self._run_cell(corpus, m, plan, dataset) for m in self.cfg.methods),
            return_exceptions=True,
        )
        errors = [r for r in results if isinstance(r, BaseException)]
        if errors:
            logger.error(f"[{dataset}] dataset aborted: {errors[0]}")
            outcome.failed[dataset] = str(errors[0])
            return

        outcome.summaries[dataset] = summary(corpus)
        for records in results:
            outcome.records.extend(records)

    async def run(self, datasets: Optional[List[str]] = None) -> ExperimentOutcome:
        datasets = datasets if datasets is not None else self.cfg.datasets
        for m in self.cfg.methods:
            parse_method(m)

        self._semaphore = asyncio.Semaphore(self.workers)
        outcome = ExperimentOutcome()
        await asyncio.gather(*(self.run_dataset(path, outcome) for path in datasets))
        outcome.records.sort(key=lambda r: r.sort_key())
        logger.info(f"Experiment finished: {len(outcome.records)} records, {len(outcome.failed)} dataset(s) failed")
        return outcome

    def write_outputs(self, outcome: ExperimentOutcome, out: Optional[str] = None) -> Dict[str, Path]:
        out_dir = Path(out or self.cfg.out)
        rankings = rankings_frame(rank_records(outcome.records, self.cfg.bootstraps, self.cfg.confidence,
                                               self.cfg.seed))
        runtimes = runtime_frame(outcome.records)
        written = {
            "results": artifacts.save_results(out_dir / "results.csv", outcome.records),
            "rankings": artifacts.save_frame(out_dir / "rankings.csv", rankings),
            "runtimes": artifacts.save_frame(out_dir / "runtimes.csv", runtimes),
            "report": artifacts.write_text(out_dir / "report.md",
                                           render_report(rankings, runtimes, outcome.summaries)),
        }
        for name, path in written.items():
            logger.info(f"Wrote {name}: {path}")
        return written


def run_experiment(cfg: ExperimentConfig) -> ExperimentOutcome:
    scheduler = ExperimentScheduler(cfg)
    outcome = asyncio.run(scheduler.run())
    scheduler.write_outputs(outcome)
    return outcome
