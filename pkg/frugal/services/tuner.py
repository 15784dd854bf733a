"""
LDADE: differential evolution over LDA's (K, alpha, beta).

Default fitness is topic stability: fit LDA several times on shuffled
document orders and measure how well the top words of the topics line up
between runs (0 = nothing matches, 9 = every topic matches at every n).
A classification fitness hook can replace it.
"""
import itertools
import logging
from typing import Callable, List, Optional, Sequence

import numpy as np
import pandas as pd

from frugal.errors import ConfigError, DatasetError
from frugal.models import Candidate, Corpus, DEConfig, LdaConfig, TopicModel, TraceRow
from frugal.services.features import lda_fit, top_words

logger = logging.getLogger(__name__)

MAX_TOP_N = 9
OVERLAP_RATIO = 0.9

FitnessHook = Callable[[Candidate], float]


def _shuffled(corpus: Corpus, rng: np.random.Generator) -> Corpus:
    order = rng.permutation(corpus.n_docs)
    return corpus.model_copy(update={"documents": [corpus.documents[i] for i in order]})


def _matched_topics(a: List[set], b: List[set], threshold: int) -> int:
    """Greedy one-to-one matching by largest overlap; counts pairs reaching `threshold`."""
    overlap = np.array([[len(x & y) for y in b] for x in a], dtype=np.int64)
    matched = 0
    for _ in range(min(len(a), len(b))):
        i, j = np.unravel_index(int(np.argmax(overlap)), overlap.shape)
        if overlap[i, j] >= threshold:
            matched += 1
        overlap[i, :] = -1
        overlap[:, j] = -1
    return matched


def topic_overlap_score(models: Sequence[TopicModel]) -> float:
    """
    For n = 1..9: per pair of runs, count topics whose top-n words overlap in at
    least floor(0.9 n) words; take the median over pairs. Average over n and
    scale from [0, 1] to [0, 9].
    """
    if len(models) < 2:
        raise ConfigError("stability needs at least two runs")
    k_topics = models[0].k
    per_n = []
    for n in range(1, MAX_TOP_N + 1):
        threshold = int(np.floor(n * OVERLAP_RATIO))
        tops = [[set(top_words(m, t, n)) for t in range(m.k)] for m in models]
        pair_counts = [
            _matched_topics(tops[i], tops[j], threshold) / k_topics
            for i, j in itertools.combinations(range(len(models)), 2)
        ]
        per_n.append(float(np.median(pair_counts)))
    return MAX_TOP_N * float(np.mean(per_n))


def stability_score(corpus: Corpus, cand: Candidate, runs: int = 5, seed: int = 1,
                    lda_iterations: int = 100, counter: Optional[List[int]] = None) -> float:
    """
    Fits LDA `runs` times, each on a differently shuffled document order with
    its own derived seed, and scores how stable the topics are.
    """
    if runs < 2:
        raise ConfigError("stability needs at least two runs")
    if cand.k > corpus.vocabulary.size:
        raise DatasetError(f"K={cand.k} exceeds vocabulary size {corpus.vocabulary.size}")

    seeds = np.random.SeedSequence(seed).generate_state(runs)
    models = []
    for run_seed in seeds:
        rng = np.random.default_rng(int(run_seed))
        cfg = LdaConfig(k=cand.k, alpha=cand.alpha, beta=cand.beta,
                        iterations=lda_iterations, seed=int(run_seed))
        models.append(lda_fit(_shuffled(corpus, rng), cfg))
        if counter is not None:
            counter[0] += 1
    return topic_overlap_score(models)


class DifferentialEvolution:
    """
    DE/rand/1/bin over (K, alpha, beta). Keeps a trace of every evaluation and
    counts the LDA fits spent on stability scoring.
    """

    def __init__(self, cfg: DEConfig):
        if cfg.population_size < 4:
            raise ConfigError(f"DE needs a population of at least 4, got {cfg.population_size}")
        if not 0 < cfg.f <= 2 or not 0 <= cfg.cr <= 1:
            raise ConfigError(f"DE weights out of range (f={cfg.f}, cr={cfg.cr})")
        self.cfg = cfg
        self.trace: List[TraceRow] = []
        self._fits = [0]

    @property
    def fit_count(self) -> int:
        return self._fits[0]

    def _bounds(self, corpus: Optional[Corpus]) -> np.ndarray:
        k_lo, k_hi = self.cfg.k_bounds
        if corpus is not None and k_hi > corpus.vocabulary.size:
            logger.warning(f"Capping K upper bound {k_hi} to vocabulary size {corpus.vocabulary.size}")
            k_hi = max(1, corpus.vocabulary.size)
            k_lo = min(k_lo, k_hi)
        return np.array([[k_lo, k_hi], list(self.cfg.alpha_bounds), list(self.cfg.beta_bounds)], dtype=float)

    @staticmethod
    def _clamp(vector: np.ndarray, bounds: np.ndarray) -> np.ndarray:
        out = np.clip(vector, bounds[:, 0], bounds[:, 1])
        out[0] = np.clip(np.rint(out[0]), bounds[0, 0], bounds[0, 1])
        return out

    @staticmethod
    def _candidate(vector: np.ndarray) -> Candidate:
        return Candidate(k=int(vector[0]), alpha=float(vector[1]), beta=float(vector[2]))

    def _evaluate(self, vector: np.ndarray, fitness: FitnessHook, generation: int, index: int) -> float:
        cand = self._candidate(vector)
        value = float(fitness(cand))
        self.trace.append(TraceRow(generation=generation, candidate=index, k=cand.k,
                                   alpha=cand.alpha, beta=cand.beta, fitness=value))
        return value

    def optimize(self, corpus: Optional[Corpus] = None, fitness: Optional[FitnessHook] = None) -> Candidate:
        cfg = self.cfg
        if fitness is None:
            if corpus is None:
                raise ConfigError("stability fitness needs a corpus")

            def fitness(cand: Candidate) -> float:
                return stability_score(corpus, cand, runs=cfg.runs, seed=cfg.seed,
                                       lda_iterations=cfg.lda_iterations, counter=self._fits)

        bounds = self._bounds(corpus)
        rng = np.random.default_rng(cfg.seed)
        dims = bounds.shape[0]

        population = [
            self._clamp(bounds[:, 0] + rng.random(dims) * (bounds[:, 1] - bounds[:, 0]), bounds)
            for _ in range(cfg.population_size)
        ]
        scores = [self._evaluate(v, fitness, 0, i) for i, v in enumerate(population)]
        logger.info(f"DE generation 0: best fitness {max(scores):.3f}")

        for generation in range(1, cfg.generations + 1):
            for i in range(cfg.population_size):
                others = [j for j in range(cfg.population_size) if j != i]
                a, b, c = (population[j] for j in rng.choice(others, size=3, replace=False))
                mutant = a + cfg.f * (b - c)
                cross = rng.random(dims) < cfg.cr
                cross[rng.integers(dims)] = True
                trial = self._clamp(np.where(cross, mutant, population[i]), bounds)

                value = self._evaluate(trial, fitness, generation, i)
                if value > scores[i]:
                    population[i] = trial
                    scores[i] = value
            logger.info(f"DE generation {generation}: best fitness {max(scores):.3f}")

        best = int(np.argmax(scores))
        winner = self._candidate(population[best])
        winner.fitness = scores[best]
        return winner

    def trace_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [row.model_dump() for row in self.trace],
            columns=["generation", "candidate", "k", "alpha", "beta", "fitness"],
        ).rename(columns={"k": "K"})


def de_optimize(corpus: Optional[Corpus], cfg: DEConfig, fitness: Optional[FitnessHook] = None) -> Candidate:
    return DifferentialEvolution(cfg).optimize(corpus, fitness)
