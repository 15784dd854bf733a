import numpy as np
import pytest

from frugal.errors import ConfigError, DatasetError
from frugal.models import Candidate, DEConfig, LdaConfig
from frugal.services.features import lda_fit
from frugal.services.tuner import DifferentialEvolution, stability_score, topic_overlap_score


def test_single_topic_is_perfectly_stable(theme_corpus):
    """
    With K=1 every token sits in the one topic, so shuffled runs agree on all
    top words.
    """
    score = stability_score(theme_corpus, Candidate(k=1, alpha=0.5, beta=0.01), runs=3, seed=5, lda_iterations=5)
    assert score == pytest.approx(9.0)


def test_identical_models_score_nine(theme_corpus):
    model = lda_fit(theme_corpus, LdaConfig(k=3, alpha=0.1, iterations=10, seed=2))
    assert topic_overlap_score([model, model, model]) == pytest.approx(9.0)


def test_stability_needs_two_runs(theme_corpus):
    with pytest.raises(ConfigError):
        stability_score(theme_corpus, Candidate(k=2, alpha=0.1, beta=0.01), runs=1)


def test_k_above_vocabulary_rejected(theme_corpus):
    with pytest.raises(DatasetError):
        stability_score(theme_corpus, Candidate(k=theme_corpus.vocabulary.size + 1, alpha=0.1, beta=0.01))


def test_small_population_rejected():
    with pytest.raises(ConfigError):
        DifferentialEvolution(DEConfig(population_size=3))


def test_zero_generations_only_scores_initial_population():
    """generations=0 evaluates the initial population and returns its best."""
    tuner = DifferentialEvolution(DEConfig(population_size=6, generations=0, seed=3))
    best = tuner.optimize(fitness=lambda c: -abs(c.k - 50))
    assert len(tuner.trace) == 6
    assert {row.generation for row in tuner.trace} == {0}
    assert best.fitness == max(row.fitness for row in tuner.trace)


def test_planted_optimum_found():
    """
    A fitness peaked at K=40 should be located by DE within +-2 for most
    seeds.
    """
    hits = 0
    for seed in range(5):
        cfg = DEConfig(population_size=10, generations=10, seed=seed)
        best = DifferentialEvolution(cfg).optimize(fitness=lambda c: -float((c.k - 40) ** 2))
        if abs(best.k - 40) <= 2:
            hits += 1
    assert hits >= 3


def test_candidates_stay_in_bounds():
    cfg = DEConfig(population_size=8, generations=4, seed=11, f=2.0, cr=1.0)
    tuner = DifferentialEvolution(cfg)
    tuner.optimize(fitness=lambda c: c.alpha - c.beta)
    for row in tuner.trace:
        assert 10 <= row.k <= 100
        assert 0.001 <= row.alpha <= 1.0
        assert 0.001 <= row.beta <= 1.0


def test_k_capped_to_vocabulary(theme_corpus):
    tuner = DifferentialEvolution(DEConfig(population_size=5, generations=2, seed=1))
    tuner.optimize(theme_corpus, fitness=lambda c: float(c.k))
    assert max(row.k for row in tuner.trace) <= theme_corpus.vocabulary.size


def test_winner_is_best_evaluation():
    """Selection keeps every improvement, so the winner matches the best trace row."""
    tuner = DifferentialEvolution(DEConfig(population_size=6, generations=3, seed=8))
    rng = np.random.default_rng(0)
    noise = {}

    def fitness(c):
        key = (c.k, round(c.alpha, 6), round(c.beta, 6))
        if key not in noise:
            noise[key] = float(rng.random())
        return noise[key]

    best = tuner.optimize(fitness=fitness)
    assert best.fitness == max(row.fitness for row in tuner.trace)


def test_stability_fit_count(theme_corpus):
    """Each evaluation costs `runs` LDA fits: np * (generations + 1) * runs in total."""
    cfg = DEConfig(population_size=4, generations=1, runs=2, lda_iterations=3, k_bounds=(1, 4), seed=2)
    tuner = DifferentialEvolution(cfg)
    best = tuner.optimize(theme_corpus)
    assert tuner.fit_count == 4 * 2 * 2
    assert 1 <= best.k <= 4
    assert 0.0 <= best.fitness <= 9.0


def test_trace_frame_columns():
    tuner = DifferentialEvolution(DEConfig(population_size=4, generations=1, seed=1))
    tuner.optimize(fitness=lambda c: 0.0)
    frame = tuner.trace_frame()
    assert list(frame.columns) == ["generation", "candidate", "K", "alpha", "beta", "fitness"]
    assert len(frame) == 8


def test_planted_topic_count_is_more_stable(theme_corpus):
    """Two planted themes: K=2 should be at least as stable as an over-split K=8."""
    wins = 0
    for seed in range(5):
        planted = stability_score(theme_corpus, Candidate(k=2, alpha=0.1, beta=0.01), runs=3, seed=seed,
                                  lda_iterations=30)
        split = stability_score(theme_corpus, Candidate(k=8, alpha=0.1, beta=0.01), runs=3, seed=seed,
                                lda_iterations=30)
        if planted >= split:
            wins += 1
    assert wins >= 4
