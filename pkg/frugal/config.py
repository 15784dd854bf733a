"""
Experiment configuration.

One plain-text key=value file (parsed with python-dotenv) holds a whole run.
Precedence: defaults < config file < FRUGAL_SEED environment variable
(seed only) < explicit command-line flags.
"""
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Optional

from dotenv import dotenv_values
from pydantic import BaseModel, ValidationError, field_validator

from frugal.errors import ConfigError
from frugal.models import DEConfig, FitnessMode, Goal

logger = logging.getLogger(__name__)

SEED_ENV = "FRUGAL_SEED"

DEFAULT_METHODS = ["tfidf_svm", "fft_k10", "fft_k25", "fft_k50", "fft_k100", "ldade_svm", "ldade_fft"]

_LIST_KEYS = {"datasets", "methods"}


class ExperimentConfig(BaseModel):
    datasets: List[str] = []
    methods: List[str] = list(DEFAULT_METHODS)
    goal: Optional[Goal] = None  # None: FFTs are trained once per metric
    repeats: int = 5
    bins: int = 5
    seed: int = 1
    out: str = "results"
    workers: int = os.cpu_count() or 1

    # features
    min_doc_freq: int = 1
    stopwords: Optional[str] = None
    lda_iterations: int = 200
    fold_in_iterations: int = 20
    lda_alpha: Optional[float] = None  # None: 50 / K
    lda_beta: float = 0.01

    # classifiers
    fft_depth: int = 4
    svm_lambda: float = 1e-4
    svm_epochs: int = 100

    # LDADE
    de_np: int = 10
    de_f: float = 0.7
    de_cr: float = 0.3
    de_generations: int = 3
    de_runs: int = 5
    de_lda_iterations: int = 100
    de_fitness: FitnessMode = FitnessMode.STABILITY

    # statistics
    bootstraps: int = 1000
    confidence: float = 0.95

    @field_validator("goal", mode="before")
    @classmethod
    def _blank_goal(cls, value: Any) -> Any:
        if isinstance(value, str) and value.strip().lower() in ("", "both", "none"):
            return None
        return value

    @field_validator("repeats", "bins", "workers", "fft_depth", "lda_iterations", "de_runs")
    @classmethod
    def _positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be >= 1")
        return value

    def de_config(self, seed: Optional[int] = None) -> DEConfig:
        return DEConfig(
            population_size=self.de_np,
            f=self.de_f,
            cr=self.de_cr,
            generations=self.de_generations,
            runs=self.de_runs,
            lda_iterations=self.de_lda_iterations,
            fitness=self.de_fitness,
            seed=self.seed if seed is None else seed,
        )

    def check_inputs(self) -> None:
        if not self.methods:
            raise ConfigError("at least one method is required")
        if not self.datasets:
            raise ConfigError("at least one dataset is required")
        missing = [d for d in self.datasets if not Path(d).exists()]
        if missing:
            raise ConfigError(f"dataset file(s) not found: {', '.join(missing)}")


def _split_list(value: str) -> List[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def read_config_file(path: str) -> Dict[str, Any]:
    if not Path(path).exists():
        raise ConfigError(f"config file not found: {path}")
    raw = dotenv_values(path)
    values: Dict[str, Any] = {}
    for key, value in raw.items():
        key = key.strip().lower()
        if value is None:
            continue
        values[key] = _split_list(value) if key in _LIST_KEYS else value
    return values


def load_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    values: Dict[str, Any] = {}
    if path:
        values.update(read_config_file(path))

    env_seed = os.getenv(SEED_ENV)
    if env_seed:
        values["seed"] = env_seed

    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value

    unknown = set(values) - set(ExperimentConfig.model_fields)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")

    try:
        cfg = ExperimentConfig(**values)
    except ValidationError as e:
        raise ConfigError(f"invalid configuration: {e}") from e
    logger.debug(f"Loaded config: {cfg.model_dump()}")
    return cfg
