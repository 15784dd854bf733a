import os
import sys

import pytest

# Add project root to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from frugal.config import ExperimentConfig
from frugal.models import RawDocument
from frugal.services.corpus import build_corpus
from frugal.services.mock_generator import SyntheticReportGenerator
from tests.data.fixtures_corpora import TINY_REPORTS, TWO_THEME_REPORTS


def pytest_configure(config):
    config.addinivalue_line("markers", "performance: slow end-to-end and runtime checks")


@pytest.fixture
def tiny_raw():
    return [RawDocument(**r) for r in TINY_REPORTS]


@pytest.fixture
def tiny_corpus(tiny_raw):
    return build_corpus(tiny_raw, name="tiny")


@pytest.fixture
def theme_corpus():
    """Two clearly separated themes, 12 documents each; V >= 9 after stemming."""
    return build_corpus([RawDocument(**r) for r in TWO_THEME_REPORTS], name="themes")


@pytest.fixture
def generator():
    return SyntheticReportGenerator(seed=7)


@pytest.fixture
def synthetic_corpus(generator):
    return build_corpus(generator.generate(120), name="synthetic")


@pytest.fixture
def fast_config(tmp_path):
    """Small iteration counts so rig tests finish quickly."""
    return ExperimentConfig(
        repeats=1, bins=3, seed=3, out=str(tmp_path / "results"), workers=2,
        lda_iterations=15, fold_in_iterations=5, svm_epochs=5,
        de_np=4, de_generations=1, de_runs=2, de_lda_iterations=5,
        bootstraps=200,
    )
