import logging

import pytest

from entroscan.classifier.forest import ForestConfig
from entroscan.config import ExperimentConfig, PipelineConfig
from entroscan.evaluation.dataset import load_series
from entroscan.utils.synthetic import SyntheticSpec, generate_synthetic

SMALL_SPEC = SyntheticSpec(
    n_benign=12,
    n_malicious=12,
    blob_size_range=(4096, 8192),
    base_size_range=(8 * 1024, 16 * 1024),
    sled_size_range=(1024, 2048),
    seed=3,
)


@pytest.fixture(autouse=True)
def _reset_package_logger():
    # the CLI detaches the package logger from the root; give caplog its records back
    yield
    package_logger = logging.getLogger("entroscan")
    package_logger.handlers.clear()
    package_logger.propagate = True
    package_logger.setLevel(logging.NOTSET)


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    return generate_synthetic(SMALL_SPEC, tmp_path_factory.mktemp("small_corpus"), progress=False)


@pytest.fixture(scope="session")
def small_dataset(small_corpus):
    return load_series(small_corpus)


@pytest.fixture
def small_experiment():
    return ExperimentConfig(
        pipeline=PipelineConfig(codebook_size=16),
        forest=ForestConfig(n_trees=15, max_depth=10),
    )
