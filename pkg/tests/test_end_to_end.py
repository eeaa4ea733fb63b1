import pytest

from entroscan.classifier.forest import ForestConfig
from entroscan.config import ExperimentConfig
from entroscan.evaluation import ablate, grid_search, load_series, repeated_holdout
from entroscan.pipelines.scan_pipeline import DocumentScanner
from entroscan.pipelines.train_pipeline import DetectorTrainer
from entroscan.utils.synthetic import SyntheticSpec, generate_synthetic

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    spec = SyntheticSpec(n_benign=500, n_malicious=500, seed=42)
    return generate_synthetic(spec, tmp_path_factory.mktemp("synthetic_42"), progress=False)


@pytest.fixture(scope="module")
def dataset(corpus):
    return load_series(corpus, n_jobs=-1)


def test_repeated_holdout_on_synthetic_corpus(dataset):
    report = repeated_holdout(dataset, ExperimentConfig(), repeats=3, train_fraction=0.7, seed=0, n_jobs=-1)
    assert report.auc >= 0.95
    assert report.tpr_at_max_fpr >= 0.90


def test_combined_families_are_not_worse(dataset):
    config = ExperimentConfig(forest=ForestConfig(n_trees=100))
    results = dict(ablate(dataset, config, seed=0, repeats=3, n_jobs=-1))
    combined = results[("global", "dwt", "bow")].auc
    for families in (("global",), ("dwt",), ("bow",)):
        assert combined >= results[families].auc - 0.01


def test_larger_forest_ranks_higher(dataset):
    results = grid_search(dataset, {"n_trees": [1, 200]}, ExperimentConfig(), seed=0, repeats=1)
    auc = {result.params["n_trees"]: result.auc for result in results}
    assert auc[200] >= auc[1]


def test_model_recognises_its_training_payloads(corpus):
    model = DetectorTrainer(n_jobs=-1)(corpus)
    malicious = [entry.path for entry in corpus if entry.label == "malicious"]
    records = DocumentScanner(model)(malicious, n_jobs=-1)
    flagged = sum(record["score"] >= 0.5 for record in records)
    assert flagged >= 0.95 * len(malicious)
