import numpy as np
import pytest

from entroscan.classifier.forest import ForestConfig
from entroscan.classifier.model import load
from entroscan.config import PipelineConfig
from entroscan.errors import EmptyInput
from entroscan.pipelines.scan_pipeline import DocumentScanner
from entroscan.pipelines.train_pipeline import DetectorTrainer


@pytest.fixture(scope="module")
def trained(small_corpus, tmp_path_factory):
    path = tmp_path_factory.mktemp("model") / "model.json"
    trainer = DetectorTrainer(PipelineConfig(codebook_size=16), ForestConfig(n_trees=10, max_depth=8, seed=4))
    return trainer(small_corpus, output_path=path), path


def test_trainer_writes_a_loadable_model(trained):
    model, path = trained
    restored = load(path)
    assert restored.feature_dim == model.feature_dim == 6 + 20 + 16
    assert restored.codebook.k == 16
    assert restored.families == ("global", "dwt", "bow")


def test_scanner_from_path_matches_in_memory_model(trained, small_corpus):
    model, path = trained
    files = [entry.path for entry in small_corpus][:4]
    from_disk = DocumentScanner(path)(files)
    in_memory = DocumentScanner(model)(files)
    assert [r["score"] for r in from_disk] == [r["score"] for r in in_memory]


def test_parallel_scan_keeps_input_order(trained, small_corpus):
    model, _ = trained
    files = [entry.path for entry in small_corpus]
    serial = DocumentScanner(model)(files, n_jobs=1)
    parallel = DocumentScanner(model)(files, n_jobs=2)
    assert serial == parallel


def test_threshold_override(trained, small_corpus):
    model, _ = trained
    files = [entry.path for entry in small_corpus]
    strict = DocumentScanner(model, threshold=1.01)(files)
    assert {record["label"] for record in strict} == {"benign"}
    lenient = DocumentScanner(model, threshold=0.0)(files)
    assert {record["label"] for record in lenient} == {"malicious"}


def test_process_document(trained):
    model, _ = trained
    scanner = DocumentScanner(model)
    record = scanner.process_document(np.random.default_rng(0).integers(0, 256, 4096, dtype=np.uint8).tobytes())
    assert set(record) == {"file_id", "kind", "score", "label"}
    with pytest.raises(EmptyInput):
        scanner.process_document(b"short")


def test_scanner_rejects_inconsistent_model(trained):
    model = load(trained[1])
    model.families = ("global", "dwt")
    with pytest.raises(ValueError):
        DocumentScanner(model)
