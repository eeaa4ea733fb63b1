import logging

import numpy as np
import pytest

from entroscan.errors import CorpusIOError, DegenerateLabels, ParseError
from entroscan.evaluation.dataset import load_series
from entroscan.signal.entropy import compute_ets
from entroscan.utils.corpus import BENIGN, MALICIOUS, UNLABELED, content_id, ingest, read_labels
from entroscan.utils.synthetic import LABELS_FILENAME, SyntheticSpec, encrypted_blob, generate_synthetic


def write_labels(path, rows, header="path,label"):
    path.write_text("\n".join([header] + rows) + "\n")
    return path


@pytest.fixture
def docs(tmp_path):
    root = tmp_path / "docs"
    (root / "sub").mkdir(parents=True)
    (root / "a.pdf").write_bytes(b"%PDF-1.4 first")
    (root / "sub" / "b.docx").write_bytes(b"PK\x03\x04 second")
    (root / "c.rtf").write_bytes(b"{\\rtf1 third}")
    return root


def test_ingest_joins_labels_by_relative_path(docs, tmp_path):
    labels = write_labels(tmp_path / "labels.csv", ["a.pdf,benign", "sub/b.docx,malicious"])
    corpus = ingest(docs, labels)
    by_name = {entry.path.name: entry for entry in corpus}
    assert len(corpus) == 3
    assert by_name["a.pdf"].label == BENIGN
    assert by_name["b.docx"].label == MALICIOUS
    assert by_name["c.rtf"].label == UNLABELED
    assert by_name["a.pdf"].file_id == content_id(b"%PDF-1.4 first")
    assert corpus.counts() == {BENIGN: 1, MALICIOUS: 1, UNLABELED: 1}
    assert len(corpus.labeled()) == 2


def test_ingest_without_labels(docs):
    assert {entry.label for entry in ingest(docs)} == {UNLABELED}


def test_duplicate_content_is_dropped(docs, caplog):
    (docs / "copy.pdf").write_bytes(b"%PDF-1.4 first")
    with caplog.at_level(logging.WARNING, logger="entroscan"):
        corpus = ingest(docs)
    assert len(corpus) == 3
    assert any("Duplicate content" in record.getMessage() for record in caplog.records)


def test_labels_csv_inside_root_is_skipped(docs):
    labels = write_labels(docs / "labels.csv", ["a.pdf,benign"])
    corpus = ingest(docs, labels)
    assert all(entry.path.name != "labels.csv" for entry in corpus)


def test_root_label_table_is_not_a_document_without_labels(docs, small_corpus):
    write_labels(docs / "labels.csv", ["a.pdf,benign"])
    assert sorted(entry.path.name for entry in ingest(docs)) == ["a.pdf", "b.docx", "c.rtf"]
    corpus = ingest(small_corpus.root)
    assert len(corpus) == 24
    assert all(entry.path.name != LABELS_FILENAME for entry in corpus)


def test_labels_csv_that_is_not_a_label_table_stays_a_document(docs):
    (docs / "labels.csv").write_text("quarterly figures\n")
    (docs / "sub" / "labels.csv").write_text("path,label\nx,benign\n")
    names = sorted(entry.path.relative_to(docs).as_posix() for entry in ingest(docs))
    assert names == ["a.pdf", "c.rtf", "labels.csv", "sub/b.docx", "sub/labels.csv"]


def test_bad_label_names_the_line(tmp_path):
    labels = write_labels(tmp_path / "labels.csv", ["a.pdf,benign", "b.pdf,evil"])
    with pytest.raises(ParseError, match=r"labels.csv:3:"):
        read_labels(labels)


@pytest.mark.parametrize(
    "header, rows",
    [("file,class", ["a.pdf,benign"]), ("path,label", ["a.pdf,benign,extra"])],
)
def test_malformed_label_file(tmp_path, header, rows):
    with pytest.raises(ParseError):
        read_labels(write_labels(tmp_path / "labels.csv", rows, header=header))


def test_missing_root(tmp_path):
    with pytest.raises(CorpusIOError):
        ingest(tmp_path / "nowhere")
    with pytest.raises(OSError):
        ingest(tmp_path / "nowhere")


def test_synthetic_corpus_is_reproducible(tmp_path):
    spec = SyntheticSpec(n_benign=3, n_malicious=3, base_size_range=(4096, 8192), seed=7)
    first = generate_synthetic(spec, tmp_path / "one", progress=False)
    second = generate_synthetic(spec, tmp_path / "two", progress=False)
    assert [entry.file_id for entry in first] == [entry.file_id for entry in second]
    assert (tmp_path / "one" / LABELS_FILENAME).read_text() == (tmp_path / "two" / LABELS_FILENAME).read_text()
    other = generate_synthetic(SyntheticSpec(n_benign=3, n_malicious=3, base_size_range=(4096, 8192), seed=8),
                               tmp_path / "three", progress=False)
    assert [entry.file_id for entry in other] != [entry.file_id for entry in first]


def test_synthetic_corpus_round_trips_through_ingest(small_corpus):
    corpus = ingest(small_corpus.root, small_corpus.root / LABELS_FILENAME)
    assert corpus.counts() == {BENIGN: 12, MALICIOUS: 12, UNLABELED: 0}


def test_malicious_documents_carry_payload_and_sled(small_corpus):
    for entry in small_corpus:
        if entry.label != MALICIOUS:
            continue
        values = compute_ets(entry.path.read_bytes()).values
        assert np.any(values > 7.5)
        assert np.any(values == 0.0)


def test_encrypted_blob_windows_are_maximal():
    blob = encrypted_blob(np.random.default_rng(0), 4096)
    assert len(blob) == 4096
    np.testing.assert_array_equal(compute_ets(blob).values, np.full(16, 8.0))


def test_single_class_corpus_cannot_be_evaluated(tmp_path):
    corpus = generate_synthetic(SyntheticSpec(n_benign=4, n_malicious=0, base_size_range=(2048, 4096)), tmp_path)
    with pytest.raises(DegenerateLabels):
        load_series(corpus).require_both_classes()


@pytest.mark.parametrize(
    "kwargs",
    [
        {"n_benign": 0, "n_malicious": 0},
        {"n_benign": 1, "n_malicious": 1, "blob_size_range": (100, 200)},
        {"n_benign": 1, "n_malicious": 1, "sled_size_range": (256, 512)},
        {"n_benign": 1, "n_malicious": 1, "base_size_range": (5000, 4000)},
    ],
)
def test_synthetic_spec_validation(kwargs):
    with pytest.raises(ValueError):
        SyntheticSpec(**kwargs)
