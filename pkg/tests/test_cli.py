import json

import pytest

from entroscan.cli import EXIT_IO, EXIT_OK, EXIT_USAGE, main

SYNTH_ARGS = ["--seed", "1", "--base-min", "8192", "--base-max", "16384", "--blob-min", "4096", "--blob-max", "8192"]


@pytest.fixture(scope="module")
def workflow(tmp_path_factory):
    """synth -> build-codebook -> extract -> train, each step through the CLI."""
    tmp = tmp_path_factory.mktemp("cli")
    corpus, labels = tmp / "corpus", tmp / "corpus" / "labels.csv"
    steps = [
        ["synth", "--out", str(corpus), "--benign", "8", "--malicious", "8", *SYNTH_ARGS],
        ["build-codebook", str(corpus), "--labels", str(labels), "--codebook-size", "16", "--seed", "0",
         "--out", str(tmp / "codebook.json")],
        ["extract", str(corpus), "--labels", str(labels), "--codebook", str(tmp / "codebook.json"),
         "--out", str(tmp / "features.jsonl")],
        ["train", "--features", str(tmp / "features.jsonl"), "--codebook", str(tmp / "codebook.json"),
         "--trees", "10", "--seed", "0", "--out", str(tmp / "model.json")],
    ]
    codes = [main(argv) for argv in steps]
    return tmp, codes


def test_training_workflow_succeeds(workflow):
    tmp, codes = workflow
    assert codes == [EXIT_OK] * 4
    header, *records = (tmp / "features.jsonl").read_text().splitlines()
    assert json.loads(header)["codebook"]["k"] == 16
    assert len(records) == 16
    assert len(json.loads(records[0])["features"]) == 6 + 20 + 16
    model = json.loads((tmp / "model.json").read_text())
    assert model["format_version"] == 1
    assert len(model["trees"]) == 10

def test_scan_writes_one_record_per_file(workflow):
    tmp, _ = workflow
    files = sorted((tmp / "corpus" / "malicious").iterdir())[:2] + sorted((tmp / "corpus" / "benign").iterdir())[:1]
    out = tmp / "scan.jsonl"
    code = main(["scan", *map(str, files), "--model", str(tmp / "model.json"), "--out", str(out)])
    assert code == EXIT_OK
    records = [json.loads(line) for line in out.read_text().splitlines()]
    assert [record["path"] for record in records] == list(map(str, files))
    for record in records:
        assert set(record) == {"file_id", "path", "kind", "score", "label"}
        assert 0.0 <= record["score"] <= 1.0
        assert record["label"] in ("benign", "malicious")


def test_scan_of_empty_file_is_a_record_not_a_failure(workflow, capsys):
    tmp, _ = workflow
    empty = tmp / "empty.bin"
    empty.write_bytes(b"")
    assert main(["scan", str(empty), "--model", str(tmp / "model.json")]) == EXIT_OK
    record = json.loads(capsys.readouterr().out.strip())
    assert record["error"] == "EmptyInput"
    assert record["file_id"] == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"


def test_scan_of_missing_file_is_an_io_error(workflow):
    tmp, _ = workflow
    assert main(["scan", str(tmp / "absent.pdf"), "--model", str(tmp / "model.json")]) == EXIT_IO


def test_train_uses_codebook_recorded_by_extract(workflow):
    tmp, _ = workflow
    out = tmp / "m.json"
    argv = ["train", "--features", str(tmp / "features.jsonl"), "--trees", "10", "--max-depth", "8",
            "--seed", "0", "--out", str(out)]
    assert main(argv) == EXIT_OK
    model = json.loads(out.read_text())
    assert model["codebook"]["k"] == 16
    assert model["feature_dim"] == 6 + 20 + 16
    assert model["families"] == ["global", "dwt", "bow"]


def test_train_without_any_codebook_rejects_bow_features(workflow, tmp_path):
    tmp, _ = workflow
    headerless = tmp_path / "features.jsonl"
    headerless.write_text("\n".join((tmp / "features.jsonl").read_text().splitlines()[1:]) + "\n")
    argv = ["train", "--features", str(headerless), "--seed", "0", "--out", str(tmp_path / "m.json")]
    assert main(argv) == EXIT_USAGE
    assert not (tmp_path / "m.json").exists()


def test_entropy_csv(tmp_path, capsys):
    path = tmp_path / "doc.bin"
    path.write_bytes(bytes(512) + bytes(range(256)))
    assert main(["entropy", str(path), "--csv"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines == ["0,0.000000", "1,0.000000", "2,8.000000"]


def test_entropy_summary(tmp_path):
    path = tmp_path / "doc.bin"
    path.write_bytes(bytes(range(256)) * 4)
    assert main(["entropy", str(path)]) == EXIT_OK


def test_missing_required_flag_is_a_usage_error():
    with pytest.raises(SystemExit) as excinfo:
        main(["train"])
    assert excinfo.value.code == EXIT_USAGE


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["--version"])
    assert excinfo.value.code == 0
    assert capsys.readouterr().out.startswith("entroscan ")


def test_evaluate_needs_both_classes(tmp_path):
    corpus = tmp_path / "benign_only"
    assert main(["synth", "--out", str(corpus), "--benign", "4", "--malicious", "0", *SYNTH_ARGS]) == EXIT_OK
    argv = ["evaluate", "--dataset", str(corpus), "--labels", str(corpus / "labels.csv"), "--seed", "0"]
    assert main(argv) == EXIT_USAGE


def test_missing_dataset_is_an_io_error(tmp_path):
    argv = ["evaluate", "--dataset", str(tmp_path / "none"), "--labels", str(tmp_path / "l.csv"), "--seed", "0"]
    assert main(argv) == EXIT_IO
