import math

import numpy as np
import pytest

from entroscan.errors import DegenerateLabels, ParseError
from entroscan.evaluation import SeriesDataset, ablate, grid_search, repeated_holdout, sweep_grid
from entroscan.evaluation.ablation import family_combinations
from entroscan.evaluation.grid import expand_grid, load_grid
from entroscan.evaluation.holdout import stratified_kfold, stratified_split
from entroscan.evaluation.metrics import MEAN_FIELDS
from entroscan.utils.seeding import derive_seed


def labels_only_dataset(n_benign, n_malicious):
    n = n_benign + n_malicious
    labels = np.array([False] * n_benign + [True] * n_malicious)
    return SeriesDataset(paths=[None] * n, file_ids=[f"doc-{i}" for i in range(n)], labels=labels)


def always_malicious(dataset, train_idx, test_idx, config, seed):
    return np.ones(test_idx.shape[0])


def test_stratified_split_keeps_class_proportions():
    labels = np.array([0] * 10 + [1] * 10, dtype=bool)
    train, test = stratified_split(labels, 0.7, np.random.default_rng(0))
    assert labels[train].sum() == 7 and (~labels[train]).sum() == 7
    assert set(train).isdisjoint(test)
    assert sorted(np.concatenate([train, test])) == list(range(20))


def test_stratified_split_leaves_each_class_on_both_sides():
    labels = np.array([0, 0, 1, 1, 1], dtype=bool)
    train, test = stratified_split(labels, 0.95, np.random.default_rng(1))
    assert labels[test].any() and (~labels[test]).any()
    with pytest.raises(DegenerateLabels):
        stratified_split(np.array([0, 1, 1], dtype=bool), 0.5, np.random.default_rng(0))
    with pytest.raises(ValueError):
        stratified_split(labels, 1.0, np.random.default_rng(0))


def test_kfold_holds_every_row_out_once():
    labels = np.array([0] * 7 + [1] * 5, dtype=bool)
    folds = list(stratified_kfold(labels, 3, np.random.default_rng(2)))
    assert len(folds) == 3
    held_out = np.concatenate([test for _, test in folds])
    assert sorted(held_out) == list(range(12))
    for train, test in folds:
        assert set(train).isdisjoint(test)
        assert labels[test].sum() in (1, 2)


def test_constant_scorer_counts():
    dataset = labels_only_dataset(6, 4)
    report = repeated_holdout(dataset, repeats=1, train_fraction=0.7, seed=0, fit_fn=always_malicious)
    assert (report.counts.tp, report.counts.fp, report.counts.tn, report.counts.fn) == (1, 2, 0, 0)
    assert report.tpr == 1.0 and report.fpr == 1.0
    assert report.auc == 0.5


def assert_metrics_are_repeat_means(report):
    for key in MEAN_FIELDS:
        values = [getattr(repeat, key) for repeat in report.per_repeat]
        if any(value is None for value in values):
            assert getattr(report, key) is None, key
            continue
        assert abs(getattr(report, key) - np.mean(values)) <= 1e-12, key


def test_repeats_are_averaged():
    report = repeated_holdout(labels_only_dataset(6, 4), repeats=4, seed=0, fit_fn=always_malicious)
    assert len(report.per_repeat) == 4
    assert report.counts.total == 4 * 3
    assert report.fit_seconds is not None
    assert_metrics_are_repeat_means(report)


@pytest.mark.parametrize("protocol", ["holdout", "kfold"])
def test_reported_metrics_are_means_over_repeats(small_dataset, small_experiment, protocol):
    report = repeated_holdout(small_dataset, small_experiment, repeats=3, protocol=protocol, folds=3, seed=7)
    assert len(report.per_repeat) == 3
    assert report.auc is not None
    assert_metrics_are_repeat_means(report)
    assert report.counts == sum((repeat.counts for repeat in report.per_repeat[1:]), report.per_repeat[0].counts)


def test_one_class_dataset_is_degenerate():
    with pytest.raises(DegenerateLabels):
        repeated_holdout(labels_only_dataset(10, 0), fit_fn=always_malicious)
    with pytest.raises(DegenerateLabels):
        repeated_holdout(labels_only_dataset(10, 1), fit_fn=always_malicious)


def test_unknown_protocol():
    with pytest.raises(ValueError):
        repeated_holdout(labels_only_dataset(5, 5), protocol="bootstrap", fit_fn=always_malicious)


def test_same_seed_same_report(small_dataset, small_experiment):
    first = repeated_holdout(small_dataset, small_experiment, repeats=2, seed=11)
    second = repeated_holdout(small_dataset, small_experiment, repeats=2, seed=11)
    assert first.counts == second.counts
    assert first.auc == second.auc
    np.testing.assert_array_equal(first.pooled_scores()[0], second.pooled_scores()[0])
    assert 0.0 <= first.auc <= 1.0


def test_kfold_protocol_reports_each_fold(small_dataset, small_experiment):
    report = repeated_holdout(small_dataset, small_experiment, protocol="kfold", folds=3, seed=0)
    assert len(report.per_repeat) == 3
    assert report.counts.total == len(small_dataset)


def test_grid_point_matches_direct_evaluation(small_dataset, small_experiment):
    results = grid_search(small_dataset, {"n_trees": [10]}, small_experiment, seed=5, repeats=1)
    config = small_experiment.with_params(n_trees=10)
    direct = repeated_holdout(small_dataset, config, repeats=1, seed=derive_seed(5, 0))
    assert len(results) == 1
    assert results[0].auc == direct.auc
    assert results[0].report.counts == direct.counts


def test_failed_grid_point_sorts_last(small_dataset, small_experiment):
    points = [{"codebook_size": 100000}, {"codebook_size": 8}]
    results = grid_search(small_dataset, points, small_experiment, repeats=1)
    assert not results[0].failed
    assert results[-1].failed
    assert math.isnan(results[-1].auc)
    assert "InsufficientData" in results[-1].error
    assert results[-1].to_dict()["auc"] is None


def test_expand_grid():
    points = expand_grid({"n_trees": [10, 20, 10], "max_depth": [5]})
    assert points == [{"max_depth": 5, "n_trees": 10}, {"max_depth": 5, "n_trees": 20}]
    with pytest.raises(ValueError):
        expand_grid({"learning_rate": [0.1]})
    with pytest.raises(ValueError):
        expand_grid({"n_trees": []})


@pytest.mark.parametrize("name, size", [("forest", 29 * 10), ("segment", 10), ("codebook", 22)])
def test_standard_sweeps(name, size):
    assert len(expand_grid(sweep_grid(name))) == size


def test_family_combinations():
    combinations = family_combinations()
    assert len(combinations) == 7
    assert combinations[0] == ("global",)
    assert combinations[-1] == ("global", "dwt", "bow")


def test_ablation_reports_each_combination(small_dataset, small_experiment):
    combinations = [("global",), ("dwt", "global")]
    results = ablate(small_dataset, small_experiment, seed=1, repeats=1, combinations=combinations)
    assert [families for families, _ in results] == [("global",), ("dwt", "global")]
    for _, report in results:
        assert report.counts.total == results[0][1].counts.total


def test_grid_file_must_be_utf8_json(tmp_path):
    path = tmp_path / "grid.json"
    path.write_text('{"n_trees": [10, 20]}')
    assert load_grid(path) == {"n_trees": [10, 20]}
    path.write_bytes(b"\xff\xfe{not json")
    with pytest.raises(ParseError):
        load_grid(path)
