"""Repeated stratified holdout (and stratified k-fold) evaluation of the full detector."""

import logging
import time
from dataclasses import replace
from typing import Callable, Iterator, Optional, Tuple

import numpy as np

from entroscan.classifier.forest import RandomForest
from entroscan.config import ExperimentConfig
from entroscan.errors import DegenerateLabels
from entroscan.evaluation.dataset import SeriesDataset
from entroscan.evaluation.metrics import EvalReport, mean_report, score_report
from entroscan.tools.featurizer.codebook import build_codebook
from entroscan.tools.featurizer.families.bow import local_descriptors
from entroscan.tools.featurizer.featurizer import pipeline_featurizer
from entroscan.utils.seeding import derive_rng, derive_seed

logger = logging.getLogger(__name__)

PROTOCOLS = ("holdout", "kfold")

# fit_fn(dataset, train_idx, test_idx, config, seed) -> malicious scores of the test rows
FitFn = Callable[[SeriesDataset, np.ndarray, np.ndarray, ExperimentConfig, int], np.ndarray]


def stratified_split(labels, train_fraction: float, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """
    Per-class random split keeping the class proportions.

    Each class contributes round(train_fraction * n_class) training rows, clamped so both
    sides keep at least one row of the class.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    labels = np.asarray(labels, dtype=bool)
    train, test = [], []
    for cls in (False, True):
        rows = rng.permutation(np.flatnonzero(labels == cls))
        if rows.shape[0] < 2:
            raise DegenerateLabels(f"class {'malicious' if cls else 'benign'} has fewer than 2 samples")
        n_train = min(max(int(round(train_fraction * rows.shape[0])), 1), rows.shape[0] - 1)
        train.append(rows[:n_train])
        test.append(rows[n_train:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def stratified_kfold(labels, folds: int, rng: np.random.Generator) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """Yield (train, test) index pairs; every class is dealt round-robin over the folds."""
    if folds < 2:
        raise ValueError(f"folds must be >= 2, got {folds}")
    labels = np.asarray(labels, dtype=bool)
    assignment = np.empty(labels.shape[0], dtype=np.int64)
    for cls in (False, True):
        rows = rng.permutation(np.flatnonzero(labels == cls))
        if rows.shape[0] < folds:
            raise DegenerateLabels(f"class {'malicious' if cls else 'benign'} has fewer samples than {folds} folds")
        assignment[rows] = np.arange(rows.shape[0]) % folds
    for fold in range(folds):
        yield np.flatnonzero(assignment != fold), np.flatnonzero(assignment == fold)


def fit_and_score(
    dataset: SeriesDataset,
    train_idx: np.ndarray,
    test_idx: np.ndarray,
    config: ExperimentConfig,
    seed: int,
    n_jobs: int = 1,
) -> np.ndarray:
    """Codebook and forest fitted on the training rows only, then the test rows scored."""
    pipeline = config.pipeline
    series = dataset.series(pipeline.window_size)
    codebook = None
    if pipeline.uses_codebook:
        descriptors = np.concatenate([local_descriptors(series[i], pipeline.segment_length) for i in train_idx])
        codebook = build_codebook(
            descriptors,
            k=pipeline.codebook_size,
            sample_fraction=pipeline.sample_fraction,
            seed=derive_seed(seed, 1),
            segment_length=pipeline.segment_length,
        )
    featurizer = pipeline_featurizer(pipeline, codebook)
    X_train = np.stack([featurizer(series[i]) for i in train_idx])
    X_test = np.stack([featurizer(series[i]) for i in test_idx])
    forest_config = replace(config.forest, seed=derive_seed(seed, 2))
    forest = RandomForest(forest_config).fit(X_train, dataset.labels[train_idx], n_jobs=n_jobs)
    return forest.predict_proba(X_test)


def _splits(dataset, protocol, repeats, train_fraction, folds, seed):
    if protocol == "holdout":
        if repeats < 1:
            raise ValueError(f"repeats must be >= 1, got {repeats}")
        for repeat in range(repeats):
            yield stratified_split(dataset.labels, train_fraction, derive_rng(seed, repeat))
    elif protocol == "kfold":
        yield from stratified_kfold(dataset.labels, folds, derive_rng(seed, 0))
    else:
        raise ValueError(f"protocol must be one of {PROTOCOLS}, got {protocol!r}")


def repeated_holdout(
    dataset: SeriesDataset,
    config: ExperimentConfig = ExperimentConfig(),
    repeats: int = 3,
    train_fraction: float = 0.7,
    seed: int = 0,
    protocol: str = "holdout",
    folds: int = 3,
    fit_fn: Optional[FitFn] = None,
    n_jobs: int = 1,
) -> EvalReport:
    """
    Evaluate ``config`` on seeded stratified splits and average the metrics.

    With ``protocol="holdout"`` every repeat draws a fresh ``train_fraction`` split; with
    ``protocol="kfold"`` each of ``folds`` folds is held out once. Repeat ``r`` derives its
    split and model seeds from (seed, r).

    Raises:
        DegenerateLabels: a class is missing or too small to appear on both sides.
    """
    dataset.require_both_classes()
    if fit_fn is None:
        def fit_fn(data, train_idx, test_idx, cfg, run_seed):
            return fit_and_score(data, train_idx, test_idx, cfg, run_seed, n_jobs=n_jobs)

    reports = []
    for repeat, (train_idx, test_idx) in enumerate(_splits(dataset, protocol, repeats, train_fraction, folds, seed)):
        start = time.perf_counter()
        scores = fit_fn(dataset, train_idx, test_idx, config, derive_seed(seed, repeat, 1))
        elapsed = time.perf_counter() - start
        report = score_report(scores, dataset.labels[test_idx], config.threshold, config.max_fpr)
        report.fit_seconds = elapsed
        logger.info(
            f"{protocol} run {repeat + 1}: AUC {report.auc:.4f}, TPR {report.tpr:.4f}, "
            f"FPR {report.fpr:.4f} ({elapsed:.1f}s)"
        )
        reports.append(report)
    return mean_report(reports)
