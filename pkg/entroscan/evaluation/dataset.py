"""Labelled entropy series for evaluation, computed once per window size and reused across runs."""

import logging
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
from joblib import Parallel, delayed
from tqdm.auto import tqdm

from entroscan.errors import DegenerateLabels, EmptyInput
from entroscan.signal.entropy import EntropyTimeSeries
from entroscan.tools.featurizer.featurizer import file_series
from entroscan.utils.corpus import MALICIOUS, LabeledCorpus

logger = logging.getLogger(__name__)


def _series_or_none(path, window_size):
    try:
        return file_series(Path(path).read_bytes(), window_size)
    except EmptyInput as e:
        logger.warning(f"Skipping {path}: {e}")
        return None


class SeriesDataset:
    """
    Labelled documents of a corpus together with their entropy series.

    Series are cached per window size; grid points that only touch the codebook or the
    forest reuse them.
    """

    def __init__(self, paths: List[Path], file_ids: List[str], labels: np.ndarray,
                 series: Optional[List[EntropyTimeSeries]] = None, window_size: int = 256, n_jobs: int = 1):
        self.paths = list(paths)
        self.file_ids = list(file_ids)
        self.labels = np.asarray(labels, dtype=bool)
        self.n_jobs = n_jobs
        self._cache: Dict[int, List[EntropyTimeSeries]] = {}
        if series is not None:
            self._cache[window_size] = list(series)

    def __len__(self):
        return len(self.file_ids)

    @property
    def n_malicious(self) -> int:
        return int(self.labels.sum())

    @property
    def n_benign(self) -> int:
        return len(self) - self.n_malicious

    def require_both_classes(self, minimum: int = 2):
        if self.n_malicious < minimum or self.n_benign < minimum:
            raise DegenerateLabels(
                f"evaluation needs >= {minimum} samples of each class, "
                f"got {self.n_benign} benign and {self.n_malicious} malicious"
            )

    def series(self, window_size: int = 256) -> List[EntropyTimeSeries]:
        if window_size not in self._cache:
            self._cache[window_size] = Parallel(n_jobs=self.n_jobs)(
                delayed(file_series)(Path(path).read_bytes(), window_size)
                for path in tqdm(self.paths, desc=f"Entropy series (window {window_size})", leave=False)
            )
        return self._cache[window_size]

    @classmethod
    def from_series(cls, series: List[EntropyTimeSeries], labels, file_ids: Optional[List[str]] = None):
        """In-memory dataset, mainly for tests and synthetic experiments."""
        window_size = series[0].window_size if series else 256
        file_ids = file_ids or [f"series-{i}" for i in range(len(series))]
        return cls([None] * len(series), file_ids, labels, series=series, window_size=window_size)


def load_series(
    corpus: LabeledCorpus, window_size: int = 256, n_jobs: int = 1, labeled_only: bool = True
) -> SeriesDataset:
    """
    Build the evaluation dataset from the labelled part of ``corpus`` (every file when
    ``labeled_only`` is False; unlabeled files then count as benign).

    Files too short for one entropy window are dropped with a warning.
    """
    entries = corpus.labeled().entries if labeled_only else corpus.entries
    results = Parallel(n_jobs=n_jobs)(
        delayed(_series_or_none)(entry.path, window_size) for entry in tqdm(entries, desc="Entropy series")
    )
    kept = [(entry, ets) for entry, ets in zip(entries, results) if ets is not None]
    dataset = SeriesDataset(
        paths=[entry.path for entry, _ in kept],
        file_ids=[entry.file_id for entry, _ in kept],
        labels=np.array([entry.label == MALICIOUS for entry, _ in kept], dtype=bool),
        series=[ets for _, ets in kept],
        window_size=window_size,
        n_jobs=n_jobs,
    )
    logger.info(f"Dataset: {dataset.n_benign} benign, {dataset.n_malicious} malicious")
    return dataset
