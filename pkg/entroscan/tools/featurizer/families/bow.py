"""Bag-of-words view of an entropy time series: codeword histogram of its segments."""

from dataclasses import dataclass

import numpy as np

from entroscan.signal.entropy import EntropyTimeSeries
from entroscan.signal.wavelet import approximation_features
from entroscan.tools.featurizer.basis import FeatureBasis
from entroscan.tools.featurizer.codebook import Codebook, LocalFeature, descriptor_dim
from entroscan.utils.framing import frame_array


@dataclass(eq=False)
class BowHistogram:
    weights: np.ndarray

    @property
    def k(self) -> int:
        return self.weights.shape[0]


def _values(ets):
    return ets.values if isinstance(ets, EntropyTimeSeries) else np.asarray(ets, dtype=np.float64).ravel()


def segment(ets, segment_length: int) -> np.ndarray:
    """Consecutive non-overlapping slices of ``segment_length`` values; the partial tail is dropped."""
    if segment_length < 2:
        raise ValueError(f"segment_length must be >= 2, got {segment_length}")
    return frame_array(_values(ets), segment_length, end="cut")


def describe_segment(segment_values, segment_length: int = 6) -> np.ndarray:
    """Approximation coefficients of every Haar level of the zero-padded segment, finest first."""
    segment_values = np.asarray(segment_values, dtype=np.float64).ravel()
    if segment_values.shape[0] != segment_length:
        raise ValueError(f"segment must hold {segment_length} values, got {segment_values.shape[0]}")
    return approximation_features(segment_values[None, :])[0]


def describe_segments(segments: np.ndarray) -> np.ndarray:
    return approximation_features(segments)


def local_descriptors(ets, segment_length: int) -> np.ndarray:
    segments = segment(ets, segment_length)
    if segments.shape[0] == 0:
        return np.zeros((0, descriptor_dim(segment_length)))
    return describe_segments(segments)


def local_features(ets, segment_length: int, file_id: str = "") -> list:
    return [
        LocalFeature(vector=vector, source=(file_id, index))
        for index, vector in enumerate(local_descriptors(ets, segment_length))
    ]


def encode(ets, codebook: Codebook) -> BowHistogram:
    """
    L1-normalized histogram of nearest codewords over the segments of ``ets``.

    A series with no complete segment maps to the all-zero histogram.
    """
    descriptors = local_descriptors(ets, codebook.segment_length)
    counts = np.bincount(codebook.assign(descriptors), minlength=codebook.k).astype(np.float64)
    if descriptors.shape[0]:
        counts /= descriptors.shape[0]
    return BowHistogram(weights=counts)


class BagOfWords(FeatureBasis):
    def __init__(self, codebook: Codebook):
        super().__init__(name="bow")
        self.needs_codebook = True
        self.codebook = codebook
        self.dim = codebook.k

    def featurize(self, ets):
        return encode(ets, self.codebook).weights
