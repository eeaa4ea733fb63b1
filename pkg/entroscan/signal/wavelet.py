"""Orthonormal Haar pyramid and the per-level wavelet energy spectrum."""

from dataclasses import dataclass
from typing import List, Union

import numpy as np

from entroscan.errors import EmptyInput
from entroscan.signal.entropy import EntropyTimeSeries

SPECTRUM_LEVELS = 20
SQRT2 = np.sqrt(2.0)


@dataclass(eq=False)
class HaarDecomposition:
    """Detail and approximation coefficients per level, level 1 (finest) first."""

    detail: List[np.ndarray]
    approx: List[np.ndarray]

    @property
    def levels(self) -> int:
        return len(self.detail)


@dataclass(eq=False)
class EnergySpectrum:
    energies: np.ndarray
    levels: int

    def __len__(self):
        return self.energies.shape[0]


def is_dyadic(n: int) -> bool:
    return n >= 2 and (n & (n - 1)) == 0


def next_dyadic(n: int) -> int:
    """Smallest power of two >= n, with 1 mapped to 2."""
    return max(2, 1 << (max(n, 1) - 1).bit_length())


def haar_dwt(series) -> HaarDecomposition:
    """
    Full Haar pyramid of a dyadic-length series.

    a_k = (x_2k + x_2k+1) / sqrt(2), d_k = (x_2k - x_2k+1) / sqrt(2), recursing on the
    approximation until a single coefficient remains.
    """
    a = np.asarray(series, dtype=np.float64).ravel()
    if not is_dyadic(a.shape[0]):
        raise ValueError(f"Haar decomposition needs a power-of-two length >= 2, got {a.shape[0]}")

    detail, approx = [], []
    while a.shape[0] > 1:
        even, odd = a[0::2], a[1::2]
        detail.append((even - odd) / SQRT2)
        a = (even + odd) / SQRT2
        approx.append(a)
    return HaarDecomposition(detail=detail, approx=approx)


def haar_idwt(decomposition: HaarDecomposition) -> np.ndarray:
    """Invert the pyramid from the coarsest approximation and every detail level."""
    a = decomposition.approx[-1]
    for d in reversed(decomposition.detail):
        x = np.empty(2 * d.shape[0], dtype=np.float64)
        x[0::2] = (a + d) / SQRT2
        x[1::2] = (a - d) / SQRT2
        a = x
    return a


def pad_dyadic(values) -> np.ndarray:
    """Zero-pad at the tail to the next power of two."""
    values = np.asarray(values, dtype=np.float64).ravel()
    padded = np.zeros(next_dyadic(values.shape[0]), dtype=np.float64)
    padded[: values.shape[0]] = values
    return padded


def energy_spectrum(
    ets: Union[EntropyTimeSeries, np.ndarray], n_levels: int = SPECTRUM_LEVELS
) -> EnergySpectrum:
    """
    Per-level detail energy E_j = sum_k d_jk^2, finest level first, fixed at ``n_levels``.

    The series is zero-padded to a dyadic length first; levels beyond the ``n_levels``
    finest are dropped and missing levels are reported as 0.
    """
    values = ets.values if isinstance(ets, EntropyTimeSeries) else np.asarray(ets, dtype=np.float64)
    if values.shape[0] == 0:
        raise EmptyInput("energy spectrum of an empty entropy time series")

    decomposition = haar_dwt(pad_dyadic(values))
    kept = decomposition.detail[:n_levels]
    energies = np.zeros(n_levels, dtype=np.float64)
    energies[: len(kept)] = [float(np.dot(d, d)) for d in kept]
    return EnergySpectrum(energies=energies, levels=len(kept))


def approximation_features(segments: np.ndarray) -> np.ndarray:
    """
    Describe each row of ``segments`` by its Haar approximation coefficients.

    Rows are zero-padded to a dyadic width P, decomposed, and the approximations of
    every level are concatenated finest first (P/2 + P/4 + ... + 1 = P - 1 values).
    """
    segments = np.atleast_2d(np.asarray(segments, dtype=np.float64))
    n_rows, width = segments.shape
    a = np.zeros((n_rows, next_dyadic(width)), dtype=np.float64)
    a[:, :width] = segments

    levels = []
    while a.shape[1] > 1:
        a = (a[:, 0::2] + a[:, 1::2]) / SQRT2
        levels.append(a)
    return np.concatenate(levels, axis=1)
