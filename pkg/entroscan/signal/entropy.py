"""Entropy time series: one Shannon entropy value per fixed-size byte window."""

from dataclasses import dataclass

import numpy as np

from entroscan.errors import EmptyInput
from entroscan.utils.framing import frame_array

WINDOW_SIZE = 256
ALPHABET = 256
MAX_ENTROPY = 8.0

# Rows per bincount batch; bounds the count matrix to a few MB.
_BATCH_ROWS = 4096


@dataclass(eq=False)
class EntropyTimeSeries:
    values: np.ndarray
    window_size: int = WINDOW_SIZE

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).ravel()

    def __len__(self):
        return self.values.shape[0]


def _frame_entropies(frames: np.ndarray) -> np.ndarray:
    n_frames, width = frames.shape
    out = np.empty(n_frames, dtype=np.float64)
    for lo in range(0, n_frames, _BATCH_ROWS):
        batch = frames[lo : lo + _BATCH_ROWS].astype(np.int64)
        rows = batch.shape[0]
        offsets = np.arange(rows, dtype=np.int64)[:, None] * ALPHABET
        counts = np.bincount((batch + offsets).ravel(), minlength=rows * ALPHABET).reshape(rows, ALPHABET)
        p = counts / width
        # 0 * log2(0) is taken as 0
        plogp = np.where(counts > 0, p * np.log2(np.where(counts > 0, p, 1.0)), 0.0)
        out[lo : lo + rows] = -plogp.sum(axis=1) + 0.0
    return np.clip(out, 0.0, MAX_ENTROPY)


def block_entropy(block: bytes, window_size: int = WINDOW_SIZE) -> float:
    """Shannon entropy in bits per byte of one window, over the full 256-symbol alphabet."""
    if len(block) != window_size:
        raise ValueError(f"block must hold exactly {window_size} bytes, got {len(block)}")
    frame = np.frombuffer(bytes(block), dtype=np.uint8).reshape(1, window_size)
    return float(_frame_entropies(frame)[0])


def compute_ets(stream: bytes, window_size: int = WINDOW_SIZE) -> EntropyTimeSeries:
    """
    Split ``stream`` into non-overlapping windows and map each to its entropy.

    A trailing partial window longer than half a window is padded with 0x00 bytes and
    kept; a shorter one is discarded.

    Raises:
        EmptyInput: when the stream yields no window at all.
    """
    data = np.frombuffer(bytes(stream), dtype=np.uint8)
    frames = frame_array(data, window_size, end="pad", endvalue=0, min_tail=window_size // 2)
    if frames.shape[0] == 0:
        raise EmptyInput(
            f"stream of {data.shape[0]} bytes is shorter than {window_size // 2 + 1} bytes, no entropy window"
        )
    return EntropyTimeSeries(_frame_entropies(frames), window_size)
