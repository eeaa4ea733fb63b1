import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entroscan.errors import EmptyInput
from entroscan.signal.entropy import block_entropy, compute_ets


def histogram_entropy(block: bytes) -> float:
    n = len(block)
    return -sum(count / n * math.log2(count / n) for count in Counter(block).values())


def test_block_entropy_matches_histogram_oracle():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        # vary the alphabet so low and high entropies are both covered
        block = rng.integers(0, int(rng.integers(1, 257)), 256, dtype=np.uint8).tobytes()
        assert abs(block_entropy(block) - histogram_entropy(block)) < 1e-9


def test_block_entropy_extremes():
    assert block_entropy(b"\x41" * 256) == 0.0
    assert block_entropy(bytes(range(256))) == 8.0
    assert block_entropy(b"\x00" * 128 + b"\xff" * 128) == 1.0


@pytest.mark.parametrize("length", [0, 255, 257])
def test_block_entropy_rejects_wrong_length(length):
    with pytest.raises(ValueError):
        block_entropy(b"\x00" * length)


@pytest.mark.parametrize("length, expected", [(256, 1), (384, 1), (385, 2), (400, 2), (512, 2), (129, 1)])
def test_partial_window_rule(length, expected):
    assert len(compute_ets(b"\x07" * length)) == expected


def test_padded_tail_counts_zero_bytes():
    rng = np.random.default_rng(1)
    stream = rng.integers(1, 256, 400, dtype=np.uint8).tobytes()
    ets = compute_ets(stream)
    assert len(ets) == 2
    assert ets.values[0] == pytest.approx(histogram_entropy(stream[:256]), abs=1e-12)
    assert ets.values[1] == pytest.approx(histogram_entropy(stream[256:] + b"\x00" * 112), abs=1e-12)


@pytest.mark.parametrize("length", [0, 1, 128])
def test_too_short_stream_is_empty_input(length):
    with pytest.raises(EmptyInput):
        compute_ets(b"\x01" * length)


def test_uniform_random_windows_are_high_entropy():
    rng = np.random.default_rng(2)
    ets = compute_ets(rng.integers(0, 256, 512, dtype=np.uint8).tobytes())
    assert len(ets) == 2
    assert np.all((ets.values > 7.0) & (ets.values <= 8.0))


def test_appending_constant_window_appends_zero():
    rng = np.random.default_rng(3)
    stream = rng.integers(0, 256, 512, dtype=np.uint8).tobytes()
    before = compute_ets(stream).values
    after = compute_ets(stream + b"\x41" * 256).values
    np.testing.assert_array_equal(after[:-1], before)
    assert after[-1] == 0.0


def test_values_stay_in_range():
    rng = np.random.default_rng(4)
    stream = b"".join(rng.integers(0, top, 4096, dtype=np.uint8).tobytes() for top in (1, 2, 16, 256))
    values = compute_ets(stream).values
    assert values.min() >= 0.0 and values.max() <= 8.0


@given(st.binary(min_size=256, max_size=256), st.randoms(use_true_random=False))
@settings(max_examples=200, deadline=None)
def test_permuting_a_window_keeps_its_entropy(block, random):
    shuffled = bytearray(block)
    random.shuffle(shuffled)
    assert block_entropy(bytes(shuffled)) == pytest.approx(block_entropy(block), abs=1e-12)
