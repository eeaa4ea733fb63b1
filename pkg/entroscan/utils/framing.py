"""Non-overlapping framing of 1-D arrays.

Reworked from the ``segment_axis`` helper of scikits.talkbox (Anne Archibald), reduced to
the two end policies the entropy and bag-of-words stages need.
"""

import numpy as np


def frame_array(a, length, end="cut", endvalue=0, min_tail=0):
    """Chop ``a`` into consecutive non-overlapping frames of ``length`` elements.

    arguments:
    a          1-D array to frame
    length     frame length
    end        what to do with a trailing partial frame:
               'cut'  discard it
               'pad'  pad it with ``endvalue`` up to ``length``
    endvalue   value used by 'pad'
    min_tail   with 'pad', a partial tail is kept only when it holds more than
               ``min_tail`` elements; shorter tails are discarded

    Returns a 2-D array of shape (n_frames, length); n_frames may be 0.
    """
    a = np.ravel(a)
    if length <= 0:
        raise ValueError("length must be positive")
    if end not in ("cut", "pad"):
        raise ValueError("end has to be either 'cut' or 'pad'.")

    n_full, tail = divmod(a.shape[0], length)
    if end == "pad" and tail > min_tail:
        b = np.full(((n_full + 1) * length,), endvalue, dtype=a.dtype)
        b[: a.shape[0]] = a
        return b.reshape(n_full + 1, length)
    return a[: n_full * length].reshape(n_full, length)
