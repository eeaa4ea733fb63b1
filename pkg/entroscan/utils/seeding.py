import numpy as np


def derive_seed(seed: int, *keys: int) -> int:
    """Derive a stable 32-bit child seed from a master seed and integer keys.

    Used wherever work fans out (trees, repeats, grid points, synthetic files) so the
    result never depends on scheduling order.
    """
    sequence = np.random.SeedSequence([int(seed), *[int(k) for k in keys]])
    return int(sequence.generate_state(1, dtype=np.uint32)[0])


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), *[int(k) for k in keys]]))
