import numpy as np

from entroscan.signal.entropy import EntropyTimeSeries


class FeatureBasis:
    def __init__(self, name=None):
        # number of values this family contributes to a feature vector
        self.dim = None
        # does the family need a fitted codebook ?
        self.needs_codebook = False
        self.name = name

    def featurize(self, ets: EntropyTimeSeries) -> np.ndarray:
        raise NotImplementedError(f"In {self.name}, featurize is not yet implemented")

    def __call__(self, ets: EntropyTimeSeries) -> np.ndarray:
        """calling the `featurize` function that should be specialised
        depending on the family, and checking its width."""
        values = np.asarray(self.featurize(ets), dtype=np.float64).ravel()
        if values.shape[0] != self.dim:
            raise ValueError(f"{self.name} produced {values.shape[0]} values, expected {self.dim}")
        return values
