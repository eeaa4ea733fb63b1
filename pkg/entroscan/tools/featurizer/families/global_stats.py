from dataclasses import astuple, dataclass, fields

import numpy as np

from entroscan.errors import EmptyInput
from entroscan.signal.entropy import EntropyTimeSeries
from entroscan.tools.featurizer.basis import FeatureBasis

HIGH_ENTROPY = 7.0


@dataclass(frozen=True)
class GlobalFeatures:
    length: int
    mean: float
    stdev: float
    max_value: float
    max_percentage: float
    zero_percentage: float

    def to_vector(self) -> np.ndarray:
        return np.asarray(astuple(self), dtype=np.float64)


GLOBAL_DIM = len(fields(GlobalFeatures))


def global_features(ets: EntropyTimeSeries) -> GlobalFeatures:
    """Order-free statistics of the whole series (population stdev, strict > 7.0 share)."""
    values = ets.values
    n = values.shape[0]
    if n == 0:
        raise EmptyInput("global features of an empty entropy time series")
    return GlobalFeatures(
        length=n,
        mean=float(values.mean()),
        stdev=float(values.std()),
        max_value=float(values.max()),
        max_percentage=float(np.count_nonzero(values > HIGH_ENTROPY) / n),
        zero_percentage=float(np.count_nonzero(values == 0.0) / n),
    )


class GlobalStats(FeatureBasis):
    def __init__(self):
        super().__init__(name="global")
        self.dim = 6

    def featurize(self, ets):
        return global_features(ets).to_vector()
