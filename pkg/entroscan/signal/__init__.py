from entroscan.signal.entropy import EntropyTimeSeries, block_entropy, compute_ets
from entroscan.signal.wavelet import EnergySpectrum, HaarDecomposition, energy_spectrum, haar_dwt, haar_idwt

__all__ = [
    "EnergySpectrum",
    "EntropyTimeSeries",
    "HaarDecomposition",
    "block_entropy",
    "compute_ets",
    "energy_spectrum",
    "haar_dwt",
    "haar_idwt",
]
