from entroscan.signal.wavelet import SPECTRUM_LEVELS, energy_spectrum
from entroscan.tools.featurizer.basis import FeatureBasis


class WaveletEnergy(FeatureBasis):
    def __init__(self, n_levels=SPECTRUM_LEVELS):
        super().__init__(name="dwt")
        self.dim = n_levels

    def featurize(self, ets):
        return energy_spectrum(ets, self.dim).energies
