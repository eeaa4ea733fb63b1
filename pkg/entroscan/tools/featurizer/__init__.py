from entroscan.tools.featurizer.codebook import Codebook, LocalFeature, build_codebook
from entroscan.tools.featurizer.featurizer import FeatureList, FeatureVector, extract, feature_families

__all__ = ["Codebook", "FeatureList", "FeatureVector", "LocalFeature", "build_codebook", "extract", "feature_families"]
