from dataclasses import dataclass, field, replace
from typing import Tuple

from entroscan.classifier.forest import ForestConfig

FAMILY_ORDER = ("global", "dwt", "bow")


@dataclass(frozen=True)
class PipelineConfig:
    """How a file becomes a feature vector."""

    window_size: int = 256
    segment_length: int = 6
    codebook_size: int = 250
    sample_fraction: float = 0.2
    families: Tuple[str, ...] = FAMILY_ORDER
    spectrum_levels: int = 20

    def __post_init__(self):
        unknown = [name for name in self.families if name not in FAMILY_ORDER]
        if unknown or not self.families:
            raise ValueError(f"families must be a non-empty subset of {FAMILY_ORDER}, got {self.families}")
        # canonical order, duplicates removed
        object.__setattr__(self, "families", tuple(name for name in FAMILY_ORDER if name in self.families))
        if self.segment_length < 2:
            raise ValueError(f"segment_length must be >= 2, got {self.segment_length}")
        if self.codebook_size < 2:
            raise ValueError(f"codebook_size must be >= 2, got {self.codebook_size}")
        if not 0.0 < self.sample_fraction <= 1.0:
            raise ValueError(f"sample_fraction must lie in (0, 1], got {self.sample_fraction}")

    @property
    def uses_codebook(self) -> bool:
        return "bow" in self.families


PIPELINE_KEYS = ("segment_length", "codebook_size", "sample_fraction", "window_size")
FOREST_KEYS = ("n_trees", "max_depth", "min_samples_split", "features_per_split", "bootstrap")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one evaluation run needs besides the data and the seed."""

    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    forest: ForestConfig = field(default_factory=ForestConfig)
    threshold: float = 0.5
    max_fpr: float = 0.05

    def with_params(self, **params) -> "ExperimentConfig":
        """Apply a grid point such as ``{"n_trees": 200, "segment_length": 8}``."""
        pipeline_params = {k: v for k, v in params.items() if k in PIPELINE_KEYS}
        forest_params = {k: v for k, v in params.items() if k in FOREST_KEYS}
        unknown = set(params) - set(pipeline_params) - set(forest_params)
        if unknown:
            raise ValueError(f"unknown grid parameter(s): {sorted(unknown)}")
        return replace(
            self,
            pipeline=replace(self.pipeline, **pipeline_params),
            forest=replace(self.forest, **forest_params),
        )

    def with_families(self, families) -> "ExperimentConfig":
        return replace(self, pipeline=replace(self.pipeline, families=tuple(families)))
