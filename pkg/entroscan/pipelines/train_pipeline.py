import logging
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np

from entroscan.classifier.forest import ForestConfig
from entroscan.classifier.model import TrainedModel, save, train
from entroscan.config import PipelineConfig
from entroscan.errors import InsufficientData
from entroscan.evaluation.dataset import SeriesDataset, load_series
from entroscan.tools.featurizer.codebook import Codebook, build_codebook
from entroscan.tools.featurizer.families.bow import local_descriptors
from entroscan.tools.featurizer.featurizer import FeatureVector, pipeline_featurizer
from entroscan.utils.corpus import BENIGN, MALICIOUS, LabeledCorpus

logger = logging.getLogger(__name__)


def corpus_codebook(series: Sequence, config: PipelineConfig = PipelineConfig(), seed: int = 0) -> Codebook:
    """K-means codebook over the local segments of every series."""
    descriptors = [local_descriptors(ets, config.segment_length) for ets in series]
    if not descriptors:
        raise InsufficientData("no entropy series to build a codebook from")
    return build_codebook(
        np.concatenate(descriptors),
        k=config.codebook_size,
        sample_fraction=config.sample_fraction,
        seed=seed,
        segment_length=config.segment_length,
    )


class DetectorTrainer:
    def __init__(
        self,
        pipeline: PipelineConfig = PipelineConfig(),
        forest: ForestConfig = ForestConfig(),
        n_jobs: int = 1,
    ):
        """
        Initialize the DetectorTrainer.

        Args:
            pipeline: Feature settings (window size, segment length, codebook size, families).
            forest: Random forest settings; ``forest.seed`` also seeds the codebook.
            n_jobs: Parallel workers for entropy series and tree growth.
        """
        self.pipeline = pipeline
        self.forest = forest
        self.n_jobs = n_jobs

    def build_codebook(self, corpus: Union[LabeledCorpus, SeriesDataset]) -> Codebook:
        dataset = corpus if isinstance(corpus, SeriesDataset) else load_series(
            corpus, self.pipeline.window_size, n_jobs=self.n_jobs, labeled_only=False
        )
        return corpus_codebook(dataset.series(self.pipeline.window_size), self.pipeline, self.forest.seed)

    def process_features(self, features: List[FeatureVector], codebook: Optional[Codebook] = None) -> TrainedModel:
        """Fit the forest on already extracted feature vectors."""
        return train(
            features,
            self.forest,
            codebook=codebook,
            n_jobs=self.n_jobs,
            window_size=self.pipeline.window_size,
            spectrum_levels=self.pipeline.spectrum_levels,
            families=self.pipeline.families,
        )

    def process_dataset(self, dataset: SeriesDataset, codebook: Optional[Codebook] = None) -> TrainedModel:
        """Build the codebook (unless given) from the dataset, featurize it and fit the forest."""
        dataset.require_both_classes(minimum=1)
        series = dataset.series(self.pipeline.window_size)
        if self.pipeline.uses_codebook and codebook is None:
            codebook = corpus_codebook(series, self.pipeline, self.forest.seed)
        featurizer = pipeline_featurizer(self.pipeline, codebook)
        features = [
            FeatureVector(values=featurizer(ets), file_id=file_id, label=MALICIOUS if label else BENIGN)
            for ets, file_id, label in zip(series, dataset.file_ids, dataset.labels)
        ]
        return self.process_features(features, codebook)

    def __call__(
        self,
        corpus: Union[LabeledCorpus, SeriesDataset],
        codebook: Optional[Codebook] = None,
        output_path: Optional[Union[str, Path]] = None,
    ) -> TrainedModel:
        """
        Train a detector on a labelled corpus.

        Examples:
            >>> trainer = DetectorTrainer(forest=ForestConfig(n_trees=200, seed=7))
            >>> model = trainer(ingest("corpus/", "corpus/labels.csv"), output_path="model.json")
        """
        dataset = corpus if isinstance(corpus, SeriesDataset) else load_series(
            corpus, self.pipeline.window_size, n_jobs=self.n_jobs
        )
        model = self.process_dataset(dataset, codebook)
        if output_path is not None:
            save(model, output_path)
        return model
