"""Feature-family ablation: the same evaluation protocol on every family combination."""

import itertools
import logging
from typing import List, Tuple

from entroscan.config import FAMILY_ORDER, ExperimentConfig
from entroscan.evaluation.dataset import SeriesDataset
from entroscan.evaluation.holdout import repeated_holdout
from entroscan.evaluation.metrics import EvalReport

logger = logging.getLogger(__name__)


def family_combinations(families=FAMILY_ORDER) -> List[Tuple[str, ...]]:
    """Every non-empty subset, singles first, in canonical family order."""
    return [
        combination
        for size in range(1, len(families) + 1)
        for combination in itertools.combinations(families, size)
    ]


def ablate(
    dataset: SeriesDataset,
    config: ExperimentConfig = ExperimentConfig(),
    seed: int = 0,
    repeats: int = 3,
    train_fraction: float = 0.7,
    combinations=None,
    n_jobs: int = 1,
) -> List[Tuple[Tuple[str, ...], EvalReport]]:
    """
    Evaluate each family combination on identical splits (all runs share ``seed``), so
    differences come from the features alone.
    """
    results = []
    for families in combinations or family_combinations():
        logger.info(f"Ablation: {'+'.join(families)}")
        report = repeated_holdout(
            dataset,
            config.with_families(families),
            repeats=repeats,
            train_fraction=train_fraction,
            seed=seed,
            n_jobs=n_jobs,
        )
        results.append((tuple(families), report))
    return results
