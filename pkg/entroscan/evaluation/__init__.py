from entroscan.evaluation.ablation import ablate
from entroscan.evaluation.dataset import SeriesDataset, load_series
from entroscan.evaluation.grid import GridResult, grid_search, sweep_grid
from entroscan.evaluation.holdout import repeated_holdout
from entroscan.evaluation.metrics import (
    ConfusionCounts,
    EvalReport,
    metrics,
    roc_auc,
    roc_curve,
    tpr_at_fpr,
)

__all__ = [
    "ConfusionCounts",
    "EvalReport",
    "GridResult",
    "SeriesDataset",
    "ablate",
    "grid_search",
    "load_series",
    "metrics",
    "repeated_holdout",
    "roc_auc",
    "roc_curve",
    "sweep_grid",
    "tpr_at_fpr",
]
