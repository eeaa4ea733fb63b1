"""Grid search over forest and representation parameters, ranked by mean AUC."""

import itertools
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from joblib import Parallel, delayed

from entroscan.config import FOREST_KEYS, PIPELINE_KEYS, ExperimentConfig
from entroscan.errors import EntroscanError, ParseError
from entroscan.evaluation.dataset import SeriesDataset
from entroscan.evaluation.holdout import repeated_holdout
from entroscan.evaluation.metrics import EvalReport
from entroscan.utils.seeding import derive_seed

logger = logging.getLogger(__name__)

GRID_KEYS = FOREST_KEYS + PIPELINE_KEYS


@dataclass
class GridResult:
    params: Dict[str, object]
    auc: float
    report: Optional[EvalReport] = None
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.report is None

    def to_dict(self) -> dict:
        return {
            "params": self.params,
            "auc": None if math.isnan(self.auc) else self.auc,
            "report": None if self.report is None else self.report.to_dict(),
            "error": self.error,
        }


def sweep_grid(name: str) -> Dict[str, List[int]]:
    """Standard sweep ranges: "forest" (n_trees x max_depth), "segment" and "codebook"."""
    name = name.lower()
    if name == "forest":
        return {
            "n_trees": list(range(10, 100, 10)) + list(range(100, 2001, 100)),
            "max_depth": list(range(10, 101, 10)),
        }
    elif name == "segment":
        return {"segment_length": list(range(4, 23, 2))}
    elif name == "codebook":
        return {"codebook_size": list(range(80, 291, 10))}
    else:
        raise ValueError(f"unknown sweep {name!r}, expected forest, segment or codebook")


def expand_grid(grid: Union[Dict[str, Sequence], Sequence[Dict[str, object]]]) -> List[Dict[str, object]]:
    """
    Cartesian product of a {key: [values]} grid (or an explicit list of points),
    with duplicate points removed and first-seen order kept.
    """
    if isinstance(grid, dict):
        keys = sorted(grid)
        for key in keys:
            if isinstance(grid[key], (str, bytes)) or not isinstance(grid[key], Sequence) or not grid[key]:
                raise ValueError(f"grid entry {key!r} must be a non-empty list of values")
        points = [dict(zip(keys, values)) for values in itertools.product(*(grid[key] for key in keys))]
    else:
        points = [dict(point) for point in grid]
    if not points:
        raise ValueError("the grid is empty")

    unknown = sorted({key for point in points for key in point} - set(GRID_KEYS))
    if unknown:
        raise ValueError(f"unknown grid parameter(s): {unknown}, expected some of {GRID_KEYS}")

    unique, seen = [], set()
    for point in points:
        key = tuple(sorted(point.items()))
        if key in seen:
            continue
        seen.add(key)
        unique.append(point)
    if len(unique) < len(points):
        logger.info(f"Dropped {len(points) - len(unique)} duplicate grid points")
    return unique


def load_grid(path) -> Dict[str, List]:
    try:
        grid = json.loads(Path(path).read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ParseError(f"{path}: grid file is not JSON: {e}") from e
    if not isinstance(grid, dict) or not all(isinstance(values, list) for values in grid.values()):
        raise ParseError(f"{path}: grid file must map parameter names to lists of values")
    return grid


def _evaluate_point(dataset, config, params, seed, repeats, train_fraction, protocol, folds) -> GridResult:
    try:
        report = repeated_holdout(
            dataset,
            config.with_params(**params),
            repeats=repeats,
            train_fraction=train_fraction,
            seed=seed,
            protocol=protocol,
            folds=folds,
        )
    except (EntroscanError, ValueError) as e:
        logger.warning(f"Grid point {params} failed: {type(e).__name__}: {e}")
        return GridResult(params=params, auc=math.nan, error=f"{type(e).__name__}: {e}")
    return GridResult(params=params, auc=report.auc, report=report)


def grid_search(
    dataset: SeriesDataset,
    grid,
    config: ExperimentConfig = ExperimentConfig(),
    seed: int = 0,
    repeats: int = 3,
    train_fraction: float = 0.7,
    protocol: str = "holdout",
    folds: int = 3,
    n_jobs: int = 1,
) -> List[GridResult]:
    """
    Evaluate every grid point with repeated holdout.

    Point ``i`` (after deduplication) is evaluated with seed derive_seed(seed, i).
    Results are sorted by AUC descending, ties broken by fewer trees then shallower
    depth; failed points carry AUC NaN and come last.
    """
    points = expand_grid(grid)
    logger.info(f"Grid search over {len(points)} points")
    results = Parallel(n_jobs=n_jobs)(
        delayed(_evaluate_point)(
            dataset, config, params, derive_seed(seed, index), repeats, train_fraction, protocol, folds
        )
        for index, params in enumerate(points)
    )

    def rank(result: GridResult):
        n_trees = result.params.get("n_trees", config.forest.n_trees)
        max_depth = result.params.get("max_depth", config.forest.max_depth)
        return (-result.auc, n_trees, max_depth)

    ranked = sorted([r for r in results if not r.failed], key=rank)
    return ranked + [r for r in results if r.failed]
