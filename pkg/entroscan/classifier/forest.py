"""CART trees with Gini splits, bagged into a random forest."""

import logging
import math
from dataclasses import asdict, dataclass, field, replace
from typing import List, Optional

import numpy as np
from joblib import Parallel, delayed

from entroscan.errors import DegenerateLabels, ParseError, ShapeError
from entroscan.utils.seeding import derive_rng

logger = logging.getLogger(__name__)

LEAF = -1


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 500
    max_depth: int = 30
    min_samples_split: int = 2
    # None means floor(sqrt(dim)), resolved at training time
    features_per_split: Optional[int] = None
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError(f"n_trees must be >= 1, got {self.n_trees}")
        if self.max_depth < 1:
            raise ValueError(f"max_depth must be >= 1, got {self.max_depth}")
        if self.min_samples_split < 2:
            raise ValueError(f"min_samples_split must be >= 2, got {self.min_samples_split}")
        if self.features_per_split is not None and self.features_per_split < 1:
            raise ValueError(f"features_per_split must be >= 1, got {self.features_per_split}")

    def resolve_features_per_split(self, dim: int) -> int:
        mtry = self.features_per_split if self.features_per_split is not None else max(1, math.isqrt(dim))
        if not 1 <= mtry <= dim:
            raise ShapeError(f"features_per_split={mtry} must lie in [1, {dim}]")
        return mtry

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "ForestConfig":
        try:
            bootstrap = doc["bootstrap"]
            if not isinstance(bootstrap, bool):
                raise TypeError(f"bootstrap must be a JSON boolean, got {bootstrap!r}")
            return cls(
                n_trees=int(doc["n_trees"]),
                max_depth=int(doc["max_depth"]),
                min_samples_split=int(doc["min_samples_split"]),
                features_per_split=None if doc["features_per_split"] is None else int(doc["features_per_split"]),
                bootstrap=bootstrap,
                seed=int(doc["seed"]),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"malformed forest config: {e}") from e


def gini(positives: float, total: float) -> float:
    if total == 0:
        return 0.0
    p = positives / total
    return 2.0 * p * (1.0 - p)


def best_split(x: np.ndarray, y: np.ndarray):
    """
    Best Gini split of one feature column.

    Returns:
        (weighted child impurity, threshold) or None when the column is constant.
        Thresholds are midpoints between adjacent distinct sorted values; samples with
        value <= threshold go left.
    """
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    n = xs.shape[0]
    valid = xs[:-1] < xs[1:]
    if not valid.any():
        return None

    n_left = np.arange(1, n, dtype=np.float64)
    n_right = n - n_left
    pos_left = np.cumsum(ys)[:-1]
    pos_right = ys.sum() - pos_left
    # sum over children of n_child * gini(child), divided by n
    impurity = (
        2.0 * pos_left * (n_left - pos_left) / n_left + 2.0 * pos_right * (n_right - pos_right) / n_right
    ) / n
    impurity = np.where(valid, impurity, np.inf)
    i = int(np.argmin(impurity))
    threshold = (xs[i] + xs[i + 1]) / 2.0
    if not xs[i] <= threshold < xs[i + 1]:
        threshold = xs[i]
    return float(impurity[i]), float(threshold)


@dataclass(eq=False)
class DecisionTree:
    """Flat array form; node 0 is the root, ``feature == LEAF`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=np.int64)
        for node in range(self.n_nodes):
            if self.feature[node] != LEAF:
                depths[self.left[node]] = depths[node] + 1
                depths[self.right[node]] = depths[node] + 1
        return int(depths.max())

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by every row of X."""
        nodes = np.zeros(X.shape[0], dtype=np.int64)
        active = np.flatnonzero(self.feature[nodes] != LEAF)
        while active.size:
            current = nodes[active]
            go_left = X[active, self.feature[current]] <= self.threshold[current]
            nodes[active] = np.where(go_left, self.left[current], self.right[current])
            active = active[self.feature[nodes[active]] != LEAF]
        return nodes

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def to_dict(self, node: int = 0) -> dict:
        stack_root = {}
        stack = [(node, stack_root)]
        while stack:
            index, out = stack.pop()
            if self.feature[index] == LEAF:
                out["leaf"] = float(self.value[index])
                continue
            out["feature"] = int(self.feature[index])
            out["threshold"] = float(self.threshold[index])
            out["left"], out["right"] = {}, {}
            stack.append((int(self.right[index]), out["right"]))
            stack.append((int(self.left[index]), out["left"]))
        return stack_root

    @classmethod
    def from_dict(cls, doc: dict, feature_dim: int, max_depth: Optional[int] = None) -> "DecisionTree":
        builder = _TreeBuilder()
        stack = [(doc, builder.add_leaf(0.0), 0)]
        try:
            while stack:
                node_doc, index, depth = stack.pop()
                if max_depth is not None and depth > max_depth:
                    raise ParseError(f"tree deeper than max_depth={max_depth}")
                if "leaf" in node_doc:
                    fraction = float(node_doc["leaf"])
                    if not 0.0 <= fraction <= 1.0:
                        raise ParseError(f"leaf fraction {fraction} outside [0, 1]")
                    builder.value[index] = fraction
                    continue
                feature = int(node_doc["feature"])
                if not 0 <= feature < feature_dim:
                    raise ParseError(f"split feature {feature} outside [0, {feature_dim})")
                left, right = builder.add_leaf(0.0), builder.add_leaf(0.0)
                builder.make_split(index, feature, float(node_doc["threshold"]), left, right)
                stack.append((node_doc["right"], right, depth + 1))
                stack.append((node_doc["left"], left, depth + 1))
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, ParseError):
                raise
            raise ParseError(f"malformed tree node: {e}") from e
        return builder.build()


@dataclass
class _TreeBuilder:
    feature: List[int] = field(default_factory=list)
    threshold: List[float] = field(default_factory=list)
    left: List[int] = field(default_factory=list)
    right: List[int] = field(default_factory=list)
    value: List[float] = field(default_factory=list)

    def add_leaf(self, value: float) -> int:
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(value)
        return len(self.feature) - 1

    def make_split(self, index: int, feature: int, threshold: float, left: int, right: int):
        self.feature[index] = feature
        self.threshold[index] = threshold
        self.left[index] = left
        self.right[index] = right

    def build(self) -> DecisionTree:
        return DecisionTree(
            feature=np.asarray(self.feature, dtype=np.int64),
            threshold=np.asarray(self.threshold, dtype=np.float64),
            left=np.asarray(self.left, dtype=np.int64),
            right=np.asarray(self.right, dtype=np.int64),
            value=np.asarray(self.value, dtype=np.float64),
        )


def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    max_depth: int,
    min_samples_split: int,
    features_per_split: int,
    rng: np.random.Generator,
) -> DecisionTree:
    """
    Grow one CART tree on (X, y) with y in {0, 1}.

    At every node candidate features are drawn in random order and the search goes on
    until ``features_per_split`` non-constant ones have been evaluated (or none remain).
    Leaves hold the fraction of class-1 samples that reached them.
    """
    n, dim = X.shape
    builder = _TreeBuilder()
    root = builder.add_leaf(float(y.mean()))
    stack = [(root, np.arange(n), 0)]
    while stack:
        index, rows, depth = stack.pop()
        labels = y[rows]
        positives = float(labels.sum())
        builder.value[index] = positives / rows.shape[0]
        if depth >= max_depth or rows.shape[0] < min_samples_split or positives in (0.0, rows.shape[0]):
            continue

        best = None
        evaluated = 0
        for feature in rng.permutation(dim):
            split = best_split(X[rows, feature], labels)
            if split is None:
                continue
            evaluated += 1
            if best is None or split[0] < best[0]:
                best = (split[0], split[1], int(feature))
            if evaluated == features_per_split:
                break
        if best is None:
            continue

        impurity, threshold, feature = best
        parent = gini(positives, rows.shape[0])
        assert impurity <= parent + 1e-12, f"split impurity {impurity} exceeds parent impurity {parent}"

        go_left = X[rows, feature] <= threshold
        left, right = builder.add_leaf(0.0), builder.add_leaf(0.0)
        builder.make_split(index, feature, threshold, left, right)
        stack.append((right, rows[~go_left], depth + 1))
        stack.append((left, rows[go_left], depth + 1))
    return builder.build()


def _fit_tree(X, y, config: ForestConfig, features_per_split: int, tree_index: int) -> DecisionTree:
    rng = derive_rng(config.seed, tree_index)
    if config.bootstrap:
        rows = rng.integers(0, X.shape[0], X.shape[0])
        X, y = X[rows], y[rows]
    return grow_tree(X, y, config.max_depth, config.min_samples_split, features_per_split, rng)


class RandomForest:
    """
    Bagged CART trees scoring the malicious-class probability.

    Tree ``i`` draws everything from a generator derived from (seed, i), so the fitted
    forest does not depend on ``n_jobs``.
    """

    def __init__(self, config: ForestConfig = ForestConfig(), trees: Optional[List[DecisionTree]] = None,
                 feature_dim: Optional[int] = None):
        self.config = config
        self.trees = trees or []
        self.feature_dim = feature_dim

    def fit(self, X, y, n_jobs: int = 1, progress: bool = False) -> "RandomForest":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64).ravel()
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise ShapeError(f"expected an (n, dim) matrix with n labels, got {X.shape} and {y.shape[0]} labels")
        if X.shape[0] < 2 or np.unique(y).shape[0] < 2:
            raise DegenerateLabels("training needs at least two samples covering both classes")
        if not np.all(np.isfinite(X)):
            raise ShapeError("feature matrix contains non-finite values")

        self.feature_dim = X.shape[1]
        mtry = self.config.resolve_features_per_split(self.feature_dim)
        self.config = replace(self.config, features_per_split=mtry)
        logger.info(
            f"Growing {self.config.n_trees} trees on {X.shape[0]} samples x {self.feature_dim} features "
            f"(max_depth={self.config.max_depth}, features_per_split={mtry})"
        )
        self.trees = Parallel(n_jobs=n_jobs, verbose=10 if progress else 0)(
            delayed(_fit_tree)(X, y, self.config, mtry, i) for i in range(self.config.n_trees)
        )
        return self

    def predict_proba(self, X) -> np.ndarray:
        """Mean leaf fraction over trees for every row."""
        if not self.trees:
            raise ValueError("the forest has not been fitted")
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.feature_dim:
            raise ShapeError(f"expected {self.feature_dim} features, got {X.shape[1]}")
        total = np.zeros(X.shape[0], dtype=np.float64)
        for tree in self.trees:
            total += tree.predict(X)
        return total / len(self.trees)
