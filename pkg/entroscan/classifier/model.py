"""Trained detector: forest + codebook + pipeline settings, persisted as one JSON document."""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from entroscan.classifier.forest import DecisionTree, ForestConfig, RandomForest
from entroscan.config import FAMILY_ORDER
from entroscan.errors import DegenerateLabels, ParseError, ShapeError, UnsupportedVersion
from entroscan.signal.wavelet import SPECTRUM_LEVELS
from entroscan.tools.featurizer.codebook import Codebook
from entroscan.tools.featurizer.families.global_stats import GLOBAL_DIM
from entroscan.utils.corpus import BENIGN, MALICIOUS

logger = logging.getLogger(__name__)

MODEL_FORMAT_VERSION = 1
DEFAULT_THRESHOLD = 0.5


def expected_feature_dim(families: Sequence[str], spectrum_levels: int, codebook: Optional[Codebook]) -> int:
    """
    Vector length produced by ``families``: global 6, dwt ``spectrum_levels``, bow ``codebook.k``.

    Raises:
        ValueError: an unknown family, or bow without a codebook.
    """
    unknown = [name for name in families if name not in FAMILY_ORDER]
    if unknown or not families:
        raise ValueError(f"families must be a non-empty subset of {FAMILY_ORDER}, got {list(families)}")
    if "bow" in families and codebook is None:
        raise ValueError("bow features need a codebook")
    sizes = {"global": GLOBAL_DIM, "dwt": spectrum_levels, "bow": 0 if codebook is None else codebook.k}
    return sum(sizes[name] for name in families)


@dataclass(frozen=True)
class Verdict:
    score: float
    label: str
    threshold: float = DEFAULT_THRESHOLD

    @classmethod
    def from_score(cls, score: float, threshold: float = DEFAULT_THRESHOLD) -> "Verdict":
        return cls(score=float(score), label=MALICIOUS if score >= threshold else BENIGN, threshold=threshold)


@dataclass(eq=False)
class TrainedModel:
    forest: RandomForest
    codebook: Optional[Codebook]
    feature_dim: int
    window_size: int = 256
    spectrum_levels: int = SPECTRUM_LEVELS
    families: Tuple[str, ...] = ("global", "dwt", "bow")
    threshold: float = DEFAULT_THRESHOLD
    format_version: int = field(default=MODEL_FORMAT_VERSION)

    @property
    def config(self) -> ForestConfig:
        return self.forest.config

    @property
    def trees(self) -> List[DecisionTree]:
        return self.forest.trees

    def scores(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.feature_dim:
            raise ShapeError(f"model expects {self.feature_dim} features, got {X.shape[1]}")
        return self.forest.predict_proba(X)

    def to_document(self) -> dict:
        return {
            "format_version": self.format_version,
            "config": self.config.to_dict(),
            "codebook": None if self.codebook is None else self.codebook.to_dict(),
            "feature_dim": self.feature_dim,
            "window_size": self.window_size,
            "spectrum_levels": self.spectrum_levels,
            "families": list(self.families),
            "threshold": self.threshold,
            "trees": [tree.to_dict() for tree in self.trees],
        }

    @classmethod
    def from_document(cls, doc) -> "TrainedModel":
        if not isinstance(doc, dict):
            raise ParseError("model document must be a JSON object")
        version = doc.get("format_version")
        if version != MODEL_FORMAT_VERSION:
            raise UnsupportedVersion(f"unsupported model format_version {version!r}")
        try:
            config = ForestConfig.from_dict(doc["config"])
            feature_dim = int(doc["feature_dim"])
            codebook = None if doc.get("codebook") is None else Codebook.from_dict(doc["codebook"])
            trees = [DecisionTree.from_dict(tree, feature_dim, config.max_depth) for tree in doc["trees"]]
            model = cls(
                forest=RandomForest(config, trees=trees, feature_dim=feature_dim),
                codebook=codebook,
                feature_dim=feature_dim,
                window_size=int(doc.get("window_size", 256)),
                spectrum_levels=int(doc.get("spectrum_levels", SPECTRUM_LEVELS)),
                families=tuple(doc.get("families", FAMILY_ORDER)),
                threshold=float(doc.get("threshold", DEFAULT_THRESHOLD)),
            )
            expected = expected_feature_dim(model.families, model.spectrum_levels, codebook)
        except ParseError:
            raise
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"malformed model document: {e}") from e
        if feature_dim != expected:
            raise ParseError(
                f"model declares feature_dim={feature_dim} but families {list(model.families)} "
                f"produce {expected} values"
            )
        if not trees:
            raise ParseError("model holds no trees")
        return model


def train(
    features: Sequence,
    config: ForestConfig = ForestConfig(),
    codebook: Optional[Codebook] = None,
    n_jobs: int = 1,
    **model_kwargs,
) -> TrainedModel:
    """
    Fit a forest on labelled FeatureVectors.

    Raises:
        DegenerateLabels: fewer than two samples or a single class.
        ShapeError: vectors of different lengths.
    """
    labelled = [vector for vector in features if vector.label is not None]
    if len(labelled) < len(features):
        logger.warning(f"Ignoring {len(features) - len(labelled)} unlabeled feature vectors")
    dims = {len(vector) for vector in labelled}
    if len(dims) > 1:
        raise ShapeError(f"feature vectors have different lengths: {sorted(dims)}")
    labels = np.array([vector.label == MALICIOUS for vector in labelled], dtype=np.float64)
    if labels.shape[0] < 2 or labels.min() == labels.max():
        raise DegenerateLabels("training needs both benign and malicious samples")
    X = np.stack([vector.values for vector in labelled])
    forest = RandomForest(config).fit(X, labels, n_jobs=n_jobs)
    return TrainedModel(forest=forest, codebook=codebook, feature_dim=X.shape[1], **model_kwargs)


def predict(model: TrainedModel, features, threshold: Optional[float] = None) -> Verdict:
    values = features.values if hasattr(features, "values") else features
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.shape[0] != model.feature_dim:
        raise ShapeError(f"model expects {model.feature_dim} features, got {values.shape[0]}")
    threshold = model.threshold if threshold is None else threshold
    return Verdict.from_score(float(model.scores(values[None, :])[0]), threshold)


def dumps_model(model: TrainedModel) -> str:
    return json.dumps(model.to_document(), separators=(",", ":"))


def save(model: TrainedModel, path) -> None:
    Path(path).write_text(dumps_model(model), encoding="utf-8")
    logger.info(f"Saved model with {len(model.trees)} trees to {path}")


def load(path) -> TrainedModel:
    """
    Raises:
        UnsupportedVersion: the document declares another format_version.
        ParseError: the file is not a complete model document.
    """
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ParseError(f"{path}: not a JSON model document: {e}") from e
    return TrainedModel.from_document(doc)


def load_codebook(path) -> Codebook:
    """Accept either a codebook document or a model file that embeds one."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ParseError(f"{path}: not a JSON document: {e}") from e
    if isinstance(doc, dict) and "trees" in doc:
        model = TrainedModel.from_document(doc)
        if model.codebook is None:
            raise ParseError(f"{path}: model carries no codebook")
        return model.codebook
    return Codebook.from_document(doc)
