"""K-means codebook over local-segment descriptors."""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Sequence, Union

import numpy as np

from entroscan.errors import InsufficientData, ParseError, UnsupportedVersion
from entroscan.signal.wavelet import next_dyadic
from entroscan.utils.seeding import derive_rng

logger = logging.getLogger(__name__)

CODEBOOK_FORMAT_VERSION = 1
MAX_ITER = 100
TOLERANCE = 1e-6

# Cap on the (rows x k x d) difference block materialized at once.
_DISTANCE_BLOCK = 1 << 22


@dataclass(eq=False)
class LocalFeature:
    vector: np.ndarray
    source: tuple = ("", 0)


def descriptor_dim(segment_length: int) -> int:
    """Width of the approximation descriptor of one segment (P - 1 for dyadic width P)."""
    return next_dyadic(segment_length) - 1


def squared_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Exact squared Euclidean distances, computed from explicit differences."""
    n, k = points.shape[0], centroids.shape[0]
    out = np.empty((n, k), dtype=np.float64)
    rows = max(1, _DISTANCE_BLOCK // max(1, k * points.shape[1]))
    for lo in range(0, n, rows):
        diff = points[lo : lo + rows, None, :] - centroids[None, :, :]
        out[lo : lo + rows] = np.einsum("nkd,nkd->nk", diff, diff)
    return out


def nearest_centroid(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Index of the closest centroid per row; ties go to the lowest index."""
    if points.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    return np.argmin(squared_distances(points, centroids), axis=1)


@dataclass(eq=False)
class Codebook:
    centroids: np.ndarray
    segment_length: int = 6
    seed: int = 0
    objective_history: List[float] = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.centroids = np.asarray(self.centroids, dtype=np.float64)
        if self.centroids.ndim != 2 or self.centroids.shape[0] < 2:
            raise ValueError(f"a codebook needs a k x d centroid matrix with k >= 2, got {self.centroids.shape}")
        if self.centroids.shape[1] != descriptor_dim(self.segment_length):
            raise ValueError(
                f"centroid width {self.centroids.shape[1]} does not match segment length "
                f"{self.segment_length} (expected {descriptor_dim(self.segment_length)})"
            )
        if not np.all(np.isfinite(self.centroids)):
            raise ValueError("codebook centroids must be finite")
        if np.unique(self.centroids, axis=0).shape[0] != self.centroids.shape[0]:
            raise ValueError("codebook centroids must be pairwise distinct")

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    @property
    def dim(self) -> int:
        return self.centroids.shape[1]

    def assign(self, features: np.ndarray) -> np.ndarray:
        return nearest_centroid(np.asarray(features, dtype=np.float64).reshape(-1, self.dim), self.centroids)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "segment_length": self.segment_length,
            "seed": self.seed,
            "centroids": self.centroids.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Codebook":
        try:
            codebook = cls(
                centroids=np.asarray(doc["centroids"], dtype=np.float64),
                segment_length=int(doc["segment_length"]),
                seed=int(doc["seed"]),
            )
            declared = int(doc["k"])
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"malformed codebook: {e}") from e
        if codebook.k != declared:
            raise ParseError(f"codebook declares k={doc['k']} but holds {codebook.k} centroids")
        return codebook

    def to_document(self) -> dict:
        return {"format_version": CODEBOOK_FORMAT_VERSION, "codebook": self.to_dict()}

    @classmethod
    def from_document(cls, doc: dict) -> "Codebook":
        if not isinstance(doc, dict) or "codebook" not in doc:
            raise ParseError("not a codebook document")
        if doc.get("format_version") != CODEBOOK_FORMAT_VERSION:
            raise UnsupportedVersion(f"unsupported codebook format_version {doc.get('format_version')!r}")
        return cls.from_dict(doc["codebook"])


def kmeans_plusplus(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]), dtype=np.float64)
    centroids[0] = points[rng.integers(0, n)]
    d2 = squared_distances(points, centroids[:1])[:, 0]
    for i in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            raise InsufficientData(f"only {i} distinct points available for {k} centroids")
        next_idx = rng.choice(n, p=d2 / total)
        centroids[i] = points[next_idx]
        d2 = np.minimum(d2, squared_distances(points, centroids[i : i + 1])[:, 0])
    return centroids


def _replace_duplicates(points: np.ndarray, centroids: np.ndarray, closest: np.ndarray) -> np.ndarray:
    _, first = np.unique(centroids, axis=0, return_index=True)
    duplicates = sorted(set(range(centroids.shape[0])) - set(first.tolist()))
    for j in duplicates:
        far = int(np.argmax(closest))
        centroids[j] = points[far]
        # the new centroid now covers its neighbourhood too
        closest = np.minimum(closest, squared_distances(points, centroids[j : j + 1])[:, 0])
    return centroids


def kmeans(
    points: np.ndarray,
    k: int,
    rng: np.random.Generator,
    max_iter: int = MAX_ITER,
    tol: float = TOLERANCE,
):
    """
    Lloyd iterations from a k-means++ start.

    Stops when the largest centroid displacement drops below ``tol``. An emptied
    cluster is re-seeded with the point farthest from its current centroid.

    Returns:
        (centroids, objective_history) where the history holds the within-cluster sum of
        squares after every assignment step.
    """
    centroids = kmeans_plusplus(points, k, rng)
    history = []
    for iteration in range(max_iter):
        d2 = squared_distances(points, centroids)
        labels = np.argmin(d2, axis=1)
        closest = d2[np.arange(points.shape[0]), labels]
        objective = float(closest.sum())
        if history:
            assert objective <= history[-1] * (1 + 1e-9) + 1e-12, (
                f"k-means objective increased: {history[-1]} -> {objective}"
            )
        history.append(objective)

        counts = np.bincount(labels, minlength=k)
        sums = np.zeros_like(centroids)
        np.add.at(sums, labels, points)
        updated = centroids.copy()
        filled = counts > 0
        updated[filled] = sums[filled] / counts[filled, None]
        for j in np.flatnonzero(~filled):
            far = int(np.argmax(closest))
            updated[j] = points[far]
            closest = np.minimum(closest, squared_distances(points, updated[j : j + 1])[:, 0])

        shift = float(np.max(np.linalg.norm(updated - centroids, axis=1)))
        centroids = updated
        if shift < tol:
            logger.debug(f"k-means converged after {iteration + 1} iterations")
            break

    d2 = squared_distances(points, centroids)
    closest = d2.min(axis=1)
    return _replace_duplicates(points, centroids, closest), history


def build_codebook(
    corpus: Union[np.ndarray, Sequence[LocalFeature]],
    k: int = 250,
    sample_fraction: float = 0.2,
    seed: int = 0,
    segment_length: int = 6,
    max_iter: int = MAX_ITER,
    tol: float = TOLERANCE,
) -> Codebook:
    """
    Cluster a uniform sample of local features into ``k`` codewords.

    ``ceil(sample_fraction * n)`` features are drawn without replacement; when the sample
    holds fewer than ``k`` distinct vectors the whole corpus is clustered instead.

    Raises:
        InsufficientData: fewer than ``k`` distinct feature vectors exist.
    """
    if len(corpus) and isinstance(corpus[0], LocalFeature):
        points = np.stack([feature.vector for feature in corpus]).astype(np.float64)
    else:
        points = np.asarray(corpus, dtype=np.float64).reshape(-1, descriptor_dim(segment_length))

    n = points.shape[0]
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    rng = derive_rng(seed, 0)

    sample = points
    if n:
        size = min(n, max(1, math.ceil(sample_fraction * n)))
        sample = points[np.sort(rng.choice(n, size=size, replace=False))]
        if np.unique(sample, axis=0).shape[0] < k:
            sample = points
    distinct = np.unique(sample, axis=0).shape[0] if n else 0
    if distinct < k:
        raise InsufficientData(f"{distinct} distinct local features available, codebook needs {k}")

    logger.info(f"Clustering {sample.shape[0]} of {n} local features into {k} codewords")
    centroids, history = kmeans(sample, k, rng, max_iter=max_iter, tol=tol)
    return Codebook(centroids=centroids, segment_length=segment_length, seed=seed, objective_history=history)
