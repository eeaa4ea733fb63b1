import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from entroscan.config import FAMILY_ORDER, PipelineConfig
from entroscan.errors import EmptyInput, ParseError
from entroscan.preprocess.canonical import canonicalize
from entroscan.signal.entropy import EntropyTimeSeries, compute_ets
from entroscan.tools.featurizer.codebook import Codebook
from entroscan.tools.featurizer.families.bow import BagOfWords
from entroscan.tools.featurizer.families.energy import WaveletEnergy
from entroscan.tools.featurizer.families.global_stats import GlobalStats
from entroscan.utils.corpus import LABELS, content_id

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class FeatureVector:
    values: np.ndarray
    file_id: str
    label: Optional[str] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).ravel()

    def __len__(self):
        return self.values.shape[0]

    def to_record(self) -> dict:
        record = {"file_id": self.file_id}
        if self.label is not None:
            record["label"] = self.label
        record["features"] = self.values.tolist()
        return record

    @classmethod
    def from_record(cls, record: dict) -> "FeatureVector":
        label = record.get("label")
        if label is not None and label not in LABELS:
            raise ValueError(f"label must be one of {LABELS}, got {label!r}")
        return cls(values=np.asarray(record["features"], dtype=np.float64), file_id=str(record["file_id"]), label=label)


class FeatureList:
    def __init__(self):
        self.families = []

    def __add__(self, family):
        self.families += [family]
        return self

    def __str__(self):
        return "Families: " + " ".join([x.name for x in self.families])

    @property
    def names(self):
        return tuple(x.name for x in self.families)

    @property
    def dim(self) -> int:
        return sum(x.dim for x in self.families)

    def slices(self) -> Dict[str, slice]:
        """Column range of each family inside the concatenated vector."""
        result, start = {}, 0
        for family in self.families:
            result[family.name] = slice(start, start + family.dim)
            start += family.dim
        return result

    def __call__(self, ets: EntropyTimeSeries) -> np.ndarray:
        return np.concatenate([family(ets) for family in self.families])


def feature_families(families: Sequence[str] = FAMILY_ORDER, codebook: Optional[Codebook] = None, spectrum_levels=20):
    """Load the requested families into a FeatureList, always in [global | dwt | bow] order.

    Parameters:
    ----------
    families: list of str
        any of 'global', 'dwt', 'bow'
    codebook: Codebook
        required when 'bow' is requested

    Returns:
    --------

    A FeatureList object, that can be called on an EntropyTimeSeries
    """
    requested = [name.lower() for name in families]
    unknown = sorted(set(requested) - set(FAMILY_ORDER))
    if unknown:
        raise ValueError(f"unknown feature families: {unknown}")

    feature_cls = FeatureList()
    for name in FAMILY_ORDER:
        if name not in requested:
            continue
        if name == "global":
            feature_cls += GlobalStats()
        elif name == "dwt":
            feature_cls += WaveletEnergy(spectrum_levels)
        elif name == "bow":
            if codebook is None:
                raise ValueError("the bow family needs a codebook")
            feature_cls += BagOfWords(codebook)
    return feature_cls


def pipeline_featurizer(config: PipelineConfig, codebook: Optional[Codebook]) -> FeatureList:
    return feature_families(config.families, codebook=codebook, spectrum_levels=config.spectrum_levels)


def file_series(data: bytes, window_size: int = 256) -> EntropyTimeSeries:
    """Canonicalize a document and compute its entropy time series."""
    return compute_ets(canonicalize(data).bytes, window_size)


def extract(
    data: bytes,
    codebook: Optional[Codebook],
    config: PipelineConfig = PipelineConfig(),
    label: Optional[str] = None,
    featurizer: Optional[FeatureList] = None,
) -> FeatureVector:
    """
    Full pipeline for one file: canonicalize, entropy series, then every family.

    Raises:
        EmptyInput: the canonical stream is too short for one entropy window.
    """
    if featurizer is None:
        featurizer = pipeline_featurizer(config, codebook)
    ets = file_series(data, config.window_size)
    return FeatureVector(values=featurizer(ets), file_id=content_id(data), label=label)


def _extract_path(path, codebook, config, label):
    try:
        return extract(Path(path).read_bytes(), codebook, config, label=label)
    except (OSError, EmptyInput) as e:
        logger.warning(f"Skipping {path}: {type(e).__name__}: {e}")
        return None


def extract_paths(
    paths: Sequence,
    codebook: Optional[Codebook],
    config: PipelineConfig = PipelineConfig(),
    labels: Optional[Sequence[Optional[str]]] = None,
    n_jobs: int = 1,
) -> List[FeatureVector]:
    """Extract many files in parallel; unreadable or too-short files are skipped with a warning."""
    if labels is None:
        labels = [None] * len(paths)
    results = Parallel(n_jobs=n_jobs)(
        delayed(_extract_path)(path, codebook, config, label) for path, label in zip(paths, labels)
    )
    return [vector for vector in results if vector is not None]


def write_feature_records(vectors: Iterable[FeatureVector], fout, codebook: Optional[Codebook] = None) -> int:
    """
    One JSON line per vector. With ``codebook``, a first ``{"codebook": ...}`` line records
    the codebook the bag-of-words values were encoded with, so ``train`` can embed it.
    """
    if codebook is not None:
        fout.write(json.dumps({"codebook": codebook.to_document()}, separators=(",", ":")) + "\n")
    count = 0
    for vector in vectors:
        fout.write(json.dumps(vector.to_record(), separators=(",", ":")) + "\n")
        count += 1
    return count


def read_feature_file(path) -> Tuple[List[FeatureVector], Optional[Codebook]]:
    """
    Read a feature file written by ``write_feature_records``.

    Returns:
        (vectors, codebook) where codebook is None when the file has no codebook line.

    Raises:
        ParseError: a line is not a feature record, naming the line number.
    """
    vectors, codebook = [], None
    try:
        with open(path, encoding="utf-8") as fin:
            for lineno, line in enumerate(fin, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                    if isinstance(record, dict) and "codebook" in record and "features" not in record:
                        if codebook is not None or vectors:
                            raise ValueError("codebook line must come first")
                        codebook = Codebook.from_document(record["codebook"])
                        continue
                    vectors.append(FeatureVector.from_record(record))
                except (ValueError, KeyError, TypeError) as e:
                    raise ParseError(f"{path}:{lineno}: malformed feature record: {e}") from e
    except UnicodeDecodeError as e:
        raise ParseError(f"{path}: feature file is not UTF-8 text: {e}") from e
    return vectors, codebook


def read_feature_records(path) -> List[FeatureVector]:
    return read_feature_file(path)[0]
