import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from joblib import Parallel, delayed

from entroscan.classifier.model import TrainedModel, Verdict, load
from entroscan.errors import EmptyInput
from entroscan.preprocess.canonical import canonicalize
from entroscan.signal.entropy import compute_ets
from entroscan.tools.featurizer.featurizer import feature_families
from entroscan.utils.corpus import content_id
from entroscan.utils.output import clean_result

logger = logging.getLogger(__name__)


class DocumentScanner:
    def __init__(
        self,
        model: Union[str, Path, TrainedModel],
        threshold: Optional[float] = None,
    ):
        """
        Initialize the DocumentScanner with a trained detector.

        Args:
            model: Path to a model file written by ``entroscan train``, or a loaded TrainedModel.
            threshold: Verdict threshold; None keeps the threshold stored in the model.
        """
        self.model = None
        self.featurizer = None
        self.threshold = threshold
        self.load_model(model)

    def load_model(self, model: Union[str, Path, TrainedModel]):
        """
        Load the model and rebuild the feature families it was trained with.

        Raises:
            ValueError: the model's families produce vectors of another width than the forest expects.
        """
        self.model = model if isinstance(model, TrainedModel) else load(model)
        self.featurizer = feature_families(
            self.model.families, codebook=self.model.codebook, spectrum_levels=self.model.spectrum_levels
        )
        if self.featurizer.dim != self.model.feature_dim:
            raise ValueError(
                f"model families {self.model.families} give {self.featurizer.dim} features, "
                f"forest expects {self.model.feature_dim}"
            )
        if self.threshold is None:
            self.threshold = self.model.threshold

    def process_document(self, data: bytes) -> Dict[str, Any]:
        """
        Score one document held in memory.

        Returns:
            Record with ``file_id``, ``kind``, ``score`` and ``label``.

        Raises:
            EmptyInput: the canonical stream is shorter than one entropy window.
        """
        stream = canonicalize(data)
        ets = compute_ets(stream.bytes, self.model.window_size)
        score = float(self.model.scores(self.featurizer(ets)[None, :])[0])
        verdict = Verdict.from_score(score, self.threshold)
        return {
            "file_id": content_id(data),
            "kind": stream.source_kind.value,
            "score": verdict.score,
            "label": verdict.label,
        }

    def scan_path(self, path: Union[str, Path]) -> Dict[str, Any]:
        """Scan one file; read failures and too-short files become error records."""
        path = str(path)
        try:
            data = Path(path).read_bytes()
        except OSError as e:
            return {"path": path, "error": type(e).__name__, "message": str(e)}
        try:
            record = self.process_document(data)
        except EmptyInput as e:
            return {"file_id": content_id(data), "path": path, "error": type(e).__name__, "message": str(e)}
        return {"file_id": record["file_id"], "path": path, **{k: v for k, v in record.items() if k != "file_id"}}

    def __call__(
        self,
        paths: Union[str, Path, Sequence[Union[str, Path]]],
        n_jobs: int = 1,
        **kwargs,
    ) -> List[Dict[str, Any]]:
        """
        Scan files and return one record per path, in input order.

        Examples:
            >>> scanner = DocumentScanner("model.json")
            >>> scanner("invoice.docx")
            [{'file_id': '...', 'path': 'invoice.docx', 'kind': 'ooxml', 'score': 0.012, 'label': 'benign'}]

            >>> records = scanner(["a.pdf", "b.doc"], n_jobs=4)
        """
        if isinstance(paths, (str, Path)):
            paths = [paths]
        records = Parallel(n_jobs=n_jobs)(delayed(self.scan_path)(path) for path in paths)
        for record in records:
            if "error" in record:
                logger.warning(f"{record['path']}: {record['error']}: {record['message']}")
        return self._clean_result(records)

    def _clean_result(self, result: Any) -> Any:
        return clean_result(result)
