"""Corpus ingestion: walk a directory, join labels from CSV, drop duplicate content."""

import csv
import hashlib
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from entroscan.errors import CorpusIOError, ParseError

logger = logging.getLogger(__name__)

BENIGN = "benign"
MALICIOUS = "malicious"
UNLABELED = "unlabeled"
LABELS = (BENIGN, MALICIOUS)
LABELS_FILENAME = "labels.csv"


def content_id(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


@dataclass(frozen=True)
class CorpusEntry:
    path: Path
    file_id: str
    label: str = UNLABELED

    @property
    def is_labeled(self) -> bool:
        return self.label in LABELS


@dataclass
class LabeledCorpus:
    entries: List[CorpusEntry] = field(default_factory=list)
    root: Optional[Path] = None

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def labeled(self) -> "LabeledCorpus":
        return LabeledCorpus([entry for entry in self.entries if entry.is_labeled], self.root)

    def counts(self) -> Dict[str, int]:
        result = {BENIGN: 0, MALICIOUS: 0, UNLABELED: 0}
        for entry in self.entries:
            result[entry.label] += 1
        return result


def read_labels(csv_path) -> Dict[str, str]:
    """
    Read a ``path,label`` CSV (header required) into {relative posix path: label}.

    Raises:
        ParseError: missing header, wrong column count or a label outside benign/malicious,
            with the offending line number.
    """
    labels = {}
    try:
        with open(csv_path, newline="", encoding="utf-8") as fin:
            reader = csv.reader(fin)
            header = next(reader, None)
            if header is None or [h.strip().lower() for h in header[:2]] != ["path", "label"]:
                raise ParseError(f"{csv_path}:1: expected header 'path,label', got {header!r}")
            for row in reader:
                lineno = reader.line_num
                if not row or not any(cell.strip() for cell in row):
                    continue
                if len(row) != 2:
                    raise ParseError(f"{csv_path}:{lineno}: expected 2 columns, got {len(row)}")
                rel_path, label = row[0].strip(), row[1].strip().lower()
                if label not in LABELS:
                    raise ParseError(f"{csv_path}:{lineno}: label must be benign or malicious, got {row[1]!r}")
                labels[Path(rel_path).as_posix()] = label
    except OSError as e:
        raise CorpusIOError(f"cannot read label file {csv_path}: {e}") from e
    return labels


def walk_files(root: Path) -> List[Path]:
    files = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames.sort()
        for name in sorted(filenames):
            files.append(Path(dirpath) / name)
    return files


def _is_label_table(data: bytes) -> bool:
    first_line = data.split(b"\n", 1)[0].lstrip(b"\xef\xbb\xbf").strip().lower()
    return first_line.replace(b" ", b"").startswith(b"path,label")


def ingest(root, labels_csv=None) -> LabeledCorpus:
    """
    Recursively collect the files under ``root``.

    Labels are joined by path relative to ``root``; files without a CSV row stay
    unlabeled. Files whose content hash was already seen are dropped with a warning.
    A ``labels.csv`` at the root starting with the ``path,label`` header is never a document,
    with or without ``labels_csv``.

    Raises:
        CorpusIOError: ``root`` is not a readable directory.
        ParseError: the label CSV is malformed.
    """
    root = Path(root)
    if not root.is_dir() or not os.access(root, os.R_OK | os.X_OK):
        raise CorpusIOError(f"corpus root is not a readable directory: {root}")
    labels = read_labels(labels_csv) if labels_csv is not None else {}

    entries = []
    seen = {}
    for path in walk_files(root):
        rel_path = path.relative_to(root).as_posix()
        if labels_csv is not None and Path(labels_csv).resolve() == path.resolve():
            continue
        try:
            data = path.read_bytes()
        except OSError as e:
            logger.warning(f"Skipping unreadable file {rel_path}: {e}")
            continue
        if rel_path == LABELS_FILENAME and _is_label_table(data):
            logger.debug(f"Skipping label table {rel_path}")
            continue
        file_id = content_id(data)
        if file_id in seen:
            logger.warning(f"Duplicate content: {rel_path} matches {seen[file_id]}, dropped")
            continue
        seen[file_id] = rel_path
        entries.append(CorpusEntry(path=path, file_id=file_id, label=labels.get(rel_path, UNLABELED)))

    corpus = LabeledCorpus(entries, root)
    logger.info(f"Ingested {len(corpus)} files from {root}: {corpus.counts()}")
    return corpus
