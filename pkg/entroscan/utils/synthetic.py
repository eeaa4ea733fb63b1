"""Deterministic synthetic document corpus standing in for a private malware collection.

Benign files are concatenations of low and medium entropy blocks (markup-like text, sparse
tables, base64-like encodings, occasional media-like noise). Malicious files take a benign
base and inject, at a window-aligned offset, an encrypted-looking payload followed by a
NOP-sled style constant run.
"""

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple

import numpy as np
from tqdm.auto import tqdm

from entroscan.errors import CorpusIOError
from entroscan.utils.corpus import BENIGN, LABELS_FILENAME, MALICIOUS, CorpusEntry, LabeledCorpus, content_id
from entroscan.utils.seeding import derive_rng

logger = logging.getLogger(__name__)

WINDOW = 256
NOP = 0x90

VOCABULARY = [
    b"the", b"report", b"quarterly", b"revenue", b"table", b"figure", b"section", b"summary",
    b"invoice", b"customer", b"amount", b"total", b"date", b"meeting", b"agenda", b"project",
    b"status", b"review", b"draft", b"final", b"budget", b"office", b"document", b"page",
    b"paragraph", b"style", b"normal", b"heading", b"font", b"size", b"color", b"black",
]
BASE64_ALPHABET = np.frombuffer(b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/", dtype=np.uint8)

# (kind, probability) of benign building blocks
BLOCK_KINDS = (("text", 0.45), ("table", 0.30), ("encoded", 0.15), ("media", 0.10))


@dataclass(frozen=True)
class SyntheticSpec:
    n_benign: int
    n_malicious: int
    blob_size_range: Tuple[int, int] = (4096, 65536)
    base_size_range: Tuple[int, int] = (50 * 1024, 500 * 1024)
    sled_size_range: Tuple[int, int] = (1024, 4096)
    seed: int = 0

    def __post_init__(self):
        if self.n_benign < 0 or self.n_malicious < 0 or self.n_benign + self.n_malicious == 0:
            raise ValueError("sample counts must be non-negative and not both zero")
        for name in ("blob_size_range", "base_size_range", "sled_size_range"):
            lo, hi = getattr(self, name)
            if lo <= 0 or hi < lo:
                raise ValueError(f"{name} must be a positive (low, high) range, got {(lo, hi)}")
        if self.blob_size_range[0] < WINDOW or self.sled_size_range[0] < 2 * WINDOW:
            raise ValueError(
                f"blob needs >= {WINDOW} bytes and sled >= {2 * WINDOW} bytes to mark whole windows"
            )


def _text_block(rng, size):
    lines = []
    total = 0
    while total < size:
        words = b" ".join(VOCABULARY[i] for i in rng.integers(0, len(VOCABULARY), rng.integers(3, 12)))
        line = b"<w:p><w:t>" + words + b"</w:t></w:p>\n"
        lines.append(line)
        total += len(line)
    return b"".join(lines)[:size]


def _table_block(rng, size):
    cells = np.zeros(size, dtype=np.uint8)
    filled = rng.random(size) < 0.08
    cells[filled] = rng.integers(1, 17, np.count_nonzero(filled), dtype=np.uint8)
    return cells.tobytes()


def _encoded_block(rng, size):
    return BASE64_ALPHABET[rng.integers(0, BASE64_ALPHABET.shape[0], size)].tobytes()


def _media_block(rng, size):
    return rng.integers(0, 256, size, dtype=np.uint8).tobytes()


BLOCK_BUILDERS = {
    "text": _text_block,
    "table": _table_block,
    "encoded": _encoded_block,
    "media": _media_block,
}


def benign_document(rng: np.random.Generator, size: int) -> bytes:
    kinds = [kind for kind, _ in BLOCK_KINDS]
    weights = np.array([weight for _, weight in BLOCK_KINDS])
    blocks = []
    total = 0
    while total < size:
        kind = kinds[rng.choice(len(kinds), p=weights)]
        block_size = int(min(size - total, rng.integers(1024, 16 * 1024 + 1)))
        if kind == "media":
            block_size = min(block_size, 8 * 1024)
        blocks.append(BLOCK_BUILDERS[kind](rng, block_size))
        total += block_size
    return b"".join(blocks)


def encrypted_blob(rng: np.random.Generator, size: int) -> bytes:
    """Whole-window random permutations of the 256 byte values (8.0 bits per aligned window)."""
    n_windows = max(1, size // WINDOW)
    return b"".join(rng.permutation(WINDOW).astype(np.uint8).tobytes() for _ in range(n_windows))


def malicious_document(rng: np.random.Generator, spec: SyntheticSpec) -> bytes:
    base = benign_document(rng, int(rng.integers(spec.base_size_range[0], spec.base_size_range[1] + 1)))
    blob = encrypted_blob(rng, int(rng.integers(spec.blob_size_range[0], spec.blob_size_range[1] + 1)))
    sled = bytes([NOP]) * int(rng.integers(spec.sled_size_range[0], spec.sled_size_range[1] + 1))
    # window-aligned so the payload windows are not diluted by the surrounding base
    offset = int(rng.integers(0, len(base) // WINDOW + 1)) * WINDOW
    return base[:offset] + blob + sled + base[offset:]


def generate_synthetic(spec: SyntheticSpec, out_dir, progress: bool = True) -> LabeledCorpus:
    """
    Write ``spec.n_benign`` + ``spec.n_malicious`` documents and a ``labels.csv`` under ``out_dir``.

    Every file is derived from its own child seed, so a fixed ``spec.seed`` reproduces
    the corpus byte for byte.
    """
    out_dir = Path(out_dir)
    plan = [(BENIGN, i) for i in range(spec.n_benign)] + [(MALICIOUS, i) for i in range(spec.n_malicious)]
    entries = []
    try:
        for label in (BENIGN, MALICIOUS):
            (out_dir / label).mkdir(parents=True, exist_ok=True)
        for label, index in tqdm(plan, desc="Writing synthetic corpus", disable=not progress):
            if label == BENIGN:
                rng = derive_rng(spec.seed, 0, index)
                data = benign_document(rng, int(rng.integers(spec.base_size_range[0], spec.base_size_range[1] + 1)))
            else:
                data = malicious_document(derive_rng(spec.seed, 1, index), spec)
            path = out_dir / label / f"{label}_{index:05d}.bin"
            path.write_bytes(data)
            entries.append(CorpusEntry(path=path, file_id=content_id(data), label=label))

        with open(out_dir / LABELS_FILENAME, "w", newline="", encoding="utf-8") as fout:
            writer = csv.writer(fout, lineterminator="\n")
            writer.writerow(["path", "label"])
            for entry in entries:
                writer.writerow([entry.path.relative_to(out_dir).as_posix(), entry.label])
    except OSError as e:
        raise CorpusIOError(f"cannot write synthetic corpus to {out_dir}: {e}") from e

    logger.info(f"Wrote {spec.n_benign} benign and {spec.n_malicious} malicious files to {out_dir}")
    return LabeledCorpus(entries, out_dir)
