import logging
from dataclasses import dataclass, field
from typing import Tuple

from entroscan.preprocess.magic import FileKind, detect_kind
from entroscan.preprocess.ooxml import canonicalize_zip
from entroscan.preprocess.pdf import inflate_streams

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CanonicalStream:
    """The byte stream fed to entropy computation, plus how it was obtained."""

    bytes: bytes
    source_kind: FileKind
    fallback_used: bool = False
    diagnostics: Tuple[str, ...] = field(default=())


def canonicalize(data: bytes) -> CanonicalStream:
    """
    Produce the canonical decompressed stream of a document.

    OOXML containers are flattened entry by entry, PDF streams are inflated in place,
    every other kind passes through unchanged. Never raises: a container that cannot
    be parsed yields the original bytes with ``fallback_used=True``.
    """
    data = bytes(data)
    kind = detect_kind(data)

    if kind == FileKind.OOXML:
        try:
            flat, diagnostics = canonicalize_zip(data)
        except Exception as e:
            logger.debug(f"ZIP container unreadable, using raw bytes: {type(e).__name__}: {e}")
            return CanonicalStream(data, kind, True, (f"container: {type(e).__name__}: {e}",))
        if not flat and data:
            return CanonicalStream(data, kind, True, (*diagnostics, "container: no entries"))
        return CanonicalStream(flat, kind, False, tuple(diagnostics))

    if kind == FileKind.PDF:
        try:
            flat, diagnostics = inflate_streams(data)
        except Exception as e:
            logger.debug(f"PDF stream scan failed, using raw bytes: {type(e).__name__}: {e}")
            return CanonicalStream(data, kind, True, (f"container: {type(e).__name__}: {e}",))
        return CanonicalStream(flat, kind, False, tuple(diagnostics))

    return CanonicalStream(data, kind, False)
