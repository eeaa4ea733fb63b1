from enum import Enum


class FileKind(str, Enum):
    PDF = "pdf"
    OOXML = "ooxml"
    OLE2 = "ole2"
    RTF = "rtf"
    RAW = "raw"


# Checked in this order; the first match wins.
MAGIC_RULES = (
    (FileKind.PDF, b"%PDF"),
    (FileKind.OOXML, b"PK\x03\x04"),
    (FileKind.OLE2, b"\xd0\xcf\x11\xe0\xa1\xb1\x1a\xe1"),
    (FileKind.RTF, b"{\\rtf"),
)


def detect_kind(data: bytes) -> FileKind:
    """Classify a document from its leading bytes. Never fails; RAW is the fallback."""
    for kind, magic in MAGIC_RULES:
        if data.startswith(magic):
            return kind
    return FileKind.RAW
