from entroscan.preprocess.canonical import CanonicalStream, canonicalize
from entroscan.preprocess.magic import FileKind, detect_kind

__all__ = ["CanonicalStream", "FileKind", "canonicalize", "detect_kind"]
