"""Flatten a ZIP container (OOXML documents) into one canonical byte stream."""

import io
import logging
import struct
import zipfile
from typing import List, Tuple

logger = logging.getLogger(__name__)

# Local file header layout, as in cpython's zipfile (structFileHeader).
STRUCT_FILE_HEADER = "<4s2B4HL2L2H"
SIZE_FILE_HEADER = struct.calcsize(STRUCT_FILE_HEADER)
FH_FILENAME_LENGTH = 10
FH_EXTRA_FIELD_LENGTH = 11

FLAG_ENCRYPTED = 0x1
FLAG_UTF8 = 0x800

# Upper bound on inflated bytes kept per entry; the remainder of a larger entry is dropped.
MAX_INFLATED_ENTRY = 64 * 1024 * 1024


def entry_name_bytes(info: zipfile.ZipInfo) -> bytes:
    """Recover the raw name bytes stored in the central directory."""
    encoding = "utf-8" if info.flag_bits & FLAG_UTF8 else "cp437"
    try:
        return info.orig_filename.encode(encoding)
    except UnicodeEncodeError:
        return info.orig_filename.encode("utf-8", errors="surrogateescape")


def raw_entry_payload(data: bytes, info: zipfile.ZipInfo) -> bytes:
    """Return the still-compressed payload of an entry, clipped to the buffer."""
    start = info.header_offset
    header = data[start : start + SIZE_FILE_HEADER]
    if len(header) < SIZE_FILE_HEADER:
        return b""
    fields = struct.unpack(STRUCT_FILE_HEADER, header)
    payload_start = start + SIZE_FILE_HEADER + fields[FH_FILENAME_LENGTH] + fields[FH_EXTRA_FIELD_LENGTH]
    return data[payload_start : payload_start + info.compress_size]


def _inflate_entry(zf: zipfile.ZipFile, info: zipfile.ZipInfo, limit: int) -> Tuple[bytes, bool]:
    chunks = []
    remaining = limit
    with zf.open(info) as fin:
        while remaining > 0:
            chunk = fin.read(min(remaining, 1 << 20))
            if not chunk:
                return b"".join(chunks), False
            chunks.append(chunk)
            remaining -= len(chunk)
        truncated = bool(fin.read(1))
    return b"".join(chunks), truncated


def canonicalize_zip(data: bytes, limit: int = MAX_INFLATED_ENTRY) -> Tuple[bytes, List[str]]:
    """
    Concatenate, in central-directory order, each entry's name followed by its payload.

    Stored entries are copied verbatim and compressed entries are inflated one level
    deep. Entries that cannot be inflated (encrypted, unsupported method, corrupt data)
    contribute their raw payload and a diagnostic; that is not a container failure.

    Raises:
        zipfile.BadZipFile (or any parse error) when the container itself is unreadable.
    """
    diagnostics = []
    parts = []
    with zipfile.ZipFile(io.BytesIO(data)) as zf:
        for info in zf.infolist():
            parts.append(entry_name_bytes(info))
            if info.flag_bits & FLAG_ENCRYPTED:
                diagnostics.append(f"{info.filename}: encrypted entry copied raw")
                parts.append(raw_entry_payload(data, info))
                continue
            try:
                payload, truncated = _inflate_entry(zf, info, limit)
            except NotImplementedError as e:
                diagnostics.append(f"{info.filename}: unsupported compression ({e}), copied raw")
                payload = raw_entry_payload(data, info)
            except Exception as e:
                diagnostics.append(f"{info.filename}: {type(e).__name__}: {e}, copied raw")
                payload = raw_entry_payload(data, info)
            else:
                if truncated:
                    diagnostics.append(f"{info.filename}: inflated size above {limit} bytes, truncated")
            parts.append(payload)

    for message in diagnostics:
        logger.debug(message)
    return b"".join(parts), diagnostics
