"""Inflate Flate-compressed PDF stream payloads in place."""

import logging
import re
import zlib
from typing import List, Optional, Tuple

logger = logging.getLogger(__name__)

# ``stream`` keyword (not the tail of ``endstream``) followed by at most one EOL.
STREAM_RE = re.compile(rb"(?<![A-Za-z])stream(\r\n|\n|\r)?")
ENDSTREAM = b"endstream"

MAX_INFLATED_STREAM = 64 * 1024 * 1024


def inflate_payload(payload: bytes, limit: int = MAX_INFLATED_STREAM) -> Tuple[Optional[bytes], bool]:
    """Return (inflated, truncated). ``inflated`` is None unless payload is a complete zlib stream."""
    decompressor = zlib.decompressobj()
    try:
        out = decompressor.decompress(payload, limit)
    except zlib.error:
        return None, False
    if decompressor.unconsumed_tail:
        return out, True
    if decompressor.eof:
        return out, False
    return None, False


def inflate_streams(data: bytes, limit: int = MAX_INFLATED_STREAM) -> Tuple[bytes, List[str]]:
    """
    Replace every ``stream``...``endstream`` payload by its inflated content.

    The payload starts after the single EOL following ``stream`` and ends at the last
    byte before ``endstream``. Payloads that do not inflate are kept verbatim; the
    surrounding PDF syntax is never touched.
    """
    diagnostics = []
    parts = []
    cursor = 0
    pos = 0
    while True:
        match = STREAM_RE.search(data, pos)
        if match is None:
            break
        start = match.end()
        end = data.find(ENDSTREAM, start)
        if end < 0:
            diagnostics.append(f"offset {match.start()}: stream without endstream")
            break

        payload = data[start:end]
        inflated, truncated = inflate_payload(payload, limit)
        if inflated is not None:
            parts.append(data[cursor:start])
            parts.append(inflated)
            cursor = end
            if truncated:
                diagnostics.append(f"offset {start}: inflated stream truncated at {limit} bytes")
        pos = end + len(ENDSTREAM)

    parts.append(data[cursor:])
    for message in diagnostics:
        logger.debug(message)
    return b"".join(parts), diagnostics
