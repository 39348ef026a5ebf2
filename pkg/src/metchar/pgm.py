"""Minimal 8-bit Netpbm graymap (PGM) reader and writer.

Both the plain (P2) and raw (P5) encodings are supported for maxval <= 255.
"""

import re

import numpy as np

_WS = b" \t\n\r\v\f"


class PGMError(ValueError):
    pass


def _tokens(data, pos, count):
    """Read `count` whitespace-separated header tokens starting at `pos`.

    Comments run from '#' to end of line. Returns (tokens, position just
    after the single whitespace byte terminating the last token).
    """
    out = []
    n = len(data)
    while len(out) < count:
        while pos < n and (data[pos] in _WS or data[pos] == ord("#")):
            if data[pos] == ord("#"):
                while pos < n and data[pos] not in b"\r\n":
                    pos += 1
            else:
                pos += 1
        start = pos
        while pos < n and data[pos] not in _WS and data[pos] != ord("#"):
            pos += 1
        if start == pos:
            raise PGMError("truncated header")
        out.append(data[start:pos])
    return out, pos


def read_pgm(path):
    """Parse a PGM file and return ``(width, height, pixels)``.

    ``pixels`` is a ``(height, width)`` uint8 array. Values are rescaled to
    0..255 when maxval is smaller than 255.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 2 or data[:1] != b"P" or data[1:2] not in (b"2", b"5"):
        raise PGMError("not a P2/P5 graymap")
    magic = data[:2]
    (w, h, maxval), pos = _tokens(data, 2, 3)
    try:
        width, height, maxval = int(w), int(h), int(maxval)
    except ValueError as exc:
        raise PGMError(f"bad header field: {exc}") from None
    if width < 1 or height < 1:
        raise PGMError("width and height must be positive")
    if not 0 < maxval <= 255:
        raise PGMError(f"unsupported maxval {maxval}")
    npix = width * height
    if magic == b"P5":
        raster = data[pos + 1 : pos + 1 + npix]
        if len(raster) != npix:
            raise PGMError("truncated raster")
        arr = np.frombuffer(raster, dtype=np.uint8).astype(np.int64)
    else:
        body = re.sub(rb"#[^\r\n]*", b"", data[pos:])
        vals = body.split()
        if len(vals) < npix:
            raise PGMError("truncated raster")
        arr = np.array([int(v) for v in vals[:npix]], dtype=np.int64)
    if arr.max(initial=0) > maxval:
        raise PGMError("sample exceeds maxval")
    if maxval != 255:
        arr = (arr * 255 + maxval // 2) // maxval
    return width, height, arr.astype(np.uint8).reshape(height, width)


def write_pgm(path, pixels, plain=False):
    """Write a 2-D uint8 array as a P5 (or P2 when ``plain``) graymap."""
    pixels = np.asarray(pixels, dtype=np.uint8)
    height, width = pixels.shape
    if plain:
        rows = "\n".join(" ".join(str(int(v)) for v in row) for row in pixels)
        payload = f"P2\n{width} {height}\n255\n{rows}\n".encode("ascii")
    else:
        payload = f"P5\n{width} {height}\n255\n".encode("ascii") + pixels.tobytes()
    with open(path, "wb") as fh:
        fh.write(payload)
