"""PGM (P2/P5) image files and CSV sweep tables.

Images are real-valued in memory; quantization to integers only happens
when writing a file.
"""

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np


class PGMError(ValueError):
    """Base class for PGM parse errors; ``offset`` is the byte position of the problem."""

    def __init__(self, message, offset):
        self.offset = offset
        super().__init__(f"{message} (byte offset {offset})")


class UnsupportedFormatError(PGMError):
    pass


class MalformedHeaderError(PGMError):
    pass


class TruncatedDataError(PGMError):
    pass


class OutOfRangeError(ValueError):
    pass


@dataclass
class SweepRecord:
    lam: float
    mse: Optional[float] = None
    sure: Optional[float] = None


_WHITESPACE = b" \t\r\n\x0b\x0c"


def _header_tokens(data, count, start):
    """Read ``count`` whitespace-separated header tokens, skipping ``#`` comments."""
    tokens = []
    pos = start
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos] in _WHITESPACE:
            pos += 1
        if pos < n and data[pos] == ord("#"):
            while pos < n and data[pos] not in b"\r\n":
                pos += 1
            continue
        if pos >= n:
            raise MalformedHeaderError("header ended early", pos)
        begin = pos
        while pos < n and data[pos] not in _WHITESPACE and data[pos] != ord("#"):
            pos += 1
        tok = data[begin:pos]
        if not tok.isdigit():
            raise MalformedHeaderError(f"expected a decimal integer, got {tok[:16]!r}", begin)
        tokens.append((int(tok), begin))
    return tokens, pos


def parse_pgm(data: bytes):
    """Parse PGM bytes into ``(raw integer array, maxval)``."""
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise UnsupportedFormatError(f"unsupported magic {magic!r}; expected P2 or P5", 0)
    if len(data) > 2 and data[2] not in _WHITESPACE and data[2] != ord("#"):
        raise MalformedHeaderError("magic number must be followed by whitespace", 2)
    tokens, pos = _header_tokens(data, 3, 2)
    (width, w_at), (height, h_at), (maxval, m_at) = tokens
    if width < 1:
        raise MalformedHeaderError("width must be positive", w_at)
    if height < 1:
        raise MalformedHeaderError("height must be positive", h_at)
    if not 0 < maxval < 65536:
        raise MalformedHeaderError(f"maxval {maxval} outside 1..65535", m_at)
    count = width * height

    if magic == b"P5":
        if pos >= len(data) or data[pos] not in _WHITESPACE:
            raise MalformedHeaderError("missing whitespace after maxval", pos)
        pos += 1
        depth = 1 if maxval < 256 else 2
        need = count * depth
        if len(data) - pos < need:
            raise TruncatedDataError(f"expected {need} raster bytes, found {len(data) - pos}", len(data))
        dtype = np.uint8 if depth == 1 else np.dtype(">u2")
        raw = np.frombuffer(data, dtype=dtype, count=count, offset=pos).astype(np.int64)
    else:
        values, _ = _ascii_values(data, pos, count)
        raw = np.array(values, dtype=np.int64)

    bad = np.flatnonzero(raw > maxval)
    if bad.size:
        raise MalformedHeaderError(f"sample {raw[bad[0]]} exceeds maxval {maxval}", m_at)
    return raw.reshape(height, width), maxval


def _ascii_values(data, pos, count):
    values = []
    n = len(data)
    while len(values) < count:
        while pos < n and data[pos] in _WHITESPACE:
            pos += 1
        if pos < n and data[pos] == ord("#"):
            while pos < n and data[pos] not in b"\r\n":
                pos += 1
            continue
        if pos >= n:
            raise TruncatedDataError(f"expected {count} samples, found {len(values)}", pos)
        begin = pos
        while pos < n and data[pos] not in _WHITESPACE:
            pos += 1
        tok = data[begin:pos]
        if not tok.isdigit():
            raise MalformedHeaderError(f"bad sample {tok[:16]!r}", begin)
        values.append(int(tok))
    return values, pos


def read_pgm_raw(path):
    """Integer samples and maxval of a PGM file, without any scaling."""
    return parse_pgm(Path(path).read_bytes())


def read_pgm(path):
    """Read a P2/P5 PGM as float64 on the 0..255 scale.

    Files with ``maxval <= 255`` keep their integer values; deeper files
    are scaled by ``255 / maxval``.
    """
    raw, maxval = read_pgm_raw(path)
    img = raw.astype(np.float64)
    if maxval > 255:
        img *= 255.0 / maxval
    return img


def atomic_write(path, payload, mode="wb"):
    """Write ``payload`` to a temporary sibling file, then rename it over ``path``."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, **({} if "b" in mode else {"encoding": "utf-8", "newline": ""})) as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_pgm_raw(raw, path, maxval=255):
    """Write integer samples as binary P5 (two bytes per sample when ``maxval > 255``)."""
    raw = np.asarray(raw)
    if raw.ndim != 2:
        raise ValueError("raster must be 2-D")
    if raw.size and (raw.min() < 0 or raw.max() > maxval):
        raise OutOfRangeError(f"samples outside 0..{maxval}")
    dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
    header = f"P5\n{raw.shape[1]} {raw.shape[0]}\n{maxval}\n".encode("ascii")
    atomic_write(path, header + raw.astype(dtype).tobytes())


def write_pgm(img, path, clamp=True):
    """Round to the nearest integer and write an 8-bit P5 file.

    With ``clamp=False`` any rounded value outside 0..255 raises
    :class:`OutOfRangeError` instead of being clipped.
    """
    img = np.asarray(img, dtype=np.float64)
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains non-finite values")
    q = np.rint(img)
    if clamp:
        q = np.clip(q, 0, 255)
    elif q.size and (q.min() < 0 or q.max() > 255):
        raise OutOfRangeError(f"values outside 0..255 (min {q.min():g}, max {q.max():g}); use clamp=True")
    write_pgm_raw(q.astype(np.int64), path, 255)


def _fmt(x):
    return "" if x is None else f"{x:.9g}"


def format_csv(records):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["lambda", "mse", "sure"])
    for r in sorted(records, key=lambda r: r.lam):
        writer.writerow([_fmt(r.lam), _fmt(r.mse), _fmt(r.sure)])
    return buf.getvalue()


def write_csv(records, path):
    """Write sweep records sorted by lambda with 9 significant digits."""
    atomic_write(path, format_csv(records), mode="w")


def read_csv(path):
    def num(s):
        return float(s) if s != "" else None

    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return [SweepRecord(float(r["lambda"]), num(r["mse"]), num(r["sure"])) for r in rows]


# Real-valued images that must survive a file round trip (noisy inputs for
# SURE) are stored as 16-bit PGM with value = raw / scale - offset.
ENCODING_OFFSET = 1024.0
ENCODING_SCALE = 16.0


def sidecar_path(path):
    path = Path(path)
    return path.with_name(path.name + ".json")


def write_encoded_pgm(img, path, **meta):
    """Write ``img`` without 8-bit quantization, plus a JSON sidecar describing the encoding.

    Precision is ``1 / ENCODING_SCALE``; values must lie in
    ``[-ENCODING_OFFSET, 65535 / ENCODING_SCALE - ENCODING_OFFSET]``.
    """
    img = np.asarray(img, dtype=np.float64)
    raw = np.rint((img + ENCODING_OFFSET) * ENCODING_SCALE)
    if raw.size and (raw.min() < 0 or raw.max() > 65535):
        raise OutOfRangeError("values outside the 16-bit encodable range")
    side = sidecar_path(path)
    info = {"offset": ENCODING_OFFSET, "scale": ENCODING_SCALE, **meta}
    atomic_write(side, json.dumps(info, indent=2, sort_keys=True) + "\n", mode="w")
    try:
        write_pgm_raw(raw.astype(np.int64), path, 65535)
    except BaseException:
        side.unlink(missing_ok=True)
        raise


def load_image(path):
    """Read a PGM, undoing the 16-bit encoding when a sidecar is present."""
    side = sidecar_path(path)
    if not side.exists():
        return read_pgm(path)
    info = json.loads(side.read_text(encoding="utf-8"))
    raw, maxval = read_pgm_raw(path)
    if maxval != 65535:
        raise ValueError(f"{path}: sidecar present but maxval is {maxval}, expected 65535")
    return raw / float(info["scale"]) - float(info["offset"])
