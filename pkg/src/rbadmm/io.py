"""Array and image file formats.

Matrix CSV
    First line ``rows,cols``; then ``rows`` lines of ``cols``
    comma-separated values (row-major).

Binary array
    Little-endian: 4-byte magic ``b"RBA1"``, u32 rows, u32 cols, then
    rows*cols f64 values in row-major order.

PGM
    Binary greyscale (P5) with maxval 255.
"""

from __future__ import annotations

import re
import struct

import numpy as np

MAGIC = b"RBA1"


class FormatError(ValueError):
    pass


def _as_matrix(a):
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise FormatError(f"expected 1-d or 2-d array, got shape {a.shape}")
    return a


def write_matrix_csv(path, a):
    a = _as_matrix(a)
    with open(path, "w") as fh:
        fh.write(f"{a.shape[0]},{a.shape[1]}\n")
        for row in a:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_matrix_csv(path):
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise FormatError(f"{path}: empty file")
    try:
        rows, cols = (int(v) for v in lines[0].split(","))
    except ValueError:
        raise FormatError(f"{path}:1: header must be 'rows,cols'") from None
    if len(lines) - 1 != rows:
        raise FormatError(f"{path}: header declares {rows} rows, found {len(lines) - 1}")
    out = np.empty((rows, cols))
    for i, ln in enumerate(lines[1:]):
        vals = ln.split(",")
        if len(vals) != cols:
            raise FormatError(f"{path}:{i + 2}: expected {cols} values, got {len(vals)}")
        try:
            out[i] = [float(v) for v in vals]
        except ValueError:
            raise FormatError(f"{path}:{i + 2}: non-numeric value") from None
    return out


def write_array(path, a):
    a = _as_matrix(a)
    with open(path, "wb") as fh:
        fh.write(MAGIC + struct.pack("<II", *a.shape))
        fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())


def read_array(path):
    with open(path, "rb") as fh:
        head = fh.read(12)
        if len(head) < 12 or head[:4] != MAGIC:
            raise FormatError(f"{path}: not a binary array file")
        rows, cols = struct.unpack("<II", head[4:])
        data = fh.read()
    if len(data) != 8 * rows * cols:
        raise FormatError(f"{path}: expected {8 * rows * cols} data bytes, got {len(data)}")
    return np.frombuffer(data, dtype="<f8").reshape(rows, cols).astype(float)


def read_matrix(path):
    """Read a matrix in either format, chosen by file content."""
    with open(path, "rb") as fh:
        is_bin = fh.read(4) == MAGIC
    return read_array(path) if is_bin else read_matrix_csv(path)


_PGM_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n)*(\S+)")


def read_pgm(path):
    """Read a P5 PGM file as a uint8 array."""
    with open(path, "rb") as fh:
        data = fh.read()
    pos = 0
    tokens = []
    for _ in range(4):
        m = _PGM_TOKEN.match(data, pos)
        if m is None:
            raise FormatError(f"{path}: truncated PGM header")
        tokens.append(m.group(1))
        pos = m.end()
    if tokens[0] != b"P5":
        raise FormatError(f"{path}: only binary P5 PGM is supported")
    width, height, maxval = (int(t) for t in tokens[1:])
    if maxval != 255:
        raise FormatError(f"{path}: maxval must be 255, got {maxval}")
    pos += 1  # single whitespace byte after maxval
    pix = data[pos:pos + width * height]
    if len(pix) != width * height:
        raise FormatError(f"{path}: truncated pixel data")
    return np.frombuffer(pix, dtype=np.uint8).reshape(height, width).copy()


def write_pgm(path, img):
    img = np.asarray(img)
    if img.dtype != np.uint8:
        img = np.clip(np.round(img), 0, 255).astype(np.uint8)
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (w, h))
        fh.write(img.tobytes())


def load_image(path):
    """Read a PGM image scaled to [0, 1]."""
    return read_pgm(path).astype(float) / 255.0
