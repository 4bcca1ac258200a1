"""Netpbm (PBM/PGM) and JSON persistence.

PGM stores images quantized to 8 bits by ``round(255 * v / vmax)`` where
``vmax`` is the image maximum (or 1 for an all-zero image).  The scale is
written as a ``# vmax=<float>`` header comment so ``read_pgm`` can undo it;
for exact values, ``write_image`` also writes a ``<path>.json`` sidecar with
the full-precision pixels, which ``read_image`` prefers when present.

PBM follows the Netpbm convention: ``1`` is black.  Bit matrices in this
package use ``1`` for white/light, so the bits are inverted on disk and a
QR symbol looks right in any image viewer.
"""

from __future__ import annotations

import json
import os
import re

import numpy as np

from .imaging import MeasurementSeries, as_bits, as_image


def _tokens(data: bytes, count: int, pos: int = 0):
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    out, comments = [], []
    n = len(data)
    while len(out) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos >= n:
            raise ValueError("truncated netpbm header")
        if data[pos:pos + 1] == b"#":
            end = data.find(b"\n", pos)
            end = n if end < 0 else end
            comments.append(data[pos + 1:end].decode("ascii", "replace").strip())
            pos = end
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        out.append(data[start:pos])
    return out, comments, pos


def write_pbm(path, bits, binary: bool = True) -> None:
    bits = as_bits(bits)
    ink = (1 - bits).astype(np.uint8)
    h, w = ink.shape
    with open(path, "wb") as f:
        if binary:
            f.write(b"P4\n%d %d\n" % (w, h))
            f.write(np.packbits(ink, axis=1).tobytes())
        else:
            f.write(b"P1\n%d %d\n" % (w, h))
            for row in ink:
                f.write(" ".join(str(int(v)) for v in row).encode() + b"\n")


def read_pbm(path) -> np.ndarray:
    with open(path, "rb") as f:
        data = f.read()
    (magic, w, h), _, pos = _tokens(data, 3)
    w, h = int(w), int(h)
    if magic == b"P4":
        pos += 1
        row_bytes = (w + 7) // 8
        raw = np.frombuffer(data[pos:pos + row_bytes * h], dtype=np.uint8)
        if raw.size != row_bytes * h:
            raise ValueError("truncated P4 raster")
        ink = np.unpackbits(raw.reshape(h, row_bytes), axis=1)[:, :w]
    elif magic == b"P1":
        # P1 digits may be packed without whitespace
        body = re.sub(rb"#[^\n]*", b"", data[pos:])
        digits = [c - 48 for c in body if c in (48, 49)]
        if len(digits) < w * h:
            raise ValueError("truncated P1 raster")
        ink = np.array(digits[:w * h], dtype=np.uint8).reshape(h, w)
    else:
        raise ValueError(f"not a PBM file: magic {magic!r}")
    return (1 - ink).astype(np.uint8)


def quantize(img) -> tuple[np.ndarray, float]:
    img = as_image(img)
    vmax = float(img.max()) or 1.0
    return np.rint(255.0 * img / vmax).astype(np.uint8), vmax


def write_pgm(path, img, binary: bool = True) -> None:
    q, vmax = quantize(img)
    h, w = q.shape
    header = b"%s\n# vmax=%s\n%d %d\n255\n" % (b"P5" if binary else b"P2", repr(vmax).encode(), w, h)
    with open(path, "wb") as f:
        f.write(header)
        if binary:
            f.write(q.tobytes())
        else:
            for row in q:
                f.write(" ".join(str(int(v)) for v in row).encode() + b"\n")


def read_pgm(path) -> np.ndarray:
    """Read a P2/P5 file and undo the linear quantization (``vmax`` comment, else 1)."""
    with open(path, "rb") as f:
        data = f.read()
    (magic, w, h, maxval), comments, pos = _tokens(data, 4)
    w, h, maxval = int(w), int(h), int(maxval)
    if magic == b"P5":
        pos += 1
        dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
        raw = np.frombuffer(data[pos:], dtype=dtype, count=w * h)
        q = raw.reshape(h, w).astype(np.float64)
    elif magic == b"P2":
        body = re.sub(rb"#[^\n]*", b"", data[pos:]).split()
        if len(body) < w * h:
            raise ValueError("truncated P2 raster")
        q = np.array([int(t) for t in body[:w * h]], dtype=np.float64).reshape(h, w)
    else:
        raise ValueError(f"not a PGM file: magic {magic!r}")
    vmax = 1.0
    for c in comments:
        if c.startswith("vmax="):
            vmax = float(c[5:])
    return q * (vmax / maxval)


def sidecar_path(path) -> str:
    return os.fspath(path) + ".json"


def write_image(path, img) -> None:
    """PGM for display plus a full-precision JSON sidecar."""
    img = as_image(img)
    write_pgm(path, img)
    with open(sidecar_path(path), "w") as f:
        json.dump({"width": img.shape[1], "height": img.shape[0],
                   "pixels": [float(v) for v in img.ravel()]}, f)


def read_image(path) -> np.ndarray:
    """Load an image from PGM (sidecar preferred), PBM (bit value as intensity) or JSON."""
    path = os.fspath(path)
    if path.endswith(".json"):
        return _image_from_sidecar(path)
    if os.path.exists(sidecar_path(path)):
        return _image_from_sidecar(sidecar_path(path))
    with open(path, "rb") as f:
        magic = f.read(2)
    if magic in (b"P1", b"P4"):
        return read_pbm(path).astype(np.float64)
    return read_pgm(path)


def _image_from_sidecar(path) -> np.ndarray:
    with open(path) as f:
        d = json.load(f)
    return as_image(np.asarray(d["pixels"], dtype=np.float64).reshape(d["height"], d["width"]))


def write_series(path, series: MeasurementSeries) -> None:
    with open(path, "w") as f:
        json.dump(series.to_dict(), f, indent=1)
        f.write("\n")


def read_series(path) -> MeasurementSeries:
    with open(path) as f:
        return MeasurementSeries.from_dict(json.load(f))
