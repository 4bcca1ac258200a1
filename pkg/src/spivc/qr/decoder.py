"""Decoder for module-aligned QR symbols (versions 1-4, byte mode)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..imaging import as_bits, as_image
from .rs import ReedSolomonError, rs_correct
from .symbol import (data_module_order, format_bits, format_positions, interleave_order,
                     mask_pattern, version_for_size)
from .tables import EC_LEVELS, layout


class QRDecodeError(ValueError):
    """Symbol could not be read."""


@dataclass
class DecodeResult:
    message: bytes
    corrected_errors: int
    version: int
    ec_level: str
    mask_id: int
    block_errors: list[int]

    @property
    def text(self) -> str:
        return self.message.decode("utf-8", errors="replace")


_FORMAT_TABLE = [(format_bits(ec, m), ec, m) for ec in EC_LEVELS for m in range(8)]


def read_format(dark: np.ndarray) -> tuple[str, int, int]:
    """(ec_level, mask_id, hamming distance) from the better of the two format copies."""
    best = None
    for copy in format_positions(dark.shape[0]):
        word = sum(int(dark[r, c]) << i for i, (r, c) in enumerate(copy))
        for bits, ec, m in _FORMAT_TABLE:
            dist = bin(word ^ bits).count("1")
            if best is None or dist < best[2]:
                best = (ec, m, dist)
    if best[2] > 3:
        raise QRDecodeError("unreadable format information")
    return best


def _parse_segments(data: list[int]) -> bytes:
    bits = "".join(f"{b:08b}" for b in data)
    pos, out = 0, bytearray()
    while pos + 4 <= len(bits):
        mode = bits[pos:pos + 4]
        pos += 4
        if mode == "0000":
            break
        if mode != "0100":
            raise QRDecodeError(f"unsupported or malformed segment mode {mode}")
        if pos + 8 > len(bits):
            raise QRDecodeError("truncated segment header")
        count = int(bits[pos:pos + 8], 2)
        pos += 8
        if pos + 8 * count > len(bits):
            raise QRDecodeError("segment length exceeds data capacity")
        for _ in range(count):
            out.append(int(bits[pos:pos + 8], 2))
            pos += 8
    return bytes(out)


def qr_decode(matrix) -> DecodeResult:
    """Decode a bit matrix (1 = light) with one entry per module."""
    bits = as_bits(matrix)
    if bits.shape[0] != bits.shape[1]:
        raise QRDecodeError(f"symbol must be square, got {bits.shape}")
    try:
        version = version_for_size(bits.shape[0])
    except ValueError as exc:
        raise QRDecodeError(str(exc)) from None
    dark = bits == 0
    ec_level, mask_id, _ = read_format(dark)
    lay = layout(version, ec_level)

    dark = dark ^ mask_pattern(version, mask_id)
    stream = [int(dark[r, c]) for r, c in data_module_order(version)][:8 * lay.total_codewords]
    codewords = [int("".join(map(str, stream[i:i + 8])), 2) for i in range(0, len(stream), 8)]

    blocks = [[0] * (n + lay.ec_per_block) for n in lay.data_lengths]
    for word, (b, i) in zip(codewords, interleave_order(lay)):
        blocks[b][i] = word

    data, block_errors = [], []
    for b, (block, n) in enumerate(zip(blocks, lay.data_lengths)):
        try:
            fixed, n_err = rs_correct(block, lay.ec_per_block)
        except ReedSolomonError as exc:
            raise QRDecodeError(f"block {b}: {exc}") from None
        data += fixed[:n]
        block_errors.append(n_err)
    message = _parse_segments(data)
    return DecodeResult(message, sum(block_errors), version, ec_level, mask_id, block_errors)


def otsu_threshold(values) -> float | None:
    """Otsu's threshold over the distinct values; None if the histogram is single-mode."""
    v = np.sort(np.asarray(values, dtype=np.float64).ravel())
    levels, counts = np.unique(v, return_counts=True)
    if len(levels) < 2:
        return None
    w0 = np.cumsum(counts)[:-1].astype(np.float64)
    s0 = np.cumsum(counts * levels)[:-1]
    total, s = counts.sum(), (counts * levels).sum()
    w1 = total - w0
    between = w0 * w1 * (s0 / w0 - (s - s0) / w1) ** 2
    k = int(np.argmax(between))
    if between[k] <= 0:
        return None
    return float(levels[k])


def threshold_image(image, policy: str = "otsu") -> np.ndarray:
    """Binarize: 1 where the value is strictly above the threshold (ties go dark)."""
    img = as_image(image)
    lo, hi = float(img.min()), float(img.max())
    if hi == lo:
        raise QRDecodeError("degenerate image: constant intensity")
    if policy not in ("otsu", "midpoint"):
        raise ValueError(f"unknown threshold policy {policy!r}")
    t = otsu_threshold(img) if policy == "otsu" else None
    if t is None:
        t = 0.5 * (lo + hi)
    return (img > t).astype(np.uint8)


def qr_decode_gray(image, threshold_policy: str = "otsu") -> DecodeResult:
    img = as_image(image)
    if img.shape[0] != img.shape[1]:
        raise QRDecodeError(f"symbol must be square, got {img.shape}")
    try:
        version_for_size(img.shape[0])
    except ValueError as exc:
        raise QRDecodeError(str(exc)) from None
    return qr_decode(threshold_image(img, threshold_policy))
