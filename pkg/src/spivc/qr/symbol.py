"""QR symbol construction: function patterns, data placement, masking.

Internally modules are boolean "dark" arrays indexed ``[row, col]``; the
public ``QrSymbol.matrix`` is a bit matrix with 1 = light, 0 = dark.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .rs import rs_ec
from .tables import EC_FORMAT_BITS, BlockLayout, layout


class CapacityError(ValueError):
    """Message does not fit the requested version / EC level."""


def symbol_size(version: int) -> int:
    return 17 + 4 * version


def version_for_size(size: int) -> int:
    version, rem = divmod(size - 17, 4)
    if rem or not 1 <= version <= 4:
        raise ValueError(f"{size}x{size} is not a version 1-4 QR symbol")
    return version


@lru_cache(maxsize=None)
def format_bits(ec_level: str, mask_id: int) -> int:
    """15-bit BCH(15,5) format word, already XOR-masked with 0x5412."""
    data = EC_FORMAT_BITS[ec_level] << 3 | mask_id
    rem = data
    for _ in range(10):
        rem = (rem << 1) ^ ((rem >> 9) * 0x537)
    return (data << 10 | rem) ^ 0x5412


def format_positions(size: int) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
    """(row, col) of format bits 0..14 for the two copies."""
    first = [(i, 8) for i in range(6)] + [(7, 8), (8, 8), (8, 7)]
    first += [(8, 14 - i) for i in range(9, 15)]
    second = [(8, size - 1 - i) for i in range(8)]
    second += [(size - 15 + i, 8) for i in range(8, 15)]
    return first, second


@lru_cache(maxsize=None)
def function_patterns(version: int) -> tuple[np.ndarray, np.ndarray]:
    """(dark, reserved) for all function modules; format area reserved but blank."""
    size = symbol_size(version)
    dark = np.zeros((size, size), dtype=bool)
    reserved = np.zeros((size, size), dtype=bool)

    def put(r, c, value):
        dark[r, c] = value
        reserved[r, c] = True

    for i in range(size):
        put(6, i, i % 2 == 0)
        put(i, 6, i % 2 == 0)

    for cr, cc in ((3, 3), (3, size - 4), (size - 4, 3)):
        for dr in range(-4, 5):
            for dc in range(-4, 5):
                r, c = cr + dr, cc + dc
                if 0 <= r < size and 0 <= c < size:
                    put(r, c, max(abs(dr), abs(dc)) not in (2, 4))

    centres = layout(version, "L").alignment
    last = len(centres) - 1
    for i, cr in enumerate(centres):
        for j, cc in enumerate(centres):
            if (i, j) in ((0, 0), (0, last), (last, 0)):
                continue
            for dr in range(-2, 3):
                for dc in range(-2, 3):
                    put(cr + dr, cc + dc, max(abs(dr), abs(dc)) != 1)

    first, second = format_positions(size)
    for r, c in first + second:
        put(r, c, False)
    put(size - 8, 8, True)  # dark module

    dark.setflags(write=False)
    reserved.setflags(write=False)
    return dark, reserved


@lru_cache(maxsize=None)
def data_module_order(version: int) -> tuple[tuple[int, int], ...]:
    """Non-function modules in codeword placement (zigzag) order."""
    size = symbol_size(version)
    _, reserved = function_patterns(version)
    order = []
    right = size - 1
    while right >= 1:
        if right == 6:
            right = 5
        upward = ((right + 1) & 2) == 0
        for vert in range(size):
            row = size - 1 - vert if upward else vert
            for j in range(2):
                col = right - j
                if not reserved[row, col]:
                    order.append((row, col))
        right -= 2
    return tuple(order)


_MASKS = (
    lambda r, c: (r + c) % 2 == 0,
    lambda r, c: r % 2 == 0,
    lambda r, c: c % 3 == 0,
    lambda r, c: (r + c) % 3 == 0,
    lambda r, c: (r // 2 + c // 3) % 2 == 0,
    lambda r, c: (r * c) % 2 + (r * c) % 3 == 0,
    lambda r, c: ((r * c) % 2 + (r * c) % 3) % 2 == 0,
    lambda r, c: ((r + c) % 2 + (r * c) % 3) % 2 == 0,
)


@lru_cache(maxsize=None)
def mask_pattern(version: int, mask_id: int) -> np.ndarray:
    """Boolean flip matrix for ``mask_id``, zero on function modules."""
    size = symbol_size(version)
    r, c = np.indices((size, size))
    flip = _MASKS[mask_id](r, c) & ~function_patterns(version)[1]
    flip.setflags(write=False)
    return flip


def interleave_order(lay: BlockLayout) -> list[tuple[int, int]]:
    """(block, index within block) of each transmitted codeword.

    Indices ``>= data_lengths[block]`` are EC codewords.
    """
    order = []
    for i in range(max(lay.data_lengths)):
        for b, n in enumerate(lay.data_lengths):
            if i < n:
                order.append((b, i))
    for i in range(lay.ec_per_block):
        for b, n in enumerate(lay.data_lengths):
            order.append((b, n + i))
    return order


@lru_cache(maxsize=None)
def codeword_map(version: int) -> np.ndarray:
    """Transmitted-codeword index of every module; -1 for function and remainder modules."""
    size = symbol_size(version)
    total = layout(version, "L").total_codewords
    out = np.full((size, size), -1, dtype=np.int32)
    for i, (r, c) in enumerate(data_module_order(version)):
        if i < 8 * total:
            out[r, c] = i // 8
    out.setflags(write=False)
    return out


def encode_data_codewords(message: bytes, lay: BlockLayout) -> list[int]:
    if len(message) > lay.byte_capacity:
        raise CapacityError(
            f"{len(message)} bytes exceed the {lay.byte_capacity}-byte capacity of "
            f"version {lay.version}-{lay.ec_level}")
    bits = [0, 1, 0, 0]
    bits += [(len(message) >> i) & 1 for i in range(7, -1, -1)]
    for byte in message:
        bits += [(byte >> i) & 1 for i in range(7, -1, -1)]
    capacity_bits = 8 * lay.data_codewords
    bits += [0] * min(4, capacity_bits - len(bits))
    bits += [0] * (-len(bits) % 8)
    words = [int("".join(map(str, bits[i:i + 8])), 2) for i in range(0, len(bits), 8)]
    pad = (0xEC, 0x11)
    while len(words) < lay.data_codewords:
        words.append(pad[(len(words) - len(bits) // 8) % 2])
    return words


def build_codewords(data: list[int], lay: BlockLayout) -> list[int]:
    """Split into blocks, append RS codewords, interleave."""
    blocks, start = [], 0
    for n in lay.data_lengths:
        chunk = data[start:start + n]
        blocks.append(chunk + rs_ec(chunk, lay.ec_per_block))
        start += n
    return [blocks[b][i] for b, i in interleave_order(lay)]


def penalty(dark: np.ndarray) -> int:
    """Mask-selection penalty (run, block, finder-like and balance rules)."""
    score = 0
    for lines in (dark, dark.T):
        for line in lines:
            run, prev = 0, None
            for v in line:
                if v == prev:
                    run += 1
                else:
                    if run >= 5:
                        score += 3 + run - 5
                    run, prev = 1, v
            if run >= 5:
                score += 3 + run - 5
    same = (dark[:-1, :-1] == dark[1:, :-1]) & (dark[:-1, :-1] == dark[:-1, 1:]) & (dark[:-1, :-1] == dark[1:, 1:])
    score += 3 * int(same.sum())

    finder = np.array([1, 0, 1, 1, 1, 0, 1], dtype=bool)
    light4 = np.zeros(4, dtype=bool)
    pat_a = np.concatenate([finder, light4])
    pat_b = pat_a[::-1]
    padded = np.pad(dark, 4, constant_values=False)
    for lines in (padded, padded.T):
        win = np.lib.stride_tricks.sliding_window_view(lines, 11, axis=1)
        score += 40 * int(np.all(win == pat_a, axis=2).sum() + np.all(win == pat_b, axis=2).sum())

    pct = 100.0 * dark.sum() / dark.size
    score += 10 * int(abs(pct - 50) // 5)
    return score


def draw_format(dark: np.ndarray, ec_level: str, mask_id: int) -> None:
    bits = format_bits(ec_level, mask_id)
    first, second = format_positions(dark.shape[0])
    for i, (r, c) in enumerate(first):
        dark[r, c] = bool((bits >> i) & 1)
    for i, (r, c) in enumerate(second):
        dark[r, c] = bool((bits >> i) & 1)


@dataclass
class QrSymbol:
    version: int
    ec_level: str
    mask_id: int
    matrix: np.ndarray  # uint8, 1 = light, 0 = dark

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def layout(self) -> BlockLayout:
        return layout(self.version, self.ec_level)


def render(codewords: list[int], version: int, ec_level: str, mask_id: int) -> np.ndarray:
    """Place transmitted codewords, apply the mask and format info; returns dark modules."""
    base, _ = function_patterns(version)
    dark = base.copy()
    for i, (r, c) in enumerate(data_module_order(version)):
        if i < 8 * len(codewords):
            dark[r, c] = bool((codewords[i >> 3] >> (7 - (i & 7))) & 1)
    dark ^= mask_pattern(version, mask_id)
    draw_format(dark, ec_level, mask_id)
    return dark


def qr_encode(message, version: int = 4, ec_level: str = "H", mask_id: int | None = None) -> QrSymbol:
    """Byte-mode QR symbol.  Without ``mask_id`` the lowest-penalty mask wins."""
    if isinstance(message, str):
        message = message.encode("utf-8")
    message = bytes(message)
    lay = layout(version, ec_level)
    if mask_id is not None and mask_id not in range(8):
        raise ValueError(f"mask_id must be 0..7, got {mask_id}")
    codewords = build_codewords(encode_data_codewords(message, lay), lay)
    if mask_id is None:
        mask_id = min(range(8), key=lambda m: penalty(render(codewords, version, ec_level, m)))
    dark = render(codewords, version, ec_level, mask_id)
    return QrSymbol(version, ec_level, mask_id, (~dark).astype(np.uint8))
