"""Two opaque visual keys whose summed reflectance reveals a secret.

Where the secret is 0 both keys keep the base bit; where it is 1 one key
gets a 1 and the other a 0.  The detector-side overlay is the pointwise sum:
0 (black), 1 (grey, only on the secret) or 2 (white).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .imaging import as_bits, as_image
from .qr.symbol import QrSymbol, codeword_map, format_positions, interleave_order
from .qr.tables import layout

# format-information bits correctable per copy by the decoder
FORMAT_CAPACITY = 3


@dataclass
class SharePair:
    key1: np.ndarray
    key2: np.ndarray
    base: np.ndarray
    secret: np.ndarray
    seed: int
    assignment: str = "random"


def encode_shares(base, secret, seed: int, assignment: str = "random") -> SharePair:
    """Split ``secret`` into two keys derived from ``base``.

    ``random``: the key that receives the 1 is a fair bit of (seed, x, y).
    ``balanced``: foreground dots are shuffled by seed and the key that
    differs from ``base`` alternates, so each key carries half the changes.
    """
    base = as_bits(base)
    secret = as_bits(secret)
    if base.shape != secret.shape:
        raise ValueError(f"secret shape {secret.shape} does not match key shape {base.shape}")
    seed = rng.check_seed(seed)
    fg = secret == 1
    h, w = base.shape

    if assignment == "random":
        key1_bit = rng.bit_grid(seed, rng.KEY_ORIENT, 0, h, w)[0]
    elif assignment == "balanced":
        # which key is modified: 1 -> key1 deviates from base
        idx = np.flatnonzero(fg)
        order = np.argsort(rng.hash_grid(seed, rng.SHUFFLE, 0, h, w)[0].ravel()[idx], kind="stable")
        modify_key1 = np.zeros(h * w, dtype=bool)
        modify_key1[idx[order[: (len(idx) + 1) // 2]]] = True
        modify_key1 = modify_key1.reshape(h, w)
        key1_bit = np.where(modify_key1, 1 - base, base).astype(np.uint8)
    else:
        raise ValueError(f"unknown assignment {assignment!r}")

    key1 = np.where(fg, key1_bit, base).astype(np.uint8)
    key2 = np.where(fg, 1 - key1_bit, base).astype(np.uint8)
    return SharePair(key1, key2, base, secret, seed, assignment)


def overlay(key1, key2) -> np.ndarray:
    k1, k2 = as_bits(key1), as_bits(key2)
    if k1.shape != k2.shape:
        raise ValueError("key shapes differ")
    return k1.astype(np.float64) + k2


def rescale_overlay(recon, max_iter: int = 100) -> np.ndarray:
    """Affinely map a reconstruction onto the overlay levels {0, 1, 2}.

    Fits ``recon ~ gain * level + offset`` by least squares, alternating with
    nearest-level assignment until the assignment stops changing, then
    clips to [0, 2].
    """
    r = np.asarray(recon, dtype=np.float64)
    lo, hi = float(r.min()), float(r.max())
    if hi == lo:
        return np.zeros_like(r)
    gain, offset = (hi - lo) / 2.0, lo
    levels = None
    for _ in range(max_iter):
        new = np.clip(np.rint((r - offset) / gain), 0, 2)
        if levels is not None and np.array_equal(new, levels):
            break
        levels = new
        if np.ptp(levels) == 0:
            break
        gain, offset = np.polyfit(levels.ravel(), r.ravel(), 1)
        if gain <= 0:
            raise ValueError("reconstruction is anti-correlated with the overlay levels")
    return np.clip((r - offset) / gain, 0.0, 2.0)


def extract_secret_from_overlay(ov, tau: float = 0.25) -> np.ndarray:
    """1 where the overlay is nearest to the grey level 1."""
    ov = np.asarray(ov, dtype=np.float64)
    if ov.ndim != 2:
        raise ValueError("overlay must be 2-D")
    if np.any(ov < -tau) or np.any(ov > 2 + tau) or not np.all(np.isfinite(ov)):
        raise ValueError(f"overlay values outside [-{tau}, {2 + tau}]; rescale first")
    return (np.abs(ov - 1.0) < 0.5).astype(np.uint8)


@dataclass
class Budget:
    per_key_expected: float      # modified codeword modules per key, random assignment
    per_block_worst: list[int]   # distinct codewords hit per RS block if one key takes every change
    capacity: list[int]
    format_hits: tuple[int, int]
    ok: bool


def modification_budget(secret, symbol: QrSymbol) -> Budget:
    secret = as_bits(secret)
    if secret.shape != symbol.matrix.shape:
        raise ValueError("secret and symbol sizes differ")
    lay = layout(symbol.version, symbol.ec_level)
    cmap = codeword_map(symbol.version)
    fg = secret == 1

    hit = np.unique(cmap[fg & (cmap >= 0)])
    order = interleave_order(lay)
    per_block = [set() for _ in lay.data_lengths]
    for k in hit:
        b, i = order[k]
        per_block[b].add(i)
    worst = [len(s) for s in per_block]
    capacity = [lay.correction_capacity] * lay.num_blocks

    copies = format_positions(symbol.size)
    fmt = tuple(int(sum(fg[r, c] for r, c in copy)) for copy in copies)
    ok = all(w <= c for w, c in zip(worst, capacity)) and min(fmt) <= FORMAT_CAPACITY
    return Budget(float(np.sum(fg & (cmap >= 0))) / 2.0, worst, capacity, fmt, ok)


def fit_secret(symbol: QrSymbol, bitmap) -> np.ndarray:
    """Place ``bitmap`` on the symbol grid at the first offset (centre outwards) within budget."""
    bitmap = as_bits(bitmap)
    size = symbol.size
    bh, bw = bitmap.shape
    if bh > size or bw > size:
        raise ValueError("secret bitmap larger than the symbol")
    centre = ((size - bh) / 2, (size - bw) / 2)
    offsets = sorted(((r, c) for r in range(size - bh + 1) for c in range(size - bw + 1)),
                     key=lambda o: ((o[0] - centre[0]) ** 2 + (o[1] - centre[1]) ** 2, o))
    for r, c in offsets:
        canvas = np.zeros((size, size), dtype=np.uint8)
        canvas[r:r + bh, c:c + bw] = bitmap
        if modification_budget(canvas, symbol).ok:
            return canvas
    raise ValueError("no placement of the secret stays within the error-correction budget")


def detector_overlay(key1, key2) -> np.ndarray:
    """The scene a single detector sees when both keys share one pattern sequence."""
    return as_image(overlay(key1, key2))
