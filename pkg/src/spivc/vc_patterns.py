"""Secret sharing through two illumination-pattern sequences.

Both sequences start as the same random sequence.  On the secret's support
every pattern pair is rewritten to one 1 and one 0 (orientation drawn per
``(n, x, y)``), so the virtual superposition ``A_n + B_n`` is a constant 1
there and ``2 * base`` elsewhere.  A flat region carries no spatial
variation, so it drops out of a reconstruction of the combined measurement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .imaging import PatternSequence, as_bits, as_image, generate_patterns
from .qr.decoder import otsu_threshold


@dataclass
class PatternSharePair:
    seq_a: PatternSequence
    seq_b: PatternSequence
    secret: np.ndarray
    base_seed: int
    orient_seed: int

    def manifest(self, secret_path: str | None = None) -> dict:
        h, w = self.secret.shape
        d = {"width": w, "height": h, "count": self.seq_a.count,
             "base_seed": self.base_seed, "orient_seed": self.orient_seed}
        if secret_path is not None:
            d["secret"] = secret_path
        else:
            d["secret_rows"] = ["".join(map(str, row)) for row in self.secret]
        return d


def encode_pattern_shares(width: int, height: int, count: int, secret, base_seed: int,
                          orient_seed: int) -> PatternSharePair:
    secret = as_bits(secret)
    if secret.shape != (height, width):
        raise ValueError(f"secret shape {secret.shape} does not match ({height}, {width})")
    base = generate_patterns(width, height, count, base_seed)
    orient = rng.bit_grid(orient_seed, rng.PATTERN_ORIENT, np.arange(count), height, width)
    fg = secret.astype(bool)[None, :, :]
    a = np.where(fg, orient, base.patterns).astype(np.uint8)
    b = np.where(fg, 1 - orient, base.patterns).astype(np.uint8)

    rows = ["".join(map(str, row)) for row in secret]
    src = {"kind": "share", "base_seed": base.seed, "orient_seed": rng.check_seed(orient_seed),
           "secret_rows": rows}
    seq_a = PatternSequence(a, base.seed, {**src, "which": "A"})
    seq_b = PatternSequence(b, base.seed, {**src, "which": "B"})
    return PatternSharePair(seq_a, seq_b, secret, base.seed, int(orient_seed))


def superpose_sequences(pair: PatternSharePair) -> np.ndarray:
    """Integer stack ``A_n + B_n`` with values in {0, 1, 2}."""
    return pair.seq_a.patterns.astype(np.int16) + pair.seq_b.patterns


def reveal_secret_from_patterns(pair: PatternSharePair) -> np.ndarray:
    first = pair.seq_a.patterns[0].astype(np.int16) + pair.seq_b.patterns[0]
    return (first == 1).astype(np.uint8)


def reveal_secret_from_reconstruction(recon_combined, recon_single=None) -> np.ndarray:
    """Segment the suppressed secret region of a combined reconstruction.

    With a reference ``recon_single`` of the same object, the residual
    ``|combined - (alpha * single + beta)|`` is Otsu-thresholded and the
    high-residual class is the secret.  ``alpha, beta`` are fitted by least
    squares over all pixels, then refitted once on the background class.

    Without a reference the combined image alone is Otsu-split and the darker
    class returned, since the secret region reconstructs to roughly zero.
    This is much weaker: dark parts of the object land in the mask too.
    """
    comb = as_image(recon_combined)
    if recon_single is None:
        t = otsu_threshold(comb)
        if t is None:
            raise ValueError("degenerate reconstruction: constant intensity")
        return (comb <= t).astype(np.uint8)

    single = as_image(recon_single)
    if single.shape != comb.shape:
        raise ValueError("reconstructions differ in shape")
    if np.ptp(single) == 0:
        raise ValueError("degenerate reference reconstruction: constant intensity")
    background = np.ones(comb.shape, dtype=bool)
    fg = np.zeros(comb.shape, dtype=bool)
    for _ in range(2):
        alpha, beta = np.polyfit(single[background], comb[background], 1)
        resid = np.abs(comb - alpha * single - beta)
        t = otsu_threshold(resid)
        # residual at rounding level: combined is an affine copy of the reference
        if t is None or np.ptp(resid) <= 1e-9 * max(1.0, float(np.abs(comb).max())):
            break
        fg = resid > t
        background = ~fg
        if background.sum() < 2:
            break
    return fg.astype(np.uint8)
