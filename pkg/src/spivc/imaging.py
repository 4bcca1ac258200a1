"""Rasters, illumination patterns and the single-pixel forward model.

Images are ``float64`` arrays of shape ``(height, width)`` with finite,
non-negative entries.  Bit matrices are ``uint8`` arrays of the same layout
holding only 0 and 1.  A bucket-detector measurement is the discrete inner
product of the scene with each pattern; several scenes seen by one detector
simply add up.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from . import rng

# generate_patterns refuses to allocate more bits than this
MAX_PATTERN_BITS = 1 << 31


def as_image(a) -> np.ndarray:
    img = np.asarray(a, dtype=np.float64)
    if img.ndim != 2 or img.size == 0:
        raise ValueError(f"image must be a non-empty 2-D array, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains non-finite values")
    if np.any(img < 0):
        raise ValueError("image contains negative intensities")
    return img


def as_bits(a) -> np.ndarray:
    arr = np.asarray(a)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"bit matrix must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all((arr == 0) | (arr == 1)):
        raise ValueError("bit matrix entries must be 0 or 1")
    return arr.astype(np.uint8)


@dataclass
class PatternSequence:
    """N binary patterns of shape ``(height, width)``, stacked as ``(N, h, w)``.

    ``source`` describes how to regenerate the bits; for plain random
    sequences it is ``{"kind": "random", "seed": ...}``.
    """

    patterns: np.ndarray
    seed: int
    source: dict = field(default_factory=dict)

    @property
    def count(self) -> int:
        return self.patterns.shape[0]

    @property
    def height(self) -> int:
        return self.patterns.shape[1]

    @property
    def width(self) -> int:
        return self.patterns.shape[2]

    @property
    def shape(self) -> tuple[int, int]:
        return self.patterns.shape[1:]

    def __len__(self) -> int:
        return self.count

    def __getitem__(self, n):
        return self.patterns[n]

    def matrix(self) -> np.ndarray:
        """Measurement matrix: one flattened (row-major) pattern per row."""
        return self.patterns.reshape(self.count, -1)

    def descriptor(self) -> dict:
        return {"width": self.width, "height": self.height, "count": self.count, **self.source}


def generate_patterns(width: int, height: int, count: int, seed: int) -> PatternSequence:
    """I.i.d. fair binary patterns; bit (n, x, y) is the low bit of the counter hash."""
    width, height, count = int(width), int(height), int(count)
    if min(width, height, count) < 1:
        raise ValueError("width, height and count must all be >= 1")
    if width * height * count > MAX_PATTERN_BITS:
        raise ValueError("requested pattern stack is too large")
    seed = rng.check_seed(seed)
    bits = rng.bit_grid(seed, rng.PATTERN, np.arange(count), height, width)
    return PatternSequence(bits, seed, {"kind": "random", "seed": seed})


def _pattern_stack(patterns) -> np.ndarray:
    if isinstance(patterns, PatternSequence):
        return patterns.patterns
    stack = np.asarray(patterns)
    if stack.ndim != 3 or stack.shape[0] < 1:
        raise ValueError(f"pattern stack must have shape (N, h, w), got {stack.shape}")
    return stack


@dataclass
class MeasurementSeries:
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.values)

    def to_dict(self) -> dict:
        # float.__repr__ is the shortest round-tripping decimal
        return {"values": [float(v) for v in self.values], "meta": self.meta}

    @classmethod
    def from_dict(cls, d: dict) -> "MeasurementSeries":
        return cls(np.asarray(d["values"], dtype=np.float64), dict(d.get("meta", {})))


def measure_combined(objects: Sequence, pattern_seqs: Sequence, scheme: str | None = None) -> MeasurementSeries:
    """Total bucket intensity when scene j is lit by sequence j.

    ``values[n] = sum_j sum_{x,y} O_j(x, y) P_{j,n}(x, y)``.  The per-pixel
    contributions of all scenes are added before the pixel reduction, and the
    reduction order is the same for every call, so two identical scenes under
    binary shares give exactly the same numbers as one scene under the
    superposed pattern.
    """
    if len(objects) == 0 or len(objects) != len(pattern_seqs):
        raise ValueError("need equally many objects and pattern sequences (at least one)")
    stacks = [_pattern_stack(p) for p in pattern_seqs]
    count = stacks[0].shape[0]
    total = None
    for obj, stack in zip(objects, stacks):
        img = as_image(obj)
        if stack.shape[0] != count:
            raise ValueError("pattern sequences differ in length")
        if stack.shape[1:] != img.shape:
            raise ValueError(f"object shape {img.shape} does not match patterns {stack.shape[1:]}")
        contrib = stack * img[None, :, :]
        total = contrib if total is None else total + contrib
    values = total.reshape(count, -1).sum(axis=1)

    meta: dict[str, Any] = {
        "scheme": scheme or ("plain-spi" if len(objects) == 1 else "combined"),
        "objects": [list(as_image(o).shape[::-1]) for o in objects],
        "patterns": [p.descriptor() if isinstance(p, PatternSequence) else {"kind": "explicit"}
                     for p in pattern_seqs],
        "noise": {"kind": "none"},
    }
    return MeasurementSeries(values, meta)


def measure(obj, patterns, scheme: str | None = None) -> MeasurementSeries:
    """Single-pixel intensities ``I_n = sum O(x, y) P_n(x, y)``."""
    return measure_combined([obj], [patterns], scheme=scheme)


@dataclass(frozen=True)
class NoiseModel:
    """Additive Gaussian detector noise; ``sigma`` is relative to the mean intensity."""

    kind: str = "none"
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("none", "additive-gaussian"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if not (np.isfinite(self.sigma) and self.sigma >= 0):
            raise ValueError("noise sigma must be finite and >= 0")
        rng.check_seed(self.seed)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "sigma": self.sigma, "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict | None) -> "NoiseModel":
        if not d:
            return cls()
        return cls(d.get("kind", "none"), float(d.get("sigma", 0.0)), int(d.get("seed", 0)))


def add_noise(series: MeasurementSeries, model: NoiseModel) -> MeasurementSeries:
    if model.kind == "none" or model.sigma == 0:
        return MeasurementSeries(series.values.copy(), dict(series.meta))
    scale = model.sigma * float(np.mean(series.values))
    noise = scale * rng.standard_normal(model.seed, rng.NOISE, np.arange(len(series)))
    meta = dict(series.meta)
    meta["noise"] = model.to_dict()
    return MeasurementSeries(series.values + noise, meta)
