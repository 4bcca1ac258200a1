"""Secret glyphs and synthetic test objects.

Objects are quantized to 8 bits and then normalized to [0, 1], the same
treatment a scanned photograph would get.
"""

from __future__ import annotations

import numpy as np

# 5x7 bitmap font, rows top to bottom
_FONT = {
    "O": ["01110", "10001", "10001", "10001", "10001", "10001", "01110"],
    "K": ["10001", "10010", "10100", "11000", "10100", "10010", "10001"],
    "1": ["00100", "01100", "00100", "00100", "00100", "00100", "01110"],
    "A": ["01110", "10001", "10001", "11111", "10001", "10001", "10001"],
    "B": ["11110", "10001", "10001", "11110", "10001", "10001", "11110"],
}


def text_bitmap(text: str, scale: int = 1, spacing: int = 1) -> np.ndarray:
    """Secret bitmap for ``text`` (1 = foreground); ``spacing`` is in unscaled font pixels."""
    cols = []
    for i, ch in enumerate(text.upper()):
        if ch not in _FONT:
            raise ValueError(f"no glyph for {ch!r}")
        glyph = np.array([[int(c) for c in row] for row in _FONT[ch]], dtype=np.uint8)
        if i:
            cols.append(np.zeros((7, spacing), dtype=np.uint8))
        cols.append(glyph)
    bmp = np.hstack(cols)
    return np.kron(bmp, np.ones((scale, scale), dtype=np.uint8))


def place(bitmap, shape: tuple[int, int], offset: tuple[int, int] | None = None) -> np.ndarray:
    """Paste ``bitmap`` into a zero canvas; centred unless ``offset`` (row, col) is given."""
    bitmap = np.asarray(bitmap, dtype=np.uint8)
    h, w = shape
    bh, bw = bitmap.shape
    if offset is None:
        offset = ((h - bh) // 2, (w - bw) // 2)
    r, c = offset
    if r < 0 or c < 0 or r + bh > h or c + bw > w:
        raise ValueError("bitmap does not fit the canvas at this offset")
    out = np.zeros(shape, dtype=np.uint8)
    out[r:r + bh, c:c + bw] = bitmap
    return out


def secret_image(text: str, shape: tuple[int, int], scale: int | None = None) -> np.ndarray:
    """Centred text secret; the largest integer scale that leaves a 1-pixel margin by default."""
    if scale is None:
        base = text_bitmap(text)
        scale = max(1, min((shape[0] - 2) // base.shape[0], (shape[1] - 2) // base.shape[1]))
    return place(text_bitmap(text, scale), shape)


def _quantize(img: np.ndarray) -> np.ndarray:
    return np.rint(np.clip(img, 0.0, 1.0) * 255.0) / 255.0


def pepper_object(size: int = 37) -> np.ndarray:
    """Smoothly shaded blobs on a mid-grey background, reminiscent of a peppers photo."""
    y, x = np.mgrid[0:size, 0:size] / (size - 1)
    img = 0.35 + 0.1 * x
    blobs = [  # cy, cx, ry, rx, brightness
        (0.30, 0.28, 0.24, 0.20, 0.90),
        (0.68, 0.35, 0.22, 0.26, 0.60),
        (0.45, 0.72, 0.30, 0.20, 0.80),
        (0.82, 0.80, 0.14, 0.16, 0.45),
    ]
    for cy, cx, ry, rx, b in blobs:
        d2 = ((y - cy) / ry) ** 2 + ((x - cx) / rx) ** 2
        inside = d2 <= 1.0
        shade = b * (1.0 - 0.35 * d2) + 0.08 * (1 - y)
        img = np.where(inside, shade, img)
    return _quantize(img)


def house_object(size: int = 37) -> np.ndarray:
    """A second, geometrically different scene: house with roof, door and window."""
    y, x = np.mgrid[0:size, 0:size] / (size - 1)
    img = 0.55 + 0.25 * (1 - y)            # sky gradient
    img = np.where(y > 0.8, 0.3, img)      # ground
    wall = (x > 0.2) & (x < 0.8) & (y > 0.45) & (y <= 0.8)
    img = np.where(wall, 0.75, img)
    roof = (y > 0.2) & (y <= 0.45) & (np.abs(x - 0.5) < (y - 0.2) * 1.25)
    img = np.where(roof, 0.4, img)
    door = (x > 0.44) & (x < 0.58) & (y > 0.6) & (y <= 0.8)
    img = np.where(door, 0.2, img)
    window = (x > 0.26) & (x < 0.38) & (y > 0.52) & (y < 0.64)
    img = np.where(window, 0.95, img)
    return _quantize(img)
