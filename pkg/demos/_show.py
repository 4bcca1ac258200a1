import numpy as np


def ascii_bits(bits, on="##", off="  "):
    """Render a bit matrix (1 = light) as text, light modules blank."""
    return "\n".join("".join(off if v else on for v in row) for row in np.asarray(bits))


def ascii_gray(img, ramp=" .:-=+*#%@"):
    img = np.asarray(img, dtype=float)
    lo, hi = img.min(), img.max()
    q = np.zeros(img.shape, dtype=int) if hi == lo else np.rint((img - lo) / (hi - lo) * (len(ramp) - 1)).astype(int)
    return "\n".join("".join(ramp[v] * 2 for v in row) for row in q)
