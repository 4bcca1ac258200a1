"""
Single-pixel imaging
====================

Measure a scene with random binary patterns and one bucket detector, then
reconstruct it three ways.
"""

import numpy as np

from spivc.imaging import NoiseModel, add_noise, generate_patterns, measure
from spivc.qr import qr_decode_gray, qr_encode
from spivc.reconstruct import SolverConfig, psnr, reconstruct_correlation, reconstruct_lsq, solve_tv
from _show import ascii_gray

key = qr_encode("Nanophotonics Research Center", 4, "H").matrix.astype(float)

# %%
# Twice as many patterns as pixels.  Patterns are regenerated from the seed
# whenever needed, so nothing but (size, count, seed) has to be stored.
patterns = generate_patterns(33, 33, 2178, seed=7)
series = measure(key, patterns)
print(len(series), "measurements, first few:", series.values[:4])

# %%
corr = reconstruct_correlation(series, patterns)
lsq = reconstruct_lsq(series, patterns)
res = solve_tv(series, patterns, SolverConfig(max_iters=300))
for name, img in (("correlation", corr), ("least squares", lsq), ("total variation", res.image)):
    print(f"{name:16s} PSNR {psnr(img, key):6.1f} dB")
print("TV iterations", res.iterations, "objective", res.objective[0], "->", res.objective[-1])

# %%
# The reconstruction is good enough to scan, also with some detector noise.
noisy = add_noise(series, NoiseModel("additive-gaussian", 0.005, seed=1))
img = solve_tv(noisy, patterns).image
print(ascii_gray(img))
print("decoded:", qr_decode_gray(np.maximum(img, 0)).text)
