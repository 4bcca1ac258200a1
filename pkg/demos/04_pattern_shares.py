"""
Secrets in illumination patterns
================================

Two pattern sequences that look random on their own.  Projecting both onto
the same object with one detector flattens the secret region, which then
vanishes from the reconstruction.
"""

import numpy as np

from spivc.imaging import measure, measure_combined
from spivc.reconstruct import f1_score, psnr, reconstruct_tv
from spivc.scenes import pepper_object, secret_image
from spivc.vc_patterns import (encode_pattern_shares, reveal_secret_from_patterns,
                               reveal_secret_from_reconstruction, superpose_sequences)
from _show import ascii_bits, ascii_gray

secret = secret_image("OK", (37, 37))
pair = encode_pattern_shares(37, 37, 2738, secret, base_seed=5, orient_seed=6)

# %%
# One sequence on its own: every pixel is a fair coin, secret or not.
means = pair.seq_a.patterns.mean(axis=0)
print("per-pixel mean, secret vs rest:", means[secret == 1].mean(), means[secret == 0].mean())

# %%
# The virtual sum of the two sequences is exactly 1 on the secret.
print("values on secret:", np.unique(superpose_sequences(pair)[:, secret == 1]))
print("revealed from patterns:", np.array_equal(reveal_secret_from_patterns(pair), secret))

# %%
obj = pepper_object(37)
single = reconstruct_tv(measure(obj, pair.seq_a), pair.seq_a)
combined = reconstruct_tv(measure_combined([obj, obj], [pair.seq_a, pair.seq_b]), pair.seq_b)
print("single-sequence PSNR", round(psnr(single, obj), 1), "dB")
print(ascii_gray(np.maximum(combined, 0)))

mask = reveal_secret_from_reconstruction(np.maximum(combined, 0), np.maximum(single, 0))
print(ascii_bits(1 - mask))
print("F1 against the secret:", f1_score(mask, secret))
