"""
Two QR visual keys
==================

Hide "OK" in two copies of a QR code.  Each copy still scans; overlapping
them shows the secret as grey dots.
"""

import numpy as np

from spivc.qr import qr_decode, qr_encode
from spivc.scenes import text_bitmap
from spivc.vc_opaque import encode_shares, extract_secret_from_overlay, fit_secret, modification_budget, overlay
from _show import ascii_bits

sym = qr_encode("Nanophotonics Research Center", 4, "H")

# %%
# Put the glyph where the error correction can absorb it.  In the worst
# case every change lands in one key, so we count distinct damaged
# codewords per block against the capacity.
secret = fit_secret(sym, text_bitmap("OK", 2))
budget = modification_budget(secret, sym)
print("worst-case damaged codewords per block:", budget.per_block_worst, "capacity", budget.capacity[0])

pair = encode_shares(sym.matrix, secret, seed=11)
print("key 1 reads:", qr_decode(pair.key1).text)
print("key 2 reads:", qr_decode(pair.key2).text)

# %%
# Overlapping the opaque keys adds reflectances: black+black=0, white+white=2,
# and the grey level 1 only occurs where the keys disagree.
ov = overlay(pair.key1, pair.key2)
print(np.unique(ov, return_counts=True))
revealed = extract_secret_from_overlay(ov)
print(ascii_bits(1 - revealed))
print("exact:", np.array_equal(revealed, secret))
