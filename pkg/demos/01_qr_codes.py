"""
QR codes from scratch
=====================

Encode a message as a version-4, level-H symbol, damage it, and read it back.
"""


from spivc.qr import layout, qr_decode, qr_encode
from spivc.qr.symbol import data_module_order
from _show import ascii_bits

# %%
# The message used throughout the demos fits a 33x33 symbol with the
# strongest error-correction level.
sym = qr_encode("Nanophotonics Research Center", version=4, ec_level="H")
print(ascii_bits(sym.matrix))
print("mask", sym.mask_id, "| blocks", sym.layout.num_blocks, "| correctable codewords per block",
      sym.layout.correction_capacity)

# %%
# Flip one module in each of eight codewords.  Each flip spoils a whole byte,
# and the decoder reports how many bytes it repaired.
damaged = sym.matrix.copy()
order = data_module_order(4)
for k in range(0, 64, 8):
    r, c = order[8 * k]
    damaged[r, c] ^= 1
res = qr_decode(damaged)
print(res.text, "| corrected", res.corrected_errors, "| per block", res.block_errors)

# %%
# Byte capacity per version and level.
for v in range(1, 5):
    print(v, {ec: layout(v, ec).byte_capacity for ec in "LMQH"})
