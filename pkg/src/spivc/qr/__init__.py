"""Byte-mode QR codes, versions 1-4, with Reed-Solomon error correction."""

from .decoder import DecodeResult, QRDecodeError, otsu_threshold, qr_decode, qr_decode_gray, threshold_image
from .rs import ReedSolomonError, rs_correct, rs_ec, syndromes
from .symbol import CapacityError, QrSymbol, qr_encode
from .tables import EC_LEVELS, VERSIONS, BlockLayout, layout

__all__ = [
    "BlockLayout", "CapacityError", "DecodeResult", "EC_LEVELS", "QRDecodeError", "QrSymbol",
    "ReedSolomonError", "VERSIONS", "layout", "otsu_threshold", "qr_decode", "qr_decode_gray",
    "qr_encode", "rs_correct", "rs_ec", "syndromes", "threshold_image",
]
