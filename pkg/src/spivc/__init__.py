"""Visual cryptography with single-pixel imaging.

Two schemes are simulated end to end:

* opaque QR-code visual keys whose summed reflectance, recorded by one
  bucket detector, reveals a secret (``vc_opaque``);
* a secret hidden in two illumination-pattern sequences that cancels to a
  flat region when both light identical objects (``vc_patterns``).
"""

from .imaging import (MeasurementSeries, NoiseModel, PatternSequence, add_noise, as_bits, as_image,
                      generate_patterns, measure, measure_combined)
from .qr import QRDecodeError, qr_decode, qr_decode_gray, qr_encode
from .reconstruct import (SolverConfig, dot_accuracy, f1_score, psnr, reconstruct, reconstruct_correlation,
                          reconstruct_lsq, reconstruct_tv, solve_tv)
from .vc_opaque import (SharePair, encode_shares, extract_secret_from_overlay, fit_secret, modification_budget,
                        overlay, rescale_overlay)
from .vc_patterns import (PatternSharePair, encode_pattern_shares, reveal_secret_from_patterns,
                          reveal_secret_from_reconstruction, superpose_sequences)

__version__ = "0.1.0"

__all__ = [
    "MeasurementSeries", "NoiseModel", "PatternSequence", "PatternSharePair", "QRDecodeError", "SharePair",
    "SolverConfig", "add_noise", "as_bits", "as_image", "dot_accuracy", "encode_pattern_shares", "encode_shares",
    "extract_secret_from_overlay", "f1_score", "fit_secret", "generate_patterns", "measure", "measure_combined",
    "modification_budget", "overlay", "psnr", "qr_decode", "qr_decode_gray", "qr_encode", "reconstruct",
    "reconstruct_correlation", "reconstruct_lsq", "reconstruct_tv", "rescale_overlay", "reveal_secret_from_patterns",
    "reveal_secret_from_reconstruction", "solve_tv", "superpose_sequences",
]
