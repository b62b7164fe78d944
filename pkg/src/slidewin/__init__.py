"""Streaming correlation sketches of paired matrix streams over sliding windows."""

from .decomp import aligned_pair, cs_shrink, ldl_factor, product_svd, qr_factor

__all__ = [
    "aligned_pair",
    "cs_shrink",
    "ldl_factor",
    "product_svd",
    "qr_factor",
]
