"""Plain successive-cancellation decoding (min-sum, bit by bit)."""

from __future__ import annotations

import numpy as np

from ..core import PolarCode
from ..quantize import QuantSpec, quantize_array
from .primitives import combine, f_minsum, g_func, hard_decision


def prepare_llrs(llrs, quant: QuantSpec | None):
    llrs = np.asarray(llrs, dtype=float)
    if quant is None:
        return llrs
    return quantize_array(llrs, quant.qc, quant.qf)


def sc_decode_codeword(llrs, code: PolarCode, quant: QuantSpec | None = None) -> np.ndarray:
    """Estimated codeword(s), shape like ``llrs``."""
    alpha = prepare_llrs(llrs, quant)
    frozen = code.frozen_mask

    def rec(lo: int, a: np.ndarray) -> np.ndarray:
        n = a.shape[-1]
        if n == 1:
            if frozen[lo]:
                return np.zeros(a.shape, dtype=np.uint8)
            return hard_decision(a)
        h = n // 2
        left = rec(lo, f_minsum(a[..., :h], a[..., h:], quant))
        right = rec(lo + h, g_func(a[..., :h], a[..., h:], left, quant))
        return combine(left, right)

    return rec(0, alpha)


def sc_decode(llrs, code: PolarCode, quant: QuantSpec | None = None) -> np.ndarray:
    """SC decoding with systematic readout: the k bits at the unfrozen positions."""
    return sc_decode_codeword(llrs, code, quant)[..., code.info_positions]
