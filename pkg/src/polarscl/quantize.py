"""Two's-complement fixed-point contract for LLRs and path metrics.

A format ``Qi.Qc.Qf`` stores channel LLRs on ``Qc`` bits, internal LLRs on
``Qi`` bits, both with ``Qf`` fractional bits; path metrics take ``Qi + 1``
bits. Channel values are rounded half away from zero; every internal
operation is exact integer arithmetic followed by saturation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InvalidParametersError


@dataclass(frozen=True)
class QuantSpec:
    qi: int
    qc: int
    qf: int

    def __post_init__(self):
        if not (self.qc <= self.qi and 0 <= self.qf < self.qc and self.qc >= 2):
            raise InvalidParametersError(
                f"invalid quantization {self.qi}.{self.qc}.{self.qf}: need qc <= qi, qf < qc"
            )

    @property
    def pm_bits(self) -> int:
        return self.qi + 1

    @classmethod
    def parse(cls, text: str) -> "QuantSpec":
        m = re.fullmatch(r"\s*(\d+)\.(\d+)\.(\d+)\s*", text or "")
        if not m:
            raise ConfigurationError(f"quantization must look like 'Qi.Qc.Qf', got {text!r}")
        try:
            return cls(*(int(g) for g in m.groups()))
        except InvalidParametersError as exc:
            raise ConfigurationError(str(exc)) from None

    def __str__(self) -> str:
        return f"{self.qi}.{self.qc}.{self.qf}"


DEFAULT_QUANT = QuantSpec(6, 5, 0)


def limits(width: int) -> tuple[int, int]:
    return -(1 << (width - 1)), (1 << (width - 1)) - 1


def saturate(raw, width: int):
    lo, hi = limits(width)
    return np.clip(raw, lo, hi)


def round_half_away(x):
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def quantize_array(x, width: int, qf: int) -> np.ndarray:
    """Vectorised :func:`quantize_llr` returning raw int32 values."""
    lo, hi = limits(width)
    scaled = np.clip(np.asarray(x, dtype=float) * (1 << qf), lo - 1, hi + 1)
    return np.clip(round_half_away(scaled), lo, hi).astype(np.int32)


@dataclass(frozen=True)
class FixedVal:
    raw: int
    width: int
    frac: int = 0

    def __post_init__(self):
        lo, hi = limits(self.width)
        if not lo <= self.raw <= hi:
            raise InvalidParametersError(f"raw {self.raw} outside {self.width}-bit range")

    @property
    def value(self) -> float:
        return self.raw / (1 << self.frac)


def quantize_llr(x: float, width: int, qf: int) -> FixedVal:
    if width < 2:
        raise InvalidParametersError("width must be at least 2 bits")
    return FixedVal(int(quantize_array(x, width, qf)), width, qf)


def _check_frac(a: FixedVal, b: FixedVal):
    if a.frac != b.frac:
        raise InvalidParametersError("operands must share the number of fractional bits")


def sat_add(a: FixedVal, b: FixedVal, width: int | None = None) -> FixedVal:
    _check_frac(a, b)
    width = width or max(a.width, b.width)
    return FixedVal(int(saturate(a.raw + b.raw, width)), width, a.frac)


def sat_sub(a: FixedVal, b: FixedVal, width: int | None = None) -> FixedVal:
    _check_frac(a, b)
    width = width or max(a.width, b.width)
    return FixedVal(int(saturate(a.raw - b.raw, width)), width, a.frac)


def normalize_path_metrics(pms: list[FixedVal]) -> list[FixedVal]:
    """Subtract the smallest metric from all of them."""
    if not pms:
        raise InvalidParametersError("need at least one path metric")
    low = min(p.raw for p in pms)
    return [FixedVal(p.raw - low, p.width, p.frac) for p in pms]


def normalize_array(pm: np.ndarray, valid: np.ndarray) -> np.ndarray:
    """Per-row normalisation of (..., L) metrics over the valid lanes only."""
    big = np.iinfo(np.int64).max
    low = np.min(np.where(valid, pm, big), axis=-1, keepdims=True)
    low = np.where(low == big, 0, low)
    return (pm - low).astype(pm.dtype)
