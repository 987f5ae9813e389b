"""Bitwise CRC over bit vectors (MSB-first, zero init, no reflection)."""

from __future__ import annotations

import numpy as np

# generator polynomials without the leading x^len term
CRC_POLYS = {
    6: 0x21,
    8: 0x07,
    11: 0x621,
    16: 0x1021,
    24: 0xB2B117,
}


def _poly_for(crc_len: int, poly: int | None) -> int:
    if poly is not None:
        return poly
    try:
        return CRC_POLYS[crc_len]
    except KeyError:
        raise ValueError(f"no default CRC polynomial for length {crc_len}") from None


def crc_remainder(bits, crc_len: int, poly: int | None = None) -> np.ndarray:
    """Remainder bits (..., crc_len) of ``bits(x) * x^crc_len`` mod the generator."""
    bits = np.asarray(bits, dtype=np.uint8)
    lead = bits.shape[:-1]
    if crc_len == 0:
        return np.zeros(lead + (0,), dtype=np.uint8)
    g = _poly_for(crc_len, poly)
    top = 1 << (crc_len - 1)
    mask = (1 << crc_len) - 1
    reg = np.zeros(lead, dtype=np.int64)
    for i in range(bits.shape[-1]):
        fb = ((reg & top) != 0) ^ (bits[..., i] != 0)
        reg = ((reg << 1) & mask) ^ np.where(fb, g, 0)
    shifts = np.arange(crc_len - 1, -1, -1)
    return ((reg[..., None] >> shifts) & 1).astype(np.uint8)


def crc_append(info, crc_len: int, poly: int | None = None) -> np.ndarray:
    info = np.asarray(info, dtype=np.uint8)
    return np.concatenate([info, crc_remainder(info, crc_len, poly)], axis=-1)


def crc_check(word, crc_len: int, poly: int | None = None):
    """True where the trailing ``crc_len`` bits match the CRC of the rest."""
    word = np.asarray(word, dtype=np.uint8)
    if crc_len == 0:
        return np.ones(word.shape[:-1], dtype=bool) if word.ndim > 1 else True
    ok = np.all(crc_remainder(word[..., :-crc_len], crc_len, poly) == word[..., -crc_len:], axis=-1)
    return bool(ok) if word.ndim == 1 else ok
