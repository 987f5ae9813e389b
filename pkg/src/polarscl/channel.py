"""BPSK over AWGN with reproducible per-frame random streams.

Frame ``i`` of a run seeded with ``s`` draws from a Philox4x64 generator
keyed with ``(s << 64) | i`` and a zero counter, so any subset of frames can
be regenerated in any order, on any number of workers, bit-identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import PolarCode, encode_systematic
from .crc import crc_append


@dataclass
class ChannelFrame:
    symbols: np.ndarray
    snr_db: float
    noise_sigma: float


def frame_rng(seed: int, frame_index: int) -> np.random.Generator:
    key = ((int(seed) & (2**64 - 1)) << 64) | (int(frame_index) & (2**64 - 1))
    return np.random.Generator(np.random.Philox(key=key))


def bpsk_modulate(codeword) -> np.ndarray:
    return 1.0 - 2.0 * np.asarray(codeword, dtype=float)


def noise_sigma(ebn0_db: float, rate: float) -> float:
    if not 0 < rate <= 1:
        raise ValueError(f"rate must be in (0, 1], got {rate}")
    if math.isinf(ebn0_db) and ebn0_db > 0:
        return 0.0
    return math.sqrt(1.0 / (2.0 * rate * 10 ** (ebn0_db / 10)))


def awgn_add(symbols, ebn0_db: float, rate: float, seed=None) -> ChannelFrame:
    """Add white Gaussian noise with variance ``1 / (2 R Eb/N0)``.

    ``seed`` may be an int or a ready ``numpy.random.Generator``.
    """
    symbols = np.asarray(symbols, dtype=float)
    sigma = noise_sigma(ebn0_db, rate)
    if sigma == 0.0:
        return ChannelFrame(symbols.copy(), ebn0_db, 0.0)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return ChannelFrame(symbols + sigma * rng.standard_normal(symbols.shape), ebn0_db, sigma)


def channel_llr(frame: ChannelFrame) -> np.ndarray:
    """``2 y / sigma^2``; a noiseless frame is scaled as if ``sigma^2 = 1``."""
    var = frame.noise_sigma ** 2 if frame.noise_sigma > 0 else 1.0
    return 2.0 * frame.symbols / var


@dataclass
class FrameBatch:
    indices: np.ndarray
    payload: np.ndarray     # (B, payload_len)
    codewords: np.ndarray   # (B, N)
    llrs: np.ndarray        # (B, N)


def generate_frames(code: PolarCode, ebn0_db: float, seed: int, start: int, count: int) -> FrameBatch:
    """Random payload -> CRC -> systematic codeword -> BPSK -> AWGN -> LLR."""
    sigma = noise_sigma(ebn0_db, code.rate)
    payload = np.empty((count, code.payload_len), dtype=np.uint8)
    noise = np.zeros((count, code.N))
    for j in range(count):
        rng = frame_rng(seed, start + j)
        payload[j] = rng.integers(0, 2, code.payload_len, dtype=np.uint8)
        noise[j] = rng.standard_normal(code.N)
    codewords = encode_systematic(code, crc_append(payload, code.crc_len))
    y = bpsk_modulate(codewords) + sigma * noise
    llrs = channel_llr(ChannelFrame(y, ebn0_db, sigma))
    return FrameBatch(np.arange(start, start + count), payload, codewords, llrs)
