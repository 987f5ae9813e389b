"""LLR update rules, constituent-node candidate generators and the L-best sorter.

All functions broadcast over leading axes. With ``quant=None`` values are
float64; with a :class:`QuantSpec` they are raw two's-complement integers
and every result is saturated (LLRs to ``qi`` bits, metrics to ``qi + 1``).

Path metrics follow the hardware penalty rule: a decision that disagrees
with the sign of its LLR costs ``|LLR|``, agreement costs nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import InvalidParametersError
from ..quantize import QuantSpec, normalize_array, saturate


def f_minsum(a, b, quant: QuantSpec | None = None):
    a = np.asarray(a)
    b = np.asarray(b)
    sign = np.where((a < 0) ^ (b < 0), -1, 1)
    out = sign * np.minimum(np.abs(a), np.abs(b))
    if quant is None:
        return out.astype(float)
    return saturate(out, quant.qi).astype(np.int32)


def g_func(a, b, u, quant: QuantSpec | None = None):
    a = np.asarray(a)
    out = np.asarray(b) + np.where(np.asarray(u) != 0, -a, a)
    if quant is None:
        return out.astype(float)
    return saturate(out, quant.qi).astype(np.int32)


def combine(left, right) -> np.ndarray:
    left = np.asarray(left, dtype=np.uint8)
    right = np.asarray(right, dtype=np.uint8)
    if left.shape != right.shape:
        raise InvalidParametersError(f"combine needs equal shapes, got {left.shape} and {right.shape}")
    return np.concatenate([left ^ right, right], axis=-1)


def hard_decision(alpha) -> np.ndarray:
    return (np.asarray(alpha) < 0).astype(np.uint8)


def add_metric(pm, penalty, quant: QuantSpec | None = None):
    out = np.asarray(pm) + np.asarray(penalty)
    if quant is None:
        return out.astype(float)
    return saturate(out, quant.pm_bits).astype(np.int32)


@dataclass
class CandidateSet:
    """Candidate bit vectors ``bits`` (..., C, n) with metrics ``pm`` (..., C)."""

    bits: np.ndarray
    pm: np.ndarray

    @property
    def count(self) -> int:
        return self.bits.shape[-2]


def _ordered_sum(values: np.ndarray) -> np.ndarray:
    # fixed left-to-right accumulation so results do not depend on batch shape
    total = np.zeros(values.shape[:-1], dtype=values.dtype)
    for i in range(values.shape[-1]):
        total = total + values[..., i]
    return total


def decode_rate0(alpha, pm=0, quant: QuantSpec | None = None) -> CandidateSet:
    alpha = np.asarray(alpha)
    penalty = _ordered_sum(np.where(alpha < 0, -alpha, 0))
    bits = np.zeros(alpha.shape[:-1] + (1,) + alpha.shape[-1:], dtype=np.uint8)
    return CandidateSet(bits, add_metric(pm, penalty, quant)[..., None])


def decode_repetition(alpha, pm=0, quant: QuantSpec | None = None) -> CandidateSet:
    """Exact: candidate 0 is all-zero, candidate 1 all-one."""
    alpha = np.asarray(alpha)
    pen0 = _ordered_sum(np.where(alpha < 0, -alpha, 0))
    pen1 = _ordered_sum(np.where(alpha > 0, alpha, 0))
    shape = alpha.shape[:-1] + (2,) + alpha.shape[-1:]
    bits = np.zeros(shape, dtype=np.uint8)
    bits[..., 1, :] = 1
    pm = np.asarray(pm)
    return CandidateSet(bits, np.stack([add_metric(pm, pen0, quant), add_metric(pm, pen1, quant)], axis=-1))


@lru_cache(maxsize=None)
def _subset_table(t: int) -> np.ndarray:
    """Row ``s`` flags the members of subset ``s`` (bit i <-> i-th least reliable)."""
    s = np.arange(1 << t)
    return ((s[:, None] >> np.arange(t)) & 1).astype(np.int64)


def rate1_flip_positions(L: int, length: int) -> int:
    return min(length, math.ceil(math.log2(L)) + 1 if L > 1 else 1)


def rate1_candidate_count(L: int, length: int) -> int:
    return min(L, 1 << rate1_flip_positions(L, length))


def spc_flip_positions(length: int) -> int:
    return min(4, length)


def spc_candidate_count(L: int, length: int) -> int:
    return min(L, 1 << (spc_flip_positions(length) - 1))


def _flip_candidates(alpha, pm, t: int, count: int, parity: bool, quant) -> CandidateSet:
    alpha = np.asarray(alpha)
    n = alpha.shape[-1]
    mag = np.abs(alpha)
    hard = hard_decision(alpha)
    pos = np.argsort(mag, axis=-1, kind="stable")[..., :t]
    low = np.take_along_axis(mag, pos, axis=-1)
    table = _subset_table(t)
    penalty = np.zeros(alpha.shape[:-1] + (table.shape[0],), dtype=mag.dtype)
    for i in range(t):
        penalty = penalty + table[:, i] * low[..., i:i + 1]
    key = penalty.astype(float)
    if parity:
        odd = (hard.sum(axis=-1) & 1)[..., None]
        key = np.where((table.sum(axis=1) & 1) == odd, key, np.inf)
    chosen = np.argsort(key, axis=-1, kind="stable")[..., :count]
    flips = table[chosen]                                  # (..., C, t)
    onehot = (pos[..., :, None] == np.arange(n)).astype(np.int64)   # (..., t, n)
    flip_bits = (flips @ onehot) & 1
    bits = (hard[..., None, :] ^ flip_bits).astype(np.uint8)
    pen = np.take_along_axis(penalty, chosen, axis=-1)
    return CandidateSet(bits, add_metric(np.asarray(pm)[..., None], pen, quant))


def decode_rate1(alpha, pm=0, L: int = 2, quant: QuantSpec | None = None) -> CandidateSet:
    """Hard decision plus flips among the few least-reliable positions.

    Subsets of the ``ceil(log2 L) + 1`` least-reliable positions are ranked by
    their flip cost and the ``L`` cheapest kept; for ``L = 2`` this yields the
    hard decision and the single least-reliable flip.
    """
    alpha = np.asarray(alpha)
    n = alpha.shape[-1]
    t = rate1_flip_positions(L, n)
    return _flip_candidates(alpha, pm, t, rate1_candidate_count(L, n), False, quant)


def decode_spc(alpha, pm=0, L: int = 2, quant: QuantSpec | None = None) -> CandidateSet:
    """Even-parity candidates built from flips among the 4 least-reliable positions.

    Candidate 0 is the Wagner decision: the hard decision, with the weakest
    position flipped when its parity is odd.
    """
    alpha = np.asarray(alpha)
    n = alpha.shape[-1]
    return _flip_candidates(alpha, pm, spc_flip_positions(n), spc_candidate_count(L, n), True, quant)


def decode_node(kind, alpha, pm, L: int, quant: QuantSpec | None = None) -> CandidateSet:
    from ..tree import NodeKind

    if kind is NodeKind.RATE0:
        return decode_rate0(alpha, pm, quant)
    if kind is NodeKind.REPETITION:
        return decode_repetition(alpha, pm, quant)
    if kind is NodeKind.RATE1:
        return decode_rate1(alpha, pm, L, quant)
    if kind is NodeKind.SPC:
        return decode_spc(alpha, pm, L, quant)
    raise InvalidParametersError(f"no constituent decoder for {kind}")


def candidate_count(kind, L: int, length: int) -> int:
    from ..tree import NodeKind

    return {
        NodeKind.RATE0: 1,
        NodeKind.REPETITION: 2,
        NodeKind.RATE1: rate1_candidate_count(L, length),
        NodeKind.SPC: spc_candidate_count(L, length),
    }[kind]


def sort_select(pm, L: int, valid=None, quant: QuantSpec | None = None):
    """Keep the ``min(L, M)`` smallest of the (..., M) candidate metrics.

    Ties keep their input order, which is (parent, candidate) when callers
    flatten candidate sets lane-major. Invalid candidates sort last. In
    fixed-point mode the survivors are normalised so the best one is zero.

    Returns ``(index, pm, valid)`` of the survivors.
    """
    pm = np.asarray(pm)
    valid = np.ones(pm.shape, dtype=bool) if valid is None else np.asarray(valid, dtype=bool)
    if pm.shape[-1] < 1:
        raise InvalidParametersError("sort_select needs at least one candidate")
    keep = min(L, pm.shape[-1])
    key = np.where(valid, pm.astype(float), np.inf)
    index = np.argsort(key, axis=-1, kind="stable")[..., :keep]
    out_pm = np.take_along_axis(pm, index, axis=-1)
    out_valid = np.take_along_axis(valid, index, axis=-1)
    if quant is not None:
        out_pm = normalize_array(out_pm.astype(np.int64), out_valid).astype(np.int32)
    return index, out_pm, out_valid
