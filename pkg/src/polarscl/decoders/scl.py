"""Successive-cancellation list decoding and CRC-aided candidate selection."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import PolarCode
from ..crc import crc_check
from ..errors import InvalidParametersError
from ..quantize import QuantSpec
from ..tree import NodeCaps
from .primitives import add_metric, combine, f_minsum, g_func, sort_select
from .sc import prepare_llrs


@dataclass(frozen=True)
class DecoderConfig:
    list_size: int = 2
    use_crc: bool = False
    quant: QuantSpec | None = None
    caps: NodeCaps = field(default_factory=NodeCaps)

    def __post_init__(self):
        if self.list_size < 1:
            raise InvalidParametersError(f"list size must be >= 1, got {self.list_size}")


@dataclass
class DecodingPath:
    codeword: np.ndarray
    pm: float
    source_index: int


@dataclass
class ListResult:
    """Surviving paths of a batch, each row sorted by metric (ascending)."""

    codewords: np.ndarray   # (B, L, N)
    pm: np.ndarray          # (B, L)
    valid: np.ndarray       # (B, L)
    source: np.ndarray      # (B, L) lane each survivor occupied before ranking

    @classmethod
    def ranked(cls, codewords, pm, valid) -> "ListResult":
        key = np.where(valid, pm.astype(float), np.inf)
        order = np.argsort(key, axis=-1, kind="stable")
        take = lambda a: np.take_along_axis(a, order, axis=1)  # noqa: E731
        return cls(np.take_along_axis(codewords, order[..., None], axis=1),
                   take(pm), take(valid), order)

    def best(self) -> np.ndarray:
        return self.codewords[:, 0]

    def paths(self, frame: int = 0) -> list[DecodingPath]:
        return [DecodingPath(self.codewords[frame, i], self.pm[frame, i].item(), int(self.source[frame, i]))
                for i in range(self.pm.shape[1]) if self.valid[frame, i]]

    def select(self, code: PolarCode, use_crc: bool) -> np.ndarray:
        """Decided codeword per frame: pm-best, or CRC-aided when requested."""
        if not use_crc or code.crc_len == 0:
            return self.best()
        info = self.codewords[..., code.info_positions]
        ok = crc_check(info, code.crc_len) & self.valid
        first = np.where(ok.any(axis=1), np.argmax(ok, axis=1), 0)
        return self.codewords[np.arange(len(first)), first]


def ca_scl_select(candidates, code: PolarCode) -> np.ndarray:
    """Lowest-metric candidate whose CRC checks, else the lowest-metric one.

    ``candidates`` is a list of ``(codeword, pm)`` sorted by pm ascending.
    """
    if not candidates:
        raise InvalidParametersError("no candidates to select from")
    for codeword, _ in candidates:
        if crc_check(np.asarray(codeword)[code.info_positions], code.crc_len):
            return np.asarray(codeword)
    return np.asarray(candidates[0][0])


def _gather(a: np.ndarray, perm: np.ndarray | None) -> np.ndarray:
    if perm is None:
        return a
    if a.ndim == 2:
        return np.take_along_axis(a, perm, axis=1)
    return np.take_along_axis(a, perm[..., None], axis=1)


def _compose(first, second):
    """Lane map of ``first`` followed by ``second`` (None = identity)."""
    if first is None:
        return second
    if second is None:
        return first
    return np.take_along_axis(first, second, axis=1)


class ListEngine:
    """Depth-first list decoder over (B, L, n) LLR blocks.

    Recursion returns the node's bit estimates aligned with the lane order at
    exit, plus the map from exit lanes to entry lanes; callers use that map to
    re-index anything they kept from before the call, which is what the
    post-sort multiplexers do in hardware.
    """

    def __init__(self, L: int, quant: QuantSpec | None):
        self.L = L
        self.quant = quant

    def start(self, llrs) -> np.ndarray:
        alpha = prepare_llrs(llrs, self.quant)
        if alpha.ndim == 1:
            alpha = alpha[None]
        B, N = alpha.shape
        self.pm = np.zeros((B, self.L), dtype=float if self.quant is None else np.int32)
        self.valid = np.zeros((B, self.L), dtype=bool)
        self.valid[:, 0] = True
        return np.repeat(alpha[:, None, :], self.L, axis=1)

    def select(self, cand_bits: np.ndarray, cand_pm: np.ndarray):
        """Run the L-best sorter over (B, L, C, n) candidates; return (bits, parent)."""
        B, L, C, n = cand_bits.shape
        cand_valid = np.repeat(self.valid[:, :, None], C, axis=2).reshape(B, L * C)
        index, pm, valid = sort_select(cand_pm.reshape(B, L * C), L, cand_valid, self.quant)
        self.pm, self.valid = pm, valid
        parent = index // C
        bits = cand_bits.reshape(B, L * C, n)
        return np.take_along_axis(bits, index[..., None], axis=1), parent

    def branch(self, node, alpha, recurse):
        h = alpha.shape[-1] // 2
        q = self.quant
        beta_l, p1 = recurse(node, 0, f_minsum(alpha[..., :h], alpha[..., h:], q))
        alpha = _gather(alpha, p1)
        beta_r, p2 = recurse(node, 1, g_func(alpha[..., :h], alpha[..., h:], beta_l, q))
        return combine(_gather(beta_l, p2), beta_r), _compose(p1, p2)


class _BitLevelSCL(ListEngine):
    def __init__(self, code: PolarCode, L: int, quant):
        super().__init__(L, quant)
        self.frozen = code.frozen_mask

    def decode(self, llrs) -> ListResult:
        alpha = self.start(llrs)
        beta, _ = self.node(0, alpha)
        return ListResult.ranked(beta, self.pm, self.valid)

    def _child(self, lo, side, alpha):
        return self.node(lo + side * alpha.shape[-1], alpha)

    def node(self, lo: int, alpha):
        if alpha.shape[-1] > 1:
            return self.branch(lo, alpha, self._child)
        a = alpha[..., 0]
        pen0 = np.where(a < 0, -a, 0)
        if self.frozen[lo]:
            self.pm = add_metric(self.pm, pen0, self.quant)
            return np.zeros(alpha.shape, dtype=np.uint8), None
        pen1 = np.where(a > 0, a, 0)
        cand_pm = np.stack([add_metric(self.pm, pen0, self.quant),
                            add_metric(self.pm, pen1, self.quant)], axis=-1)
        cand_bits = np.zeros(alpha.shape[:2] + (2, 1), dtype=np.uint8)
        cand_bits[:, :, 1] = 1
        return self.select(cand_bits, cand_pm)


def scl_decode(llrs, code: PolarCode, config: DecoderConfig | None = None) -> ListResult:
    """Bit-by-bit SCL: fork at every unfrozen bit, keep the L best of 2L.

    ``llrs`` is (N,) or (B, N); the result is always batched.
    """
    config = config or DecoderConfig()
    return _BitLevelSCL(code, config.list_size, config.quant).decode(llrs)
