"""Polar code construction, the Arikan transform and systematic encoding.

Everything here uses the natural-order transform ``x = u F^{(x)n}`` with
``F = [[1, 0], [1, 1]]``; no bit-reversal permutation is applied anywhere in
the package.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidParametersError

CONSTRUCTION_METHODS = ("ga", "bhattacharyya")
# design point near where the default (512, 427) code reaches FER 1e-3
DEFAULT_DESIGN_SNR_DB = 4.5


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


_HERMITE_T, _HERMITE_W = np.polynomial.hermite.hermgauss(96)


def _log_phi(x: np.ndarray) -> np.ndarray:
    """Log of the GA ``phi`` function.

    Below 10 the defining expectation ``1 - E[tanh(u/2)]``, ``u ~ N(x, 2x)``,
    is evaluated by Gauss-Hermite quadrature; above it Chung's asymptotic
    form is used, which stays accurate where ``phi`` underflows.
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    small = (x > 0) & (x < 10)
    large = x >= 10
    xs = x[small][:, None]
    mean_tanh = np.tanh((xs + 2.0 * np.sqrt(xs) * _HERMITE_T) / 2.0) @ _HERMITE_W / np.sqrt(np.pi)
    out[small] = np.log1p(-mean_tanh)
    xl = x[large]
    out[large] = 0.5 * np.log(np.pi / xl) - xl / 4 + np.log1p(-10 / (7 * xl))
    return out


def _phi_inverse_log(log_y: np.ndarray, iterations: int = 200) -> np.ndarray:
    # bisection in the log domain keeps precision when phi underflows
    log_y = np.asarray(log_y, dtype=float)
    lo = np.zeros_like(log_y)
    hi = np.maximum(20.0, -8.0 * log_y + 20.0)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        above = _log_phi(mid) > log_y
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    return 0.5 * (lo + hi)


def ga_means(N: int, channel_mean: float) -> np.ndarray:
    """Mean LLR of each synthetic channel under Gaussian approximation.

    Index ``i`` follows the natural-order transform: the most significant bit
    of ``i`` selects the first (outermost) channel combining step.
    """
    means = np.array([float(channel_mean)])
    while means.size < N:
        log_p = _log_phi(means)
        p = np.exp(log_p)
        minus = _phi_inverse_log(log_p + np.log(2.0 - p))
        minus = np.where(means <= 0, 0.0, minus)
        nxt = np.empty(2 * means.size)
        nxt[0::2] = minus
        nxt[1::2] = 2.0 * means
        means = nxt
    return means


def bhattacharyya_parameters(N: int, z0: float) -> np.ndarray:
    """Bhattacharyya parameters of the synthetic channels (BEC recursion)."""
    z = np.array([float(z0)])
    while z.size < N:
        nxt = np.empty(2 * z.size)
        nxt[0::2] = 2 * z - z * z
        nxt[1::2] = z * z
        z = nxt
    return z


def construct_frozen_set(
    N: int,
    k: int,
    design_snr_db: float = DEFAULT_DESIGN_SNR_DB,
    method: str = "ga",
    erasure_prob: float | None = None,
) -> np.ndarray:
    """Return a boolean frozen mask (True = frozen) with ``N - k`` frozen bits.

    Parameters
    ----------
    N : int
        Block length, a power of two.
    k : int
        Number of unfrozen positions.
    design_snr_db : float
        Design Eb/N0 in dB at rate ``k/N``.
    method : {"ga", "bhattacharyya"}
        Gaussian approximation for AWGN, or the BEC Bhattacharyya recursion.
    erasure_prob : float, optional
        Only for ``"bhattacharyya"``: use this BEC erasure probability instead
        of the AWGN-derived ``exp(-Es/N0)``.
    """
    if not is_power_of_two(N):
        raise InvalidParametersError(f"N must be a power of two, got {N}")
    if not 0 < k <= N:
        raise InvalidParametersError(f"need 0 < k <= N, got k={k}, N={N}")
    esn0 = (k / N) * 10 ** (design_snr_db / 10)
    if method == "ga":
        reliability = ga_means(N, 4.0 * esn0)
    elif method == "bhattacharyya":
        z0 = np.exp(-esn0) if erasure_prob is None else erasure_prob
        reliability = -bhattacharyya_parameters(N, z0)
    else:
        raise InvalidParametersError(f"unknown construction method {method!r}")
    # worst first; ties resolved towards freezing the lower index
    order = np.argsort(reliability, kind="stable")
    mask = np.zeros(N, dtype=bool)
    mask[order[: N - k]] = True
    return mask


def polar_transform(bits) -> np.ndarray:
    """Apply the n-fold Arikan kernel along the last axis (an involution)."""
    x = np.array(bits, dtype=np.uint8, copy=True)
    N = x.shape[-1]
    if not is_power_of_two(N):
        raise InvalidParametersError(f"length must be a power of two, got {N}")
    lead = x.shape[:-1]
    h = 1
    while h < N:
        view = x.reshape(*lead, N // (2 * h), 2, h)
        view[..., 0, :] ^= view[..., 1, :]
        h *= 2
    return x


def _gf2_inverse(m: np.ndarray) -> np.ndarray:
    n = m.shape[0]
    aug = np.concatenate([m.astype(np.uint8) & 1, np.eye(n, dtype=np.uint8)], axis=1)
    for col in range(n):
        pivot = col + int(np.argmax(aug[col:, col]))
        if not aug[pivot, col]:
            raise InvalidParametersError("matrix is singular over GF(2)")
        if pivot != col:
            aug[[col, pivot]] = aug[[pivot, col]]
        rows = np.nonzero(aug[:, col])[0]
        rows = rows[rows != col]
        aug[rows] ^= aug[col]
    return aug[:, n:]


@dataclass(eq=False)
class PolarCode:
    """An (N, k) polar code; ``k`` counts CRC bits when ``crc_len > 0``."""

    N: int
    k: int
    frozen_mask: np.ndarray
    crc_len: int = 0
    design_snr_db: float = DEFAULT_DESIGN_SNR_DB
    method: str = "ga"
    info_positions: np.ndarray = field(init=False, repr=False)
    _sys_inverse: np.ndarray | None = field(init=False, repr=False, default=None)

    def __post_init__(self):
        self.frozen_mask = np.asarray(self.frozen_mask, dtype=bool)
        if not is_power_of_two(self.N) or self.frozen_mask.shape != (self.N,):
            raise InvalidParametersError("frozen mask length must equal a power-of-two N")
        if int(self.frozen_mask.sum()) != self.N - self.k:
            raise InvalidParametersError(
                f"mask freezes {int(self.frozen_mask.sum())} bits, expected {self.N - self.k}"
            )
        if self.crc_len < 0 or (self.crc_len > 0 and self.crc_len >= self.k):
            raise InvalidParametersError(f"crc_len={self.crc_len} must be < k={self.k}")
        self.info_positions = np.flatnonzero(~self.frozen_mask)
        self._sys_inverse = None
        if not self._encode_mask_encode_valid():
            g = polar_transform(np.eye(self.N, dtype=np.uint8))
            a = self.info_positions
            self._sys_inverse = _gf2_inverse(g[np.ix_(a, a)])

    @classmethod
    def construct(cls, N: int, k: int, crc_len: int = 0,
                  design_snr_db: float = DEFAULT_DESIGN_SNR_DB,
                  method: str = "ga") -> "PolarCode":
        mask = construct_frozen_set(N, k, design_snr_db, method)
        return cls(N, k, mask, crc_len, design_snr_db, method)

    @property
    def n(self) -> int:
        return self.N.bit_length() - 1

    @property
    def payload_len(self) -> int:
        """Information bits excluding the CRC."""
        return self.k - self.crc_len

    @property
    def rate(self) -> float:
        return self.payload_len / self.N

    def _encode_mask_encode_valid(self) -> bool:
        # holds iff the info-set submatrix of the transform is its own inverse
        g = polar_transform(np.eye(self.N, dtype=np.uint8))
        a = self.info_positions
        sub = g[np.ix_(a, a)].astype(np.int64)
        return bool(np.array_equal((sub @ sub) & 1, np.eye(a.size, dtype=np.int64)))

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "k": self.k,
            "crc_len": self.crc_len,
            "design_snr_db": self.design_snr_db,
            "method": self.method,
            "frozen_positions": np.flatnonzero(self.frozen_mask).tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PolarCode":
        mask = np.zeros(obj["N"], dtype=bool)
        mask[obj["frozen_positions"]] = True
        return cls(obj["N"], obj["k"], mask, obj.get("crc_len", 0),
                   obj.get("design_snr_db", 0.0), obj.get("method", "ga"))


def save_code(code: PolarCode, path) -> None:
    Path(path).write_text(json.dumps(code.to_json(), indent=1))


def load_code(path) -> PolarCode:
    return PolarCode.from_json(json.loads(Path(path).read_text()))


def encode_systematic(code: PolarCode, info) -> np.ndarray:
    """Systematic encoding; ``info`` is (..., k) with any CRC already appended.

    The returned codeword carries ``info`` verbatim at ``code.info_positions``.
    """
    info = np.asarray(info, dtype=np.uint8)
    if info.shape[-1] != code.k:
        raise InvalidParametersError(f"info length {info.shape[-1]} != k={code.k}")
    v = np.zeros(info.shape[:-1] + (code.N,), dtype=np.uint8)
    if code._sys_inverse is None:
        v[..., code.info_positions] = info
        u = polar_transform(v)
        u[..., code.frozen_mask] = 0
    else:
        v[..., code.info_positions] = (info.astype(np.int64) @ code._sys_inverse) & 1
        u = v
    return polar_transform(u)
