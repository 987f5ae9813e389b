"""Monte Carlo frame/bit error-rate sweeps."""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache

from .channel import generate_frames
from .core import CONSTRUCTION_METHODS, DEFAULT_DESIGN_SNR_DB, PolarCode
from .decoders import DecoderConfig, fast_ssc_list_decode, sc_decode_codeword, scl_decode
from .errors import ConfigurationError
from .quantize import QuantSpec
from .tree import build_decoder_tree

DECODERS = ("sc", "scl", "ca-scl", "fast-ssc-list")
CSV_COLUMNS = ("ebn0_db", "frames", "frame_errors", "bit_errors", "fer", "ber")


@dataclass
class SimJob:
    """One sweep. ``k`` is the polar code dimension; ``crc_len`` of its bits carry the CRC."""

    N: int = 512
    k: int = 427
    design_snr_db: float = DEFAULT_DESIGN_SNR_DB
    crc_len: int = 0
    decoder: str = "scl"
    list_size: int = 2
    quant: str | None = None
    snrs: list = field(default_factory=lambda: [4.0])
    min_errors: int = 100
    max_frames: int = 10_000_000
    seed: int = 0
    workers: int = 1
    batch_size: int = 2000
    construction: str = "ga"

    def validate(self):
        if self.decoder not in DECODERS:
            raise ConfigurationError(f"unknown decoder {self.decoder!r}; choose from {', '.join(DECODERS)}")
        if self.decoder == "ca-scl" and self.crc_len == 0:
            raise ConfigurationError("ca-scl needs a CRC (crc_len > 0)")
        if self.construction not in CONSTRUCTION_METHODS:
            raise ConfigurationError(f"unknown construction {self.construction!r}")
        if self.min_errors < 1 or self.max_frames < 1 or not self.snrs:
            raise ConfigurationError("need min_errors >= 1, max_frames >= 1 and at least one SNR")
        if not 0 <= self.crc_len < self.k <= self.N:
            raise ConfigurationError(f"need 0 <= crc_len < k <= N, got crc_len={self.crc_len}, k={self.k}")
        if self.list_size < 1 or self.workers < 1 or self.batch_size < 1:
            raise ConfigurationError("list size, workers and batch size must be positive")
        self.quant_spec()

    def quant_spec(self) -> QuantSpec | None:
        return QuantSpec.parse(self.quant) if self.quant else None

    def code(self) -> PolarCode:
        return _construct(self.N, self.k, self.crc_len, self.design_snr_db, self.construction)


@lru_cache(maxsize=16)
def _construct(N, k, crc_len, design_snr_db, method) -> PolarCode:
    return PolarCode.construct(N, k, crc_len, design_snr_db, method)


@dataclass
class SweepPoint:
    ebn0_db: float
    frames: int
    frame_errors: int
    bit_errors: int
    fer: float
    ber: float
    wall_time: float = 0.0


@dataclass
class SweepResult:
    points: list[SweepPoint] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"points": [asdict(p) for p in self.points]}


def make_decoder(job: SimJob, code: PolarCode):
    """Callable mapping (B, N) LLRs to (B, N) decided codewords."""
    quant = job.quant_spec()
    if job.decoder == "sc":
        return lambda llrs: sc_decode_codeword(llrs, code, quant)
    use_crc = job.decoder == "ca-scl" or (job.decoder == "fast-ssc-list" and code.crc_len > 0)
    config = DecoderConfig(job.list_size, use_crc, quant)
    if job.decoder == "fast-ssc-list":
        tree = build_decoder_tree(code, config.caps)
        return lambda llrs: fast_ssc_list_decode(tree, llrs, config).select(code, use_crc)
    return lambda llrs: scl_decode(llrs, code, config).select(code, use_crc)


def _run_block(args):
    job, ebn0, start, count = args
    code = job.code()
    decode = make_decoder(job, code)
    frames = generate_frames(code, ebn0, job.seed, start, count)
    decided = decode(frames.llrs)
    payload_hat = decided[:, code.info_positions[: code.payload_len]]
    bit_err = (payload_hat != frames.payload).sum(axis=1)
    return bit_err


def _sweep_point(job: SimJob, ebn0: float, pool) -> SweepPoint:
    t0 = time.perf_counter()
    frames = frame_errors = bit_errors = 0
    next_start = 0
    wave = max(1, job.workers)
    while frames < job.max_frames and frame_errors < job.min_errors:
        blocks = []
        for _ in range(wave):
            count = min(job.batch_size, job.max_frames - next_start)
            if count <= 0:
                break
            blocks.append((job, ebn0, next_start, count))
            next_start += count
        results = pool.map(_run_block, blocks) if pool else map(_run_block, blocks)
        for bit_err in results:
            for e in bit_err:
                if frames >= job.max_frames or frame_errors >= job.min_errors:
                    break
                frames += 1
                if e:
                    frame_errors += 1
                    bit_errors += int(e)
    payload = job.k - job.crc_len
    return SweepPoint(ebn0, frames, frame_errors, bit_errors,
                      frame_errors / frames, bit_errors / (frames * payload),
                      time.perf_counter() - t0)


def run_sweep(job: SimJob) -> SweepResult:
    """Simulate every SNR point until ``min_errors`` frame errors or ``max_frames``.

    Frames are regenerated from (seed, frame index) and consumed in index
    order, so the result does not depend on ``workers``.
    """
    job.validate()
    result = SweepResult()
    if job.workers > 1:
        with ProcessPoolExecutor(job.workers) as pool:
            for snr in job.snrs:
                result.points.append(_sweep_point(job, float(snr), pool))
    else:
        for snr in job.snrs:
            result.points.append(_sweep_point(job, float(snr), None))
    return result


def emit_csv(result: SweepResult, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for p in result.points:
            writer.writerow([p.ebn0_db, p.frames, p.frame_errors, p.bit_errors,
                             repr(p.fer), repr(p.ber)])


def read_csv(path) -> SweepResult:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return SweepResult([
        SweepPoint(float(r["ebn0_db"]), int(r["frames"]), int(r["frame_errors"]),
                   int(r["bit_errors"]), float(r["fer"]), float(r["ber"]))
        for r in rows
    ])


def snr_at_fer(points: list[SweepPoint], target: float) -> float:
    """Eb/N0 where log10(FER) crosses ``target``, by linear interpolation.

    Returns nan when the sweep does not bracket the target.
    """
    pts = sorted(points, key=lambda p: p.ebn0_db)
    for a, b in zip(pts, pts[1:]):
        if a.fer >= target >= b.fer and b.fer > 0:
            la, lb, lt = math.log10(a.fer), math.log10(b.fer), math.log10(target)
            if la == lb:
                return a.ebn0_db
            return a.ebn0_db + (la - lt) / (la - lb) * (b.ebn0_db - a.ebn0_db)
    return float("nan")


def parse_snr_range(text: str) -> list[float]:
    """``"a:b:step"`` (inclusive), a comma list, or ``"inf"``."""
    text = text.strip()
    if ":" in text:
        a, b, step = (float(x) for x in text.split(":"))
        if step <= 0:
            raise ConfigurationError("SNR step must be positive")
        count = int(math.floor((b - a) / step + 1e-9)) + 1
        return [round(a + i * step, 10) for i in range(count)]
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise ConfigurationError(f"bad SNR specification {text!r}") from None


def wilson_interval(errors: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    p = errors / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def two_proportion_z(e1: int, n1: int, e2: int, n2: int) -> float:
    """z statistic for p1 - p2 with a pooled variance estimate."""
    pooled = (e1 + e2) / (n1 + n2)
    se = math.sqrt(pooled * (1 - pooled) * (1 / n1 + 1 / n2))
    return 0.0 if se == 0 else (e1 / n1 - e2 / n2) / se

