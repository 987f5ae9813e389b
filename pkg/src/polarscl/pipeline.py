"""Unrolled, pipelined Fast-SSC-List datapath: compile, time, cost and simulate.

The compiler instantiates one operation per F/G/Combine/node-decoder/sorter/
multiplexer of the unrolled decoder, per list lane where the datapath is
per-lane, and schedules them as soon as their inputs are registered. Lanes
that cannot hold a surviving path yet (before enough forks happened) are not
instantiated. A frame enters every ``I`` cycles; a value that must live
``span`` cycles therefore needs ``ceil(span / I)`` register copies.

The cycle-accurate simulator executes exactly these operations on a register
file and raises if any frame reads a register another frame has overwritten.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import PolarCode
from .decoders.primitives import (
    add_metric,
    candidate_count,
    combine,
    decode_node,
    f_minsum,
    g_func,
    sort_select,
)
from .decoders.sc import prepare_llrs
from .decoders.scl import ListResult
from .errors import InvalidParametersError, PipelineContractError, RegisterCorruptionError
from .quantize import DEFAULT_QUANT, QuantSpec
from .tree import DecoderTree, Node, NodeKind

DEFAULT_COSTS = {
    "F": 1, "G": 1, "Combine": 1, "Sort": 1, "Mux": 1, "Load": 1, "Output": 1,
    "Rate0": 1, "Rate1": 1, "Repetition": 1, "SPC": 2,
}


@dataclass
class PipelineConfig:
    initiation_interval: int = 20
    clock_hz: float = 468e6
    mode: str = "partial"
    costs: dict = field(default_factory=lambda: dict(DEFAULT_COSTS))
    preemptive_g: bool = True

    def __post_init__(self):
        if self.initiation_interval < 1:
            raise InvalidParametersError("initiation interval must be >= 1")
        if self.clock_hz <= 0:
            raise InvalidParametersError("clock frequency must be positive")
        if self.mode not in ("deep", "partial"):
            raise InvalidParametersError(f"unknown pipelining mode {self.mode!r}")
        self.costs = {**DEFAULT_COSTS, **self.costs}
        if any(v < 1 for v in self.costs.values()):
            raise InvalidParametersError("cycle costs must be >= 1")

    @property
    def interval(self) -> int:
        """Cycles between frames: 1 when deeply pipelined."""
        return 1 if self.mode == "deep" else self.initiation_interval


@dataclass
class ScheduleOp:
    id: int
    kind: str
    width: int
    start_cycle: int
    duration_cycles: int
    inputs: tuple
    node: str
    lane: int | None = None
    params: dict = field(default_factory=dict)

    @property
    def ready(self) -> int:
        return self.start_cycle + self.duration_cycles


@dataclass
class SortState:
    pm: np.ndarray | None
    valid: np.ndarray | None
    parent: np.ndarray
    cand: np.ndarray | None


@dataclass
class _Fused:
    bits: np.ndarray
    state: SortState


def _bits(v):
    return v.bits if isinstance(v, _Fused) else v


def _state(v):
    return v.state if isinstance(v, _Fused) else v


@dataclass
class Schedule:
    ops: list[ScheduleOp]
    tree: DecoderTree
    L: int
    config: PipelineConfig
    quant: QuantSpec | None = None
    code: PolarCode | None = None
    use_crc: bool = False

    def __post_init__(self):
        self.consumers = defaultdict(list)
        for op in self.ops:
            for i in op.inputs:
                self.consumers[i].append(op.id)

    @property
    def latency_cycles(self) -> int:
        return max((op.ready for op in self.ops if op.kind == "Output"), default=0)

    def span(self, op_id: int) -> int:
        """Cycles a value must stay registered (at least one boundary)."""
        op = self.ops[op_id]
        last = max((self.ops[c].start_cycle for c in self.consumers[op_id]), default=op.ready)
        return max(1, last - op.ready + 1)

    def copies(self, op_id: int, interval: int | None = None) -> int:
        return math.ceil(self.span(op_id) / (interval or self.config.interval))

    def to_json(self) -> dict:
        return {
            "L": self.L,
            "N": self.tree.N,
            "latency_cycles": self.latency_cycles,
            "config": asdict(self.config),
            "ops": [
                {**asdict(op), "inputs": list(op.inputs)} for op in self.ops
            ],
        }


class _Compiler:
    def __init__(self, L: int, config: PipelineConfig):
        self.L = L
        self.config = config
        self.ops: list[ScheduleOp] = []
        self.pm_ref: int | None = None

    def add(self, kind, inputs, width, node, lane=None, cost_key=None, **params) -> int:
        inputs = tuple(inputs)
        start = max((self.ops[i].ready for i in inputs), default=0)
        op = ScheduleOp(len(self.ops), kind, width, start,
                        self.config.costs[cost_key or kind], inputs, node, lane, params)
        self.ops.append(op)
        return op.id

    def with_pm(self, refs):
        return list(refs) + ([self.pm_ref] if self.pm_ref is not None else [])

    def leaf(self, node: Node, label: str, alpha):
        a_in, n = len(alpha), node.length
        c = candidate_count(node.kind, self.L, n)
        a_out = min(self.L, a_in * c)
        kind = node.kind.value
        if a_in * c == 1:
            d = self.add("NodeDecode", self.with_pm([alpha[0]]), n, label, 0,
                         cost_key=kind, node_kind=kind, fused=True, candidates=1)
            self.pm_ref = d
            return [d], None, 1
        decs = [self.add("NodeDecode", [alpha[l]], n, label, l, cost_key=kind,
                         node_kind=kind, candidates=c) for l in range(a_in)]
        s = self.add("Sort", self.with_pm(decs), a_in * c, label, lanes_in=a_in, candidates=c)
        self.pm_ref = s
        betas = [self.add("Mux", decs + [s], n, label, l, role="beta") for l in range(a_out)]
        return betas, s, a_out

    def node(self, node: Node, label: str, alpha):
        if node.is_leaf:
            return self.leaf(node, label, alpha)
        a_in, h = len(alpha), node.length // 2
        left, right = node.children
        f = [self.add("F", [alpha[l]], h, label, l) for l in range(a_in)]
        pre = (self.config.preemptive_g and left.kind is NodeKind.REPETITION
               and 2 * a_in <= self.L)
        if pre:
            gpre = [self.add("G", [alpha[p]], h, label, p, preemptive=True, bit=b)
                    for p in range(a_in) for b in (0, 1)]
        bl, p1, a_mid = self.node(left, label + "0", f)
        if pre:
            g = [self.add("Mux", gpre + [p1], h, label, l, role="gpre") for l in range(a_mid)]
        else:
            if a_in == 1:
                sel = [alpha[0]] * a_mid
            else:
                sel = [self.add("Mux", list(alpha) + [p1], node.length, label, l, role="alpha")
                       for l in range(a_mid)]
            g = [self.add("G", [sel[l], bl[l]], h, label, l) for l in range(a_mid)]
        br, p2, a_out = self.node(right, label + "1", g)
        if a_mid == 1:
            blsel = [bl[0]] * a_out
        else:
            blsel = [self.add("Mux", list(bl) + [p2], h, label, l, role="beta_left")
                     for l in range(a_out)]
        comb = [self.add("Combine", [blsel[l], br[l]], node.length, label, l) for l in range(a_out)]
        perm = None if a_in == 1 else self.add("Mux", [p1, p2], self.L, label, role="perm")
        return comb, perm, a_out


def unroll_schedule(tree: DecoderTree, L: int, config: PipelineConfig | None = None, *,
                    quant: QuantSpec | None = None, code: PolarCode | None = None,
                    use_crc: bool = False) -> Schedule:
    """Compile ``tree`` into an ASAP-scheduled unrolled datapath for list size ``L``.

    ``quant``, ``code`` and ``use_crc`` only matter for simulation (arithmetic
    and final CRC-aided selection); timing does not depend on them.
    """
    config = config or PipelineConfig()
    if L < 1:
        raise InvalidParametersError("list size must be >= 1")
    comp = _Compiler(L, config)
    load = comp.add("Load", [], tree.N, "r")
    betas, _, _ = comp.node(tree.root, "r", [load])
    comp.add("Output", comp.with_pm(betas), tree.N, "r", lanes=len(betas))
    return Schedule(comp.ops, tree, L, config, quant, code, use_crc)


@dataclass
class PipelineReport:
    N: int
    k: int
    L: int
    mode: str
    initiation_interval: int
    clock_hz: float
    latency_cycles: int
    latency_seconds: float
    coded_throughput_bps: float
    info_throughput_bps: float
    register_bits_estimate: int
    ops_count: int

    def to_json(self) -> dict:
        return asdict(self)

    def table(self) -> str:
        rows = [
            ("Code Length", f"{self.N}"),
            ("Rate", f"{self.k / self.N:.2f}"),
            ("List Size", f"{self.L}"),
            ("Pipelining", f"{self.mode}, I={self.initiation_interval}"),
            ("Frequency (MHz)", f"{self.clock_hz / 1e6:.0f}"),
            ("Latency (cycles)", f"{self.latency_cycles}"),
            ("Latency (us)", f"{self.latency_seconds * 1e6:.2f}"),
            ("Coded T/P (Gbps)", f"{self.coded_throughput_bps / 1e9:.2f}"),
            ("Info T/P (Gbps)", f"{self.info_throughput_bps / 1e9:.2f}"),
            ("Register bits", f"{self.register_bits_estimate}"),
            ("Operations", f"{self.ops_count}"),
        ]
        w = max(len(r[0]) for r in rows)
        return "\n".join(f"{name:<{w}}  {value}" for name, value in rows)


def _value_bits(schedule: Schedule, op: ScheduleOp, quant: QuantSpec) -> int:
    pm_bits = quant.pm_bits
    L = schedule.L
    kind = op.kind
    if kind == "Load":
        return op.width * quant.qc
    if kind in ("F", "G"):
        return op.width * quant.qi
    if kind == "NodeDecode":
        c = op.params["candidates"]
        bits = c * (op.width + pm_bits)
        if op.params.get("fused"):
            bits += L * (pm_bits + 1)
        return bits
    if kind == "Sort":
        sel = max(1, math.ceil(math.log2(max(2, op.width))))
        return L * (pm_bits + 1 + sel)
    if kind == "Mux":
        role = op.params["role"]
        if role in ("alpha", "gpre"):
            return op.width * quant.qi
        if role == "perm":
            return L * max(1, math.ceil(math.log2(max(2, L))))
        return op.width
    return op.width  # Combine, Output: bit vectors


def register_estimate(schedule: Schedule, quant: QuantSpec | None = None, L: int | None = None,
                      interval: int | None = None) -> int:
    """Bits held in pipeline registers: value width times register copies."""
    quant = quant or DEFAULT_QUANT
    if L is not None and L != schedule.L:
        raise InvalidParametersError("schedule was compiled for a different list size")
    return sum(_value_bits(schedule, op, quant) * schedule.copies(op.id, interval)
               for op in schedule.ops)


def report(schedule: Schedule, config: PipelineConfig | None = None, code: PolarCode | None = None,
           quant: QuantSpec | None = None) -> PipelineReport:
    if not schedule.ops:
        raise InvalidParametersError("empty schedule")
    config = config or schedule.config
    code = code or schedule.code
    N = schedule.tree.N
    k = code.payload_len if code is not None else int((~schedule.tree.frozen_mask).sum())
    interval = config.interval
    lat = schedule.latency_cycles
    return PipelineReport(
        N=N, k=k, L=schedule.L, mode=config.mode, initiation_interval=interval,
        clock_hz=config.clock_hz, latency_cycles=lat, latency_seconds=lat / config.clock_hz,
        coded_throughput_bps=N * config.clock_hz / interval,
        info_throughput_bps=k * config.clock_hz / interval,
        register_bits_estimate=register_estimate(schedule, quant or schedule.quant, interval=interval),
        ops_count=len(schedule.ops),
    )


class _Evaluator:
    def __init__(self, schedule: Schedule):
        self.s = schedule
        self.q = schedule.quant
        L = schedule.L
        pm0 = np.zeros(L, dtype=float if self.q is None else np.int32)
        valid0 = np.zeros(L, dtype=bool)
        valid0[0] = True
        self.initial = SortState(pm0, valid0, np.arange(L), np.zeros(L, dtype=np.int64))

    def _pad(self, index, pm, valid, c):
        L = self.s.L
        parent = np.zeros(L, dtype=np.int64)
        cand = np.zeros(L, dtype=np.int64)
        out_pm = np.zeros(L, dtype=pm.dtype)
        out_valid = np.zeros(L, dtype=bool)
        m = index.size
        parent[:m], cand[:m] = index // c, index % c
        out_pm[:m], out_valid[:m] = pm, valid
        return SortState(out_pm, out_valid, parent, cand)

    def _select(self, pens, state, a_in):
        c = pens[0].size
        cand = np.stack([add_metric(state.pm[l], pens[l], self.q) for l in range(a_in)])
        valid = np.repeat(state.valid[:a_in], c)
        index, pm, ok = sort_select(cand.reshape(-1), self.s.L, valid, self.q)
        return self._pad(index, pm, ok, c)

    def __call__(self, op: ScheduleOp, args: list):
        q, kind, p = self.q, op.kind, op.params
        if kind in ("F", "G"):
            a = args[0]
            h = a.size // 2
            if kind == "F":
                return f_minsum(a[:h], a[h:], q)
            u = p["bit"] if p.get("preemptive") else _bits(args[1])
            return g_func(a[:h], a[h:], u, q)
        if kind == "Combine":
            return combine(_bits(args[0]), _bits(args[1]))
        if kind == "NodeDecode":
            cs = decode_node(NodeKind(p["node_kind"]), args[0], 0, self.s.L, q)
            if not p.get("fused"):
                return cs
            state = _state(args[1]) if len(args) > 1 else self.initial
            return _Fused(cs.bits[0], self._select([cs.pm], state, 1))
        if kind == "Sort":
            a_in = p["lanes_in"]
            state = _state(args[a_in]) if len(args) > a_in else self.initial
            return self._select([d.pm for d in args[:a_in]], state, a_in)
        if kind == "Mux":
            role, lane = p["role"], op.lane
            if role == "perm":
                return SortState(None, None, args[0].parent[args[1].parent], None)
            sel = args[-1]
            src = args[:-1]
            if role == "beta":
                return src[sel.parent[lane]].bits[sel.cand[lane]]
            if role == "gpre":
                return src[2 * sel.parent[lane] + sel.cand[lane]]
            return _bits(src[sel.parent[lane]])
        if kind == "Output":
            lanes = p["lanes"]
            state = _state(args[lanes])
            cw = np.zeros((self.s.L, self.s.tree.N), dtype=np.uint8)
            for l in range(lanes):
                cw[l] = _bits(args[l])
            result = ListResult.ranked(cw[None], state.pm[None], state.valid[None])
            if self.s.code is None:
                return result.best()[0]
            return result.select(self.s.code, self.s.use_crc)[0]
        raise InvalidParametersError(f"cannot evaluate {kind}")


@dataclass
class PipelineRun:
    outputs: np.ndarray
    inject_cycles: np.ndarray
    output_cycles: np.ndarray
    cycles: int


def simulate_pipeline(schedule: Schedule, llrs, config: PipelineConfig | None = None,
                      inject_cycles=None, check_contract: bool = True) -> PipelineRun:
    """Clock the unrolled datapath over a stream of frames.

    Each operation reads its inputs from the register file at its start cycle
    and commits its result ``duration`` cycles later. The register file is
    sized for the interval the schedule was compiled with. Frame ``j`` is
    injected at ``inject_cycles[j]`` (default ``j * I`` with ``I`` taken from
    ``config``); injections closer than the compiled interval violate the
    pipeline contract. With ``check_contract=False`` they are let through and
    the register tag check reports the resulting overwrite instead.
    """
    config = config or schedule.config
    built = schedule.config.interval
    llrs = np.atleast_2d(np.asarray(llrs, dtype=float))
    n_frames = llrs.shape[0]
    if inject_cycles is None:
        inject = np.arange(n_frames) * config.interval
    else:
        inject = np.asarray(inject_cycles, dtype=np.int64)
        if inject.shape != (n_frames,):
            raise InvalidParametersError("one injection cycle per frame is required")
    if check_contract and np.any(np.diff(inject) < built):
        raise PipelineContractError(f"frames injected less than I={built} cycles apart")
    evaluate = _Evaluator(schedule)
    latency = schedule.latency_cycles
    copies = [schedule.copies(op.id, built) for op in schedule.ops]
    by_start = defaultdict(list)
    for op in schedule.ops:
        by_start[op.start_cycle].append(op)
    prepared = prepare_llrs(llrs, schedule.quant)

    regs: dict = {}
    pending = defaultdict(list)
    outputs = np.zeros((n_frames, schedule.tree.N), dtype=np.uint8)
    out_cycle = np.full(n_frames, -1, dtype=np.int64)
    output_id = next(op.id for op in schedule.ops if op.kind == "Output")
    end = int(inject[-1]) + latency if n_frames else 0
    first = 0
    for t in range(end + 1):
        for slot, frame, value in pending.pop(t, ()):
            regs[slot] = (frame, value)
            if slot[0] == output_id:
                outputs[frame] = value
                out_cycle[frame] = t
        while first < n_frames and inject[first] + latency <= t:
            first += 1
        j = first
        while j < n_frames and inject[j] <= t:
            local = t - int(inject[j])
            for op in by_start.get(local, ()):
                args = []
                for i in op.inputs:
                    held = regs.get((i, j % copies[i]))
                    if held is None or held[0] != j:
                        raise RegisterCorruptionError(
                            f"frame {j} op {op.id} ({op.kind}) lost input {i} at cycle {t}"
                        )
                    args.append(held[1])
                value = prepared[j] if op.kind == "Load" else evaluate(op, args)
                pending[t + op.duration_cycles].append(((op.id, j % copies[op.id]), j, value))
            j += 1
    return PipelineRun(outputs, inject, out_cycle, end)


def save_schedule(schedule: Schedule, path) -> None:
    with open(path, "w") as fh:
        json.dump(schedule.to_json(), fh, indent=1)
