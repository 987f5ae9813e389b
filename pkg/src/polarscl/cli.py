"""Command-line entry point: ``polarscl {sweep,report,tree}``.

Every flag may also be given as a key of a flat JSON file passed with
``--config`` (dashes become underscores); flags on the command line win.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .core import DEFAULT_DESIGN_SNR_DB, PolarCode
from .errors import ConfigurationError
from .pipeline import PipelineConfig, report, unroll_schedule
from .quantize import QuantSpec
from .sim import DECODERS, SimJob, emit_csv, parse_snr_range, run_sweep
from .tree import NodeCaps, build_decoder_tree

DEFAULTS = {
    "code": "512:427",
    "design_snr": DEFAULT_DESIGN_SNR_DB,
    "construction": "ga",
    "crc": 0,
    "list_size": 2,
    "quant": None,
    "decoder": "scl",
    "snr": "4.0",
    "min_errors": 100,
    "max_frames": 10_000_000,
    "seed": 0,
    "workers": 1,
    "batch_size": 2000,
    "out": None,
    "interval": 20,
    "clock": 468e6,
    "mode": "partial",
    "json": None,
}


def _parse_code(text: str) -> tuple[int, int]:
    try:
        n, k = (int(x) for x in text.split(":"))
    except ValueError:
        raise ConfigurationError(f"--code must look like N:k, got {text!r}") from None
    return n, k


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat JSON file with flag values")
    p.add_argument("--code", help="N:k, k counting unfrozen bits (CRC included)")
    p.add_argument("--design-snr", type=float, help="construction Eb/N0 in dB")
    p.add_argument("--construction", choices=["ga", "bhattacharyya"])
    p.add_argument("--crc", type=int, help="CRC length in bits (0 = none)")
    p.add_argument("--list-size", type=int)
    p.add_argument("--quant", help="fixed-point format Qi.Qc.Qf, e.g. 6.5.0")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polarscl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="Monte Carlo FER/BER sweep")
    _common(sweep)
    sweep.add_argument("--decoder", choices=DECODERS)
    sweep.add_argument("--snr", help="Eb/N0 points: a:b:step, comma list, or inf")
    sweep.add_argument("--min-errors", type=int)
    sweep.add_argument("--max-frames", type=int)
    sweep.add_argument("--seed", type=int)
    sweep.add_argument("--workers", type=int)
    sweep.add_argument("--batch-size", type=int)
    sweep.add_argument("--out", help="CSV path (a .json suffix writes JSON)")

    rep = sub.add_parser("report", help="unrolled pipeline throughput/latency report")
    _common(rep)
    rep.add_argument("--interval", type=int, help="initiation interval in cycles")
    rep.add_argument("--clock", type=float, help="clock frequency in Hz")
    rep.add_argument("--mode", choices=["deep", "partial"])
    rep.add_argument("--json", help="also write the report as JSON here")

    tree = sub.add_parser("tree", help="decoder-tree leaf census")
    _common(tree)
    return parser


def resolve(args: argparse.Namespace) -> dict:
    values = dict(DEFAULTS)
    if getattr(args, "config", None):
        data = json.loads(Path(args.config).read_text())
        values.update({k.replace("-", "_"): v for k, v in data.items()})
    values.update({k: v for k, v in vars(args).items() if v is not None and k != "config"})
    return values


def _code(v: dict) -> PolarCode:
    N, k = _parse_code(str(v["code"]))
    return PolarCode.construct(N, k, int(v["crc"]), float(v["design_snr"]), v["construction"])


def cmd_sweep(v: dict) -> int:
    N, k = _parse_code(str(v["code"]))
    job = SimJob(N=N, k=k, design_snr_db=float(v["design_snr"]), crc_len=int(v["crc"]),
                 decoder=v["decoder"], list_size=int(v["list_size"]), quant=v["quant"],
                 snrs=parse_snr_range(str(v["snr"])), min_errors=int(v["min_errors"]),
                 max_frames=int(v["max_frames"]), seed=int(v["seed"]),
                 workers=int(v["workers"]), batch_size=int(v["batch_size"]),
                 construction=v["construction"])
    result = run_sweep(job)
    print("ebn0_db,frames,frame_errors,bit_errors,fer,ber")
    for p in result.points:
        print(f"{p.ebn0_db},{p.frames},{p.frame_errors},{p.bit_errors},{p.fer:.3e},{p.ber:.3e}")
    if v["out"]:
        if str(v["out"]).endswith(".json"):
            Path(v["out"]).write_text(json.dumps(result.to_json(), indent=1))
        else:
            emit_csv(result, v["out"])
    return 0


def run_report(code: PolarCode, L: int, interval: int, clock_hz: float,
               quant: QuantSpec | None = None, mode: str = "partial"):
    config = PipelineConfig(initiation_interval=interval, clock_hz=clock_hz, mode=mode)
    schedule = unroll_schedule(build_decoder_tree(code, NodeCaps()), L, config,
                               quant=quant, code=code)
    return report(schedule, config, code, quant)


def cmd_report(v: dict) -> int:
    quant = QuantSpec.parse(v["quant"]) if v["quant"] else None
    rep = run_report(_code(v), int(v["list_size"]), int(v["interval"]), float(v["clock"]),
                     quant, v["mode"])
    print(rep.table())
    if v["json"]:
        Path(v["json"]).write_text(json.dumps(rep.to_json(), indent=1))
    return 0


def cmd_tree(v: dict) -> int:
    tree = build_decoder_tree(_code(v), NodeCaps())
    census = tree.census()
    print(f"{'kind':<12}{'length':>8}{'count':>8}")
    for (kind, length), count in sorted(census.items()):
        print(f"{kind:<12}{length:>8}{count:>8}")
    print(f"leaves: {sum(census.values())}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        values = resolve(args)
        return {"sweep": cmd_sweep, "report": cmd_report, "tree": cmd_tree}[args.command](values)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
