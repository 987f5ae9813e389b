import json

import pytest

from polarscl.cli import main, run_report
from polarscl.core import PolarCode
from polarscl.sim import read_csv


def test_tree_census(capsys):
    assert main(["tree", "--code", "8:4", "--design-snr", "0"]) == 0
    out = capsys.readouterr().out
    assert "leaves:" in out


def test_tree_default_code(capsys):
    assert main(["tree"]) == 0
    rows = [line.split() for line in capsys.readouterr().out.splitlines()]
    assert max(int(r[1]) for r in rows if r[0] == "Rate1") == 64
    assert main(["tree", "--design-snr", "4.0"]) == 0
    rows = [line.split() for line in capsys.readouterr().out.splitlines()]
    assert max(int(r[1]) for r in rows if r[0] == "Rate1") == 128


def test_report_prints_throughput(capsys, tmp_path):
    assert main(["report", "--json", str(tmp_path / "r.json")]) == 0
    out = capsys.readouterr().out
    assert "Coded T/P (Gbps)  11.98" in out
    assert "Info T/P (Gbps)   9.99" in out
    obj = json.loads((tmp_path / "r.json").read_text())
    assert obj["N"] == 512 and obj["k"] == 427


def test_report_deep_vs_partial():
    code = PolarCode.construct(128, 64)
    deep = run_report(code, 2, 20, 468e6, mode="deep")
    part = run_report(code, 2, 20, 468e6, mode="partial")
    assert deep.latency_cycles == part.latency_cycles
    assert deep.coded_throughput_bps == pytest.approx(20 * part.coded_throughput_bps)
    assert deep.register_bits_estimate >= part.register_bits_estimate


def test_sweep_csv(capsys, tmp_path):
    out = tmp_path / "s.csv"
    argv = ["sweep", "--code", "64:32", "--snr", "1:2:1", "--min-errors", "10",
            "--max-frames", "2000", "--decoder", "fast-ssc-list", "--out", str(out)]
    assert main(argv) == 0
    assert capsys.readouterr().out.startswith("ebn0_db,frames,frame_errors,bit_errors,fer,ber")
    assert [p.ebn0_db for p in read_csv(out).points] == [1.0, 2.0]


def test_sweep_json_and_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"code": "64:32", "snr": "inf", "max-frames": 100, "decoder": "sc"}))
    out = tmp_path / "s.json"
    assert main(["sweep", "--config", str(cfg), "--max-frames", "50", "--out", str(out)]) == 0
    pts = json.loads(out.read_text())["points"]
    assert pts[0]["frames"] == 50 and pts[0]["frame_errors"] == 0


@pytest.mark.parametrize("argv", [
    ["sweep", "--code", "64:32", "--quant", "bad"],
    ["sweep", "--code", "64", "--snr", "inf"],
    ["sweep", "--code", "64:32", "--decoder", "ca-scl", "--snr", "inf"],
])
def test_config_errors(argv, capsys):
    assert main(argv) == 2
    assert "error:" in capsys.readouterr().err


def test_unknown_decoder_rejected():
    with pytest.raises(SystemExit):
        main(["sweep", "--decoder", "bp"])
