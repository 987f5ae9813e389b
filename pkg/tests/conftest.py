from pathlib import Path

import numpy as np
import pytest

from polarscl.core import PolarCode, load_code
from polarscl.tree import build_decoder_tree

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def code_512():
    return load_code(DATA / "mask_512_427_ga45.json")


@pytest.fixture(scope="session")
def tree_512(code_512):
    return build_decoder_tree(code_512)


@pytest.fixture(scope="session")
def code_8():
    mask = np.zeros(8, dtype=bool)
    mask[[0, 1, 2, 4]] = True
    return PolarCode(8, 4, mask)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_VERDICTS: list[str] = []


def record_verdict(line: str) -> None:
    _VERDICTS.append(line)


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_VERDICTS, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
