from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from nearfield_codebook import ArrayConfig, lower_codebook  # noqa: E402

DATA = Path(__file__).resolve().parent / "data"

_ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record_acceptance(number: int, passed: bool, detail: str) -> None:
    _ACCEPTANCE[number] = (passed, detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'} | {detail}")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        passed, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'} | {detail}")


@pytest.fixture(scope="session")
def cfg():
    return ArrayConfig()


@pytest.fixture(scope="session")
def lower512(cfg):
    return lower_codebook(cfg, 512, 5)


@pytest.fixture(scope="session")
def toy_cfg():
    return ArrayConfig(n_w=32)


@pytest.fixture(scope="session")
def data_dir():
    return DATA
