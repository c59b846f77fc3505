import time

import numpy as np
import pytest

from sparsedyn import harness
from sparsedyn.config import ExperimentConfig

ACCEPTANCE_LINES: list[str] = []


def record(criterion: str, passed: bool, detail: str) -> str:
    line = f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def cfg():
    return ExperimentConfig()


@pytest.fixture(scope="session")
def built_library(cfg, tmp_path_factory):
    """The default six-regime library, saved to disk, with its build time."""
    path = tmp_path_factory.mktemp("lib") / "default.podl"
    t0 = time.perf_counter()
    lib = harness.build_all(cfg, path)
    return lib, path, time.perf_counter() - t0


@pytest.fixture(scope="session")
def library(built_library):
    return built_library[0]


@pytest.fixture(scope="session")
def reference(cfg):
    return harness.simulate_reference(cfg)


@pytest.fixture(scope="session")
def regime1_snapshots(cfg):
    return harness.regime_snapshots(cfg, 1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
