import numpy as np
import pytest

import oracles


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not oracles.ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(oracles.ACCEPTANCE):
        ok, detail = oracles.ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
