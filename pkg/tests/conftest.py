import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from aoisrp import ChannelModel, Constraints, CostVector, SourceChain, SystemConfig  # noqa: E402

FIG5B_CHANNEL = ChannelModel(p01=0.3, p10=0.2, p1r=0.9, p0p=0.6)
FIG5B_COSTS = CostVector(c1=1.2, c2=0.8, c3=1.4)


def fig5b_config(p01=0.15, p10=0.2, c_bar=0.5, a_bar=3.0):
    return SystemConfig(
        SourceChain(p01, p10), FIG5B_CHANNEL, FIG5B_COSTS, Constraints(a_bar=a_bar, c_bar=c_bar)
    )


def random_config(rng: np.random.Generator) -> SystemConfig:
    """Draw a system from the ranges used throughout the randomized tests."""
    u = rng.uniform
    return SystemConfig(
        SourceChain(u(0.05, 0.95), u(0.05, 0.95)),
        ChannelModel(u(0.05, 0.95), u(0.05, 0.95), u(0.1, 1.0), u(0.0, 1.0)),
        CostVector(u(0.2, 2.0), u(0.2, 2.0), u(0.2, 2.0)),
        Constraints(a_bar=u(1.0, 10.0), c_bar=u(0.0, 2.0)),
    )


@pytest.fixture
def fig5b():
    return fig5b_config()


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


_CRITERIA: dict = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _CRITERIA[marker.args[0]] = (marker.args[1], rep.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_CRITERIA):
        title, outcome = _CRITERIA[number]
        verdict = {"passed": "PASS", "failed": "FAIL"}.get(outcome, outcome.upper())
        terminalreporter.write_line(f"criterion {number}: {verdict}  {title}")
