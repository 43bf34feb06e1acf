import math

import numpy as np
import pytest
from hypothesis import settings

from szegolab.symbolic import Periodic, sturmian
from szegolab.verblunsky import VerblunskyMap

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

GOLDEN = (math.sqrt(5) - 1) / 2
LN_SQRT3 = 0.5 * math.log(3.0)


@pytest.fixture
def golden():
    return sturmian()


@pytest.fixture
def fib_map():
    return VerblunskyMap.symbol_values({"a": 0.5, "b": -0.5})


@pytest.fixture
def const_half():
    return Periodic("a"), VerblunskyMap.constant(0.5, "a")


@pytest.fixture
def free():
    return Periodic("a"), VerblunskyMap.constant(0.0, "a")


def rng(seed=0):
    return np.random.default_rng(seed)


ACCEPTANCE_LINES = []


def record(criterion, ok, detail):
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
