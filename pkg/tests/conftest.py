import math

import pytest

from walkbounds.config import bundled_configs, load_config
from walkbounds.groups import CyclicGroup, FreeAbelianGroup, FreeGroup, FreeProduct
from walkbounds.walk import build_measure, uniform_measure

LOG3 = math.log(3)
RHO_F2 = math.sqrt(3) / 2
H_MODULAR = math.log(2) / 15
ELL_MODULAR = 2 / 15
RHO_MODULAR = 0.9884822126613


@pytest.fixture(scope="session")
def f2():
    return FreeGroup(2, ["a", "b"])


@pytest.fixture(scope="session")
def f2_simple(f2):
    return uniform_measure(f2)


@pytest.fixture(scope="session")
def modular():
    return FreeProduct([CyclicGroup(2, "a"), CyclicGroup(3, "b")])


@pytest.fixture(scope="session")
def modular_uniform(modular):
    return uniform_measure(modular)


@pytest.fixture(scope="session")
def z_simple():
    return uniform_measure(FreeGroup(1, ["a"]))


@pytest.fixture(scope="session")
def z2_simple():
    return uniform_measure(FreeAbelianGroup(2))


@pytest.fixture(scope="session")
def f2_weighted_measure(f2):
    return build_measure(f2, [("a", 0.3), ("a^-1", 0.3), ("b", 0.2), ("b^-1", 0.2)])


@pytest.fixture(scope="session")
def bundled():
    return {name: load_config(path) for name, path in bundled_configs().items()}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion exercised by the test")


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get(f"{__package__}.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for text in mod.summary_lines():
        terminalreporter.write_line(text)
