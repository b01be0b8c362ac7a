import numpy as np
import pytest
from hypothesis import strategies as st

from eprlab.quantum_core import AXES, PauliString, StateVector
from eprlab.scenarios import build_cabello, build_ghz, build_hardy


@pytest.fixture(scope="session")
def cabello():
    return build_cabello()


@pytest.fixture(scope="session")
def ghz():
    return build_ghz()


@pytest.fixture(scope="session")
def hardy():
    return build_hardy()


def pauli_strings(n, allow_identity=True):
    axes = st.lists(st.sampled_from(AXES), min_size=n, max_size=n)
    if not allow_identity:
        axes = axes.filter(lambda a: any(x != "I" for x in a))
    return st.builds(PauliString, st.sampled_from((1, -1)), axes.map(tuple))


@st.composite
def states(draw, n):
    seed = draw(st.integers(0, 2 ** 32 - 1))
    rng = np.random.default_rng(seed)
    v = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    return StateVector.from_unnormalized(n, v)


# --- acceptance summary ---------------------------------------------------------

_criteria: dict[int, tuple[str, str]] = {}


def pytest_runtest_setup(item):
    tag = getattr(getattr(item, "function", None), "criterion", None)
    if tag is not None:
        item.user_properties.append(("criterion", tag))


def pytest_runtest_logreport(report):
    tag = dict(report.user_properties).get("criterion")
    if tag is None:
        return
    number, title = tag
    if report.failed:
        _criteria[number] = ("FAIL", title)
    elif report.when == "call" and number not in _criteria:
        _criteria[number] = ("PASS", title)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        status, title = _criteria[number]
        terminalreporter.write_line(f"[{status}] {number:2d}. {title}")
