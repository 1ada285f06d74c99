import numpy as np
import pytest

from infolag import _pykernels

try:
    from infolag import _ckernels
except ImportError:  # extension not built
    _ckernels = None

KERNELS = [pytest.param(_pykernels, id="python")]
if _ckernels is not None:
    KERNELS.append(pytest.param(_ckernels, id="cython"))


@pytest.fixture(params=KERNELS)
def kernels(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def write_text(path, text):
    path.write_text(text)
    return path


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE = []


def record(criterion, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
