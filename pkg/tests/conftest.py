import pytest

from efgp import _kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # compile (or load the cached build of) every kernel before any test
    # that measures wall-clock time
    _kernels.warmup()
