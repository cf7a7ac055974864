import numpy as np
import pytest
from hypothesis import settings

from tomokit import _kernels

settings.register_profile("deterministic", derandomize=True)
settings.load_profile("deterministic")


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # Compile (or load from cache) every projector kernel once up front so
    # individual test timings stay meaningful.
    _kernels.warmup()


@pytest.fixture()
def rng():
    return np.random.default_rng(20240917)
