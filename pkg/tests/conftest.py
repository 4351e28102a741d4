import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from collabcrypt import CipherKey, _kernels  # noqa: E402

IMPLS = ["numpy"] + (["numba"] if _kernels.HAVE_NUMBA else [])


@pytest.fixture
def key():
    return CipherKey(b"hunter2")


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


@pytest.fixture(params=IMPLS)
def impl(request):
    return request.param
