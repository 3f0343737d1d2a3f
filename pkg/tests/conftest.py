import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from boolresp import kernels  # noqa: E402


@pytest.fixture(params=sorted(kernels.BACKENDS))
def backend(request):
    """Each available kernel implementation in turn."""
    return kernels.BACKENDS[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
