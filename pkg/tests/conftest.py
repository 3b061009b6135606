import numpy as np
import pytest

from warpbridge import kernels


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    return kernels.get_backend(request.param)
