import os
import sys

import pytest

# Development mode: add src to path
SRC = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "src")
if os.path.isdir(SRC) and SRC not in sys.path:
    sys.path.insert(0, SRC)

from meso_dbm.semicircle import Configuration, quantile_configuration  # noqa: E402

SEED = 12345


@pytest.fixture
def seed():
    return SEED


@pytest.fixture
def single_point():
    return Configuration([0.0])


@pytest.fixture(params=[1, 2, 4])
def small_quantiles(request):
    return quantile_configuration(request.param)
