import cmath
import math

import pytest

ETA = cmath.exp(2j * math.pi / 3)


@pytest.fixture
def eta():
    return ETA
