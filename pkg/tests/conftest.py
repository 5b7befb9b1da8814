import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fmkit.formats import parse_uvl

CAR_UVL = """features
    Car
        mandatory
            Engine
                alternative
                    Gas
                    Electric
        optional
            Radio
constraints
    Radio => Electric
"""


@pytest.fixture
def car_model():
    return parse_uvl(CAR_UVL)


@pytest.fixture
def car_uvl():
    return CAR_UVL
