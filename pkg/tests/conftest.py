import math

import pytest

from hypdet.fuchsian import catalog, enumerate_primitives

BOLZA_VOLUME = 4 * math.pi


@pytest.fixture(scope="session")
def bolza():
    return catalog("bolza")


@pytest.fixture(scope="session")
def bolza8(bolza):
    return enumerate_primitives(bolza, 8.0)


@pytest.fixture(scope="session")
def bolza10(bolza):
    return enumerate_primitives(bolza, 10.0)
