import pytest

from StableTheta.lattice.qforms import QuadraticForm, make_d16_plus, make_e8, make_e8_e8
from StableTheta.utils.helpers import congruence


@pytest.fixture
def e8():
    return make_e8()


@pytest.fixture
def e8_e8():
    return make_e8_e8()


@pytest.fixture
def d16_plus():
    return make_d16_plus()


@pytest.fixture
def e8_reglued():
    """E8 in a different basis, so nothing is shared with the module caches of make_e8"""
    u = [[int(i == j) for j in range(8)] for i in range(8)]
    u[1][0] = 1
    return QuadraticForm("E8U", congruence(make_e8().gram, u))


@pytest.fixture
def quiet_config(tmp_path):
    path = tmp_path / "stabletheta_config.json"
    path.write_text('{"cache_enabled": false}')
    return str(path)
