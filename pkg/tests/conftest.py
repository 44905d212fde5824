import pytest

from causalcrit.fixtures import fixture


@pytest.fixture(scope="session")
def heavy_rain_reality():
    return fixture("heavy-rain-reality")


@pytest.fixture(scope="session")
def heavy_rain_model():
    return fixture("heavy-rain-model")


@pytest.fixture(scope="session")
def friction_relation():
    return fixture("friction-relation")


@pytest.fixture(scope="session")
def reality_model(heavy_rain_reality):
    return heavy_rain_reality[1]


@pytest.fixture(scope="session")
def candidate_model(heavy_rain_model):
    return heavy_rain_model[1]
