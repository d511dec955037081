import pytest

from d2drange import (
    ContentClass,
    EvalContext,
    NetworkLayout,
    PathLossModel,
    QuadratureSettings,
    RadioConfig,
)


@pytest.fixture(scope="session")
def layout():
    return NetworkLayout.from_inner_radius(300.0, ue_density=1.1e-3, ring_count=1)


@pytest.fixture(scope="session")
def radio():
    return RadioConfig()


@pytest.fixture(scope="session")
def channel():
    return PathLossModel()


@pytest.fixture(scope="session")
def quad():
    return QuadratureSettings()


@pytest.fixture(scope="session")
def ctx(layout, radio, channel, quad):
    return EvalContext(layout=layout, radio=radio, channel=channel, quad=quad)


@pytest.fixture(scope="session")
def cls_low():
    """20% popularity, request peak at one hour, no delay tolerance."""
    return ContentClass(popularity=0.2, scale_s=900.0, shape=5.0, timeout_s=0.0)


@pytest.fixture(scope="session")
def cls_high():
    """80% popularity counterpart of cls_low."""
    return ContentClass(popularity=0.8, scale_s=900.0, shape=5.0, timeout_s=0.0)
