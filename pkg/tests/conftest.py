import pytest

from hybridbench.platform import Platform


@pytest.fixture
def platform13() -> Platform:
    """Modeled platform with the 3x device-speed ratio used throughout."""
    return Platform.build(1.0, 3.0)


@pytest.fixture
def platform11() -> Platform:
    return Platform.build(1.0, 1.0)
