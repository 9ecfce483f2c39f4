import pytest

from hypsurf import fuchsian


@pytest.fixture(scope="session")
def bolza():
    return fuchsian.bolza()


@pytest.fixture(scope="session")
def thin_pants():
    """Genus two with one curve of length 0.5 and wide collars."""
    return fuchsian.doubled_pants(0.5, 6.0, 6.0)


@pytest.fixture(scope="session")
def even_pants():
    return fuchsian.doubled_pants(1.2, 1.2, 1.2)
