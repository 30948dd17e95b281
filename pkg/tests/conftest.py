import math

import pytest

from poppersim.gaussian_core import PhysParams

LAMBDA_NM = 702.0


@pytest.fixture(scope="session")
def params702():
    """Wavelength used by all the reference layouts."""
    return PhysParams(wavelength_mm=LAMBDA_NM * 1e-6)


@pytest.fixture(scope="session")
def lam702(params702):
    """Rescaled wavelength Lambda = lambda/pi in mm."""
    return params702.rescaled_wavelength_mm


def approx_rel(value, rel):
    return pytest.approx(value, rel=rel)


BIG_OMEGA = 1e6  # numerical stand-in for the wide-source limit


def fwhm_factor():
    return math.sqrt(2.0 * math.log(2.0))
