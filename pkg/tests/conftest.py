import math

import pytest

from pseudospin.optics import OpticalSetup, to_model


@pytest.fixture(scope="session")
def lab_setup():
    return OpticalSetup(wavelength=632.8, theta_i=math.radians(30.0), n=1.515, sigma=27.0)


@pytest.fixture(scope="session")
def lab_model(lab_setup):
    return to_model(lab_setup)
