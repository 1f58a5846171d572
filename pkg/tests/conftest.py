import math

import pytest

from wmsense import (
    GaussianComponent,
    InterfaceParams,
    PixelGrid,
    SchemeParams,
    SourceSpectrum,
    Variant,
)

# Reference setup used across the suite: dense flint prism against an
# aqueous analyte, interrogated just above the critical angle (49.49 deg).
N1 = 1.75
N2 = 1.3305
THETA = math.radians(52.0)
TAU = 2e-4  # rad/nm


@pytest.fixture
def iface():
    return InterfaceParams(n1=N1, n2=N2, theta=THETA)


@pytest.fixture
def source():
    # two-component broadband SLD model
    return SourceSpectrum(
        (
            GaussianComponent(1.0, 821.1, 7.55),
            GaussianComponent(1.035, 845.8, 19.58),
        )
    )


@pytest.fixture
def single_source():
    return SourceSpectrum.single(833.0, 20.0)


@pytest.fixture
def grid():
    return PixelGrid()


@pytest.fixture
def small_grid():
    # coarse grid keeps Monte Carlo tests fast
    return PixelGrid(pixel_count=256, lambda_start=750.0, lambda_step=200.0 / 255.0)


def biased_scheme(tau, epsilon):
    return SchemeParams(Variant.BIASED, tau, epsilon)


def standard_scheme(tau):
    return SchemeParams(Variant.STANDARD, tau, 0.0)
