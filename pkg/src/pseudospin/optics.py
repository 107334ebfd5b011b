"""Spin Hall effect of light at an air/glass interface as a weak coupling.

Lengths are in micrometres except ``wavelength``, which is given in
nanometres as in lab notebooks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AngleSingularity, BrewsterSingularity, TotalInternalReflection
from .model import SQRT_2_OVER_PI, MeterSpec, WeakMeasurementModel

BREWSTER_EPS = 1e-9


@dataclass(frozen=True)
class OpticalSetup:
    wavelength: float = 632.8  # nm
    theta_i: float = math.radians(30.0)
    n: float = 1.515
    sigma: float = 27.0  # um

    def __post_init__(self):
        if not 0.0 <= self.theta_i < math.pi / 2:
            raise ValueError(f"incidence angle must lie in [0, pi/2), got {self.theta_i!r}")
        if not self.n >= 1.0:
            raise ValueError(f"refractive index must be >= 1, got {self.n!r}")
        if not self.wavelength > 0:
            raise ValueError("wavelength must be positive")
        if not self.sigma > 0:
            raise ValueError("beam width must be positive")

    @property
    def k0(self) -> float:
        """Vacuum wavenumber in 1/um."""
        return 2.0 * math.pi / (self.wavelength * 1e-3)


@dataclass(frozen=True)
class FresnelCoefficients:
    r_p: float
    r_s: float


def fresnel(setup: OpticalSetup) -> FresnelCoefficients:
    """Amplitude reflection coefficients for light incident from air."""
    ci = math.cos(setup.theta_i)
    sin_t = math.sin(setup.theta_i) / setup.n
    if sin_t >= 1.0:
        raise TotalInternalReflection(f"sin(theta_t) = {sin_t:.6f} >= 1")
    ct = math.sqrt(1.0 - sin_t * sin_t)
    n = setup.n
    r_p = (n * ci - ct) / (n * ci + ct)
    r_s = (ci - n * ct) / (ci + n * ct)
    return FresnelCoefficients(r_p, r_s)


def shel_shift(setup: OpticalSetup) -> float:
    """Spin-dependent transverse displacement ``delta_H`` in um (signed)."""
    fc = fresnel(setup)
    if abs(fc.r_p) < BREWSTER_EPS:
        raise BrewsterSingularity(f"|r_p| = {abs(fc.r_p):.3e} at theta_i = {setup.theta_i!r}")
    if setup.theta_i == 0.0:
        raise AngleSingularity("cot(theta_i) undefined at normal incidence")
    cot_i = math.cos(setup.theta_i) / math.sin(setup.theta_i)
    return cot_i * (1.0 + fc.r_s / fc.r_p) / setup.k0


def to_model(setup: OpticalSetup) -> WeakMeasurementModel:
    """Angle-family model with ``g = delta_H`` and the beam width as meter width."""
    return WeakMeasurementModel(g=shel_shift(setup), meter=MeterSpec(setup.sigma))


def shel_contrast(theta, setup: OpticalSetup):
    """Closed-form detector contrast written in terms of the Fresnel coefficients."""
    s = np.sin(theta)
    if np.any(np.abs(s) < 1e-15):
        raise AngleSingularity("cot(theta) undefined at theta = 0 mod pi")
    cot = np.cos(theta) / s
    fc = fresnel(setup)
    if abs(fc.r_p) < BREWSTER_EPS:
        raise BrewsterSingularity(f"|r_p| = {abs(fc.r_p):.3e}")
    cot_i = math.cos(setup.theta_i) / math.sin(setup.theta_i)
    ks = setup.k0 * setup.sigma
    rp, rsum = fc.r_p, fc.r_p + fc.r_s
    num = 2.0 * SQRT_2_OVER_PI * ks * rp * rsum * cot_i * cot
    den = ks**2 * rp**2 + rsum**2 * cot_i**2 * cot**2
    return num / den
