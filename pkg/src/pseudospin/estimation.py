"""Sensitivity, Fisher information and maximum-likelihood angle estimates
for the two-outcome pointer."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Optional, Tuple

import numpy as np
from scipy import optimize

from .errors import (
    AngleSingularity,
    ContrastOutOfRange,
    DegenerateOutcome,
    EmptyFrame,
    NonMonotonicInterval,
    PseudoSpinError,
)
from .model import (
    EXACT,
    FIRSTORDER,
    SQRT_2_OVER_PI,
    OutcomeProbabilities,
    WeakMeasurementModel,
    contrast,
    outcome_probabilities,
    outcome_slope_exact,
)

FD_STEP = 1e-6
CRB_IDENTITY_RTOL = 1e-12
#: Default estimator interval (rad), on the outer branch of the default lab setup.
DEFAULT_INTERVAL = (0.004, 0.3)
_MONOTONIC_PROBES = 65


@dataclass(frozen=True)
class EstimationReport:
    theta_hat: float
    std_theta: float
    fisher: float
    crb_var: float
    sensitivity: float
    n_total: float = math.nan
    saturated: bool = False


class CRBResult(NamedTuple):
    crb_var: float
    error_propagation_var: float


def pointer_variance(probs: OutcomeProbabilities, n_total: float) -> float:
    """Variance of the contrast estimate ``(N+ - N-)/N`` from ``N`` photons."""
    if n_total < 1:
        raise ValueError("n_total must be >= 1")
    return 4.0 * probs.p_plus * probs.p_minus / n_total


def _firstorder_slope(theta, model):
    s = np.sin(theta)
    if np.any(np.abs(s) < 1e-15):
        raise AngleSingularity("cot(theta) undefined at theta = 0 mod pi")
    eps = model.coupling_ratio
    x = eps * np.cos(theta) / s
    dx = -eps / s**2
    return 2.0 * SQRT_2_OVER_PI * (1.0 - x * x) / (1.0 + x * x) ** 2 * dx


def richardson_derivative(f, x: float, h: float = FD_STEP) -> float:
    """Centred difference refined once by Richardson extrapolation (O(h^4))."""
    d1 = (f(x + h) - f(x - h)) / (2 * h)
    d2 = (f(x + h / 2) - f(x - h / 2)) / h
    return (4.0 * d2 - d1) / 3.0


def sensitivity(theta: float, model: WeakMeasurementModel, mode: str = EXACT) -> float:
    """Slope of the contrast with respect to the post-selection angle (1/rad)."""
    if mode == FIRSTORDER:
        return float(_firstorder_slope(theta, model))
    if mode != EXACT:
        raise ValueError(f"unknown mode {mode!r}")
    if model.g == 0.0:
        return 0.0
    return 2.0 * outcome_slope_exact(theta, model)[1]


def _probs_and_slope(theta, model, mode):
    if mode == EXACT and model.g != 0.0:
        probs, dp = outcome_slope_exact(theta, model)
        return probs, 2.0 * dp
    return outcome_probabilities(theta, model, mode), sensitivity(theta, model, mode)


def _fisher_from(probs: OutcomeProbabilities, slope: float) -> float:
    if probs.p_plus <= 0.0 or probs.p_minus <= 0.0:
        raise DegenerateOutcome(f"p+ = {probs.p_plus!r}")
    dp = 0.5 * slope
    return dp * dp * (1.0 / probs.p_plus + 1.0 / probs.p_minus)


def fisher_information(theta: float, model: WeakMeasurementModel, mode: str = EXACT) -> float:
    """Per-photon Fisher information about theta carried by the detector split.

    Conditional on post-selection success.
    """
    probs, slope = _probs_and_slope(theta, model, mode)
    return _fisher_from(probs, slope)


def crb_variance(
    theta: float, model: WeakMeasurementModel, n_total: float, mode: str = EXACT
) -> CRBResult:
    """Cramer-Rao variance ``1/(N F)`` next to the error-propagation variance.

    For a binary outcome the two coincide identically; a mismatch beyond
    rounding means a bug upstream and raises.
    """
    probs, slope = _probs_and_slope(theta, model, mode)
    fisher = _fisher_from(probs, slope)
    if fisher <= 0.0:
        raise DegenerateOutcome("Fisher information vanishes; no signal at this angle")
    crb = 1.0 / (n_total * fisher)
    prop = pointer_variance(probs, n_total) / (slope * slope)
    if abs(prop - crb) > CRB_IDENTITY_RTOL * crb:
        raise PseudoSpinError(f"CRB identity violated: {crb!r} vs {prop!r}")
    return CRBResult(crb, prop)


def _probes(model, lo, hi):
    # uniform and log-spaced samples plus the first-order extrema, where
    # |(g/sigma) cot(theta)| = 1, so a narrow peak cannot slip between probes
    pts = [np.linspace(lo, hi, _MONOTONIC_PROBES)]
    if lo * hi > 0:
        pts.append(np.sign(lo) * np.geomspace(abs(lo), abs(hi), _MONOTONIC_PROBES))
    peak = math.atan(abs(model.coupling_ratio))
    for k in range(math.floor(lo / math.pi) - 1, math.ceil(hi / math.pi) + 2):
        for c in (k * math.pi - peak, k * math.pi + peak):
            if lo < c < hi:
                pts.append(np.array([c]))
    return np.unique(np.concatenate(pts))


@lru_cache(maxsize=256)
def _branch(model, lo, hi, mode):
    probes = _probes(model, lo, hi)
    values = np.array([contrast(t, model, mode) for t in probes])
    steps = np.diff(values)
    if not (np.all(steps > 0) or np.all(steps < 0)):
        raise NonMonotonicInterval(
            f"contrast is not strictly monotonic on [{lo!r}, {hi!r}]"
        )
    return values[0], values[-1]


def validate_interval(model, interval, mode=EXACT) -> Tuple[float, float]:
    """Contrast at both ends of a monotonic interval; raises otherwise."""
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise ValueError(f"empty search interval ({lo!r}, {hi!r})")
    return _branch(model, lo, hi, mode)


def invert_contrast(
    observed: float,
    model: WeakMeasurementModel,
    interval=DEFAULT_INTERVAL,
    mode: str = EXACT,
) -> Tuple[float, bool]:
    """Angle on the branch whose model contrast equals ``observed``.

    Returns ``(theta, saturated)``; out-of-range contrasts are clamped to
    the nearer endpoint.
    """
    lo, hi = float(interval[0]), float(interval[1])
    c_lo, c_hi = validate_interval(model, (lo, hi), mode)
    if not min(c_lo, c_hi) <= observed <= max(c_lo, c_hi):
        nearest = lo if abs(observed - c_lo) <= abs(observed - c_hi) else hi
        return nearest, True
    if observed == c_lo:
        return lo, False
    if observed == c_hi:
        return hi, False
    root = optimize.brentq(
        lambda t: contrast(t, model, mode) - observed, lo, hi, xtol=1e-15, rtol=1e-15
    )
    return root, False


def estimate_theta(
    counts,
    model: WeakMeasurementModel,
    search_interval=DEFAULT_INTERVAL,
    mode: str = EXACT,
    strict: bool = False,
) -> EstimationReport:
    """Maximum-likelihood angle from detector counts.

    For a binomial split the MLE solves ``p+(theta) = N+/N`` on the branch.
    Counts whose contrast falls outside the branch are pinned to an endpoint
    and flagged ``saturated`` (or raise ContrastOutOfRange with ``strict``).
    """
    n_plus, n_minus = counts.n_plus, counts.n_minus
    n = n_plus + n_minus
    if n <= 0:
        raise EmptyFrame("no detected photons in this window")
    observed = (n_plus - n_minus) / n
    theta_hat, saturated = invert_contrast(observed, model, search_interval, mode)
    if saturated and strict:
        raise ContrastOutOfRange(f"observed contrast {observed:.6f} outside branch range")
    probs, slope = _probs_and_slope(theta_hat, model, mode)
    try:
        fisher = _fisher_from(probs, slope)
    except DegenerateOutcome:
        fisher = 0.0
    crb = 1.0 / (n * fisher) if fisher > 0 else math.inf
    return EstimationReport(
        theta_hat=theta_hat,
        std_theta=math.sqrt(crb),
        fisher=fisher,
        crb_var=crb,
        sensitivity=slope,
        n_total=n,
        saturated=saturated,
    )


def crb_std(theta: float, model: WeakMeasurementModel, n_total: float, mode: str = EXACT) -> float:
    """Square root of the Cramer-Rao bound, or NaN where it is undefined."""
    try:
        return math.sqrt(crb_variance(theta, model, n_total, mode).crb_var)
    except (DegenerateOutcome, AngleSingularity):
        return math.nan


def optimal_working_point(
    model: WeakMeasurementModel, interval=DEFAULT_INTERVAL, mode: str = EXACT
) -> float:
    """Angle in ``interval`` that maximizes the per-photon Fisher information."""
    lo, hi = interval
    grid = np.geomspace(lo, hi, 200)
    f = np.array([fisher_information(t, model, mode) for t in grid])
    i = int(np.argmax(f))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = optimize.minimize_scalar(
        lambda t: -fisher_information(t, model, mode),
        bounds=(a, b),
        method="bounded",
        options={"xatol": 1e-10},
    )
    return float(res.x)


def monotonic_branch(
    theta: float, model: WeakMeasurementModel, interval=DEFAULT_INTERVAL
) -> Optional[Tuple[float, float]]:
    """The configured interval, mirrored for negative angles; None if ``theta`` lies outside."""
    lo, hi = interval
    if lo <= theta <= hi:
        return (lo, hi)
    if -hi <= theta <= -lo:
        return (-hi, -lo)
    return None
