"""Pixelated-detector reference: the same post-selected meter density
binned onto a uniform pixel row, read out by its centroid.

Pixel integrals use composite Gauss-Legendre panels no wider than a
quarter meter standard deviation, checked against a half-order rule.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np
from scipy import optimize

from .errors import EmptyFrame, NonMonotonicInterval, QuadratureFailure
from .estimation import (
    DEFAULT_INTERVAL,
    EstimationReport,
    _probes,
    estimate_theta,
    fisher_information,
)
from .model import TAIL_CUTOFF, WeakMeasurementModel, _kraus_weight_slopes, _kraus_weights
from .montecarlo import SourceSpec, derive_seed, rng_for, simulate_window

PANEL_WIDTH = 0.25  # meter standard deviations
GL_ORDER = 20
GL_RTOL = 1e-10
MIN_PIXEL_PROB = 1e-15


@dataclass(frozen=True)
class PixelArraySpec:
    n_pixels: int
    u_max: float  # 1/um
    read_noise_sigma: float = 0.0

    def __post_init__(self):
        if self.n_pixels < 2:
            raise ValueError("n_pixels must be >= 2")
        if not self.u_max > 0:
            raise ValueError("u_max must be positive")
        if self.read_noise_sigma < 0:
            raise ValueError("read_noise_sigma must be >= 0")

    @classmethod
    def covering(cls, n_pixels, model, half_width=TAIL_CUTOFF, read_noise_sigma=0.0):
        """Array spanning +/- ``half_width`` meter standard deviations."""
        return cls(n_pixels, half_width / model.meter.sigma, read_noise_sigma)

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(-self.u_max, self.u_max, self.n_pixels + 1)

    @property
    def centers(self) -> np.ndarray:
        e = self.edges
        return 0.5 * (e[:-1] + e[1:])


@dataclass(frozen=True)
class FrameRecord:
    pixel_counts: np.ndarray
    window: float
    theta_true: float
    seed: int


class FisherComparison(NamedTuple):
    f_twobin: float
    f_pixels: float
    ratio: float
    excluded: int


@lru_cache(maxsize=32)
def _gl(order):
    return np.polynomial.legendre.leggauss(order)


def _panel_integrals(density, edges, panel_width, order):
    # integral of density over each [edges[i], edges[i+1]]
    widths = np.diff(edges)
    m = np.maximum(np.ceil(widths / panel_width).astype(int), 1)
    x, w = _gl(order)
    out = np.empty(len(widths))
    # group by panel count to keep things vectorized
    for k in np.unique(m):
        idx = np.nonzero(m == k)[0]
        a = edges[idx][:, None]
        h = (widths[idx] / k)[:, None]
        starts = a + h * np.arange(k)[None, :]  # (n, k)
        mids = starts + 0.5 * h
        nodes = mids[:, :, None] + 0.5 * h[:, :, None] * x[None, None, :]
        vals = density(nodes) * w[None, None, :]
        out[idx] = 0.5 * h[:, 0] * vals.sum(axis=(1, 2))
    return out


def _density(model, theta):
    evals, weights = _kraus_weights(model, theta)
    meter = model.meter

    def f(u):
        m = np.zeros(u.shape, dtype=complex)
        for lam, wt in zip(evals, weights):
            m += wt * np.exp(-1j * model.g * lam * u)
        return (m.real**2 + m.imag**2) * meter.density(u)

    return f


def _density_slope(model, theta):
    # d/dtheta of the density: 2 Re(conj(M) dM/dtheta) times the meter Gaussian
    evals, weights = _kraus_weights(model, theta)
    dweights = _kraus_weight_slopes(model, theta)
    meter = model.meter

    def f(u):
        m = np.zeros(u.shape, dtype=complex)
        dm = np.zeros(u.shape, dtype=complex)
        for lam, wt, dw in zip(evals, weights, dweights):
            ph = np.exp(-1j * model.g * lam * u)
            m += wt * ph
            dm += dw * ph
        return 2.0 * (m.real * dm.real + m.imag * dm.imag) * meter.density(u)

    return f


def _binned(model, theta, edges, density=_density):
    f = density(model, theta)
    panel = PANEL_WIDTH / model.meter.sigma
    for _ in range(6):
        hi = _panel_integrals(f, edges, panel, GL_ORDER)
        lo = _panel_integrals(f, edges, panel, GL_ORDER // 2)
        scale = max(np.abs(hi).sum(), 1e-300)
        if np.abs(hi - lo).sum() <= GL_RTOL * scale:
            return hi
        panel /= 2
    raise QuadratureFailure("pixel integrals did not converge")


def _pixel_masses(theta, model, pixels, density):
    # unnormalized mass per pixel and over the full +/- 8 std window
    cut = TAIL_CUTOFF / model.meter.sigma
    inner = pixels.edges
    if pixels.u_max < cut:
        binned = _binned(model, theta, np.concatenate(([-cut], inner, [cut])), density)
        return binned[1:-1], binned.sum()
    binned = _binned(model, theta, inner, density)
    return binned, _binned(model, theta, np.array([-cut, 0.0, cut]), density).sum()


def pixel_probabilities(theta, model: WeakMeasurementModel, pixels: PixelArraySpec) -> np.ndarray:
    """Probability that a post-selected photon lands in each pixel.

    Normalized over the full +/- 8 standard-deviation meter window, so the
    entries sum to the in-range mass.
    """
    binned, total = _pixel_masses(theta, model, pixels, _density)
    return binned / total


def pixel_probability_slopes(theta, model: WeakMeasurementModel, pixels: PixelArraySpec):
    """Pixel probabilities and their theta-derivatives, integrated directly."""
    b, t = _pixel_masses(theta, model, pixels, _density)
    db, dt = _pixel_masses(theta, model, pixels, _density_slope)
    return b / t, (db * t - b * dt) / (t * t)


def simulate_frame(
    theta: float,
    model: WeakMeasurementModel,
    pixels: PixelArraySpec,
    n_photons: int,
    seed: int = 0,
    window: float = 0.0,
    probs: Optional[np.ndarray] = None,
) -> FrameRecord:
    """Multinomial photon allocation plus rounded Gaussian read noise."""
    if n_photons < 0:
        raise ValueError("n_photons must be >= 0")
    rng = rng_for(seed)
    if probs is None:
        probs = pixel_probabilities(theta, model, pixels)
    p = np.clip(probs, 0.0, None)
    lost = max(1.0 - p.sum(), 0.0)
    counts = rng.multinomial(int(n_photons), np.append(p, lost) / (p.sum() + lost))[:-1]
    if pixels.read_noise_sigma > 0:
        noisy = np.rint(counts + rng.normal(0.0, pixels.read_noise_sigma, size=counts.shape))
        counts = np.maximum(noisy, 0).astype(np.int64)
    return FrameRecord(counts.astype(np.int64), window, theta, seed)


def mean_position(theta, model, pixels) -> float:
    p = pixel_probabilities(theta, model, pixels)
    return float(np.dot(p, pixels.centers) / p.sum())


@lru_cache(maxsize=64)
def _centroid_branch(model, pixels, lo, hi):
    probes = _probes(model, lo, hi)
    vals = np.array([mean_position(t, model, pixels) for t in probes])
    d = np.diff(vals)
    if not (np.all(d > 0) or np.all(d < 0)):
        raise NonMonotonicInterval("mean pixel position is not monotonic on the interval")
    return vals[0], vals[-1]


def centroid_estimate(
    frame: FrameRecord,
    model: WeakMeasurementModel,
    pixels: PixelArraySpec,
    search_interval=DEFAULT_INTERVAL,
) -> EstimationReport:
    """Invert the count-weighted mean pixel coordinate for theta.

    ``sensitivity`` is the slope of the mean position (1/um per rad);
    ``std_theta`` is the pixel-array Cramer-Rao spread at ``theta_hat``.
    """
    lo, hi = float(search_interval[0]), float(search_interval[1])
    c_lo, c_hi = _centroid_branch(model, pixels, lo, hi)
    counts = np.asarray(frame.pixel_counts, dtype=float)
    n = counts.sum()
    if n <= 0:
        raise EmptyFrame("frame has no counts")
    observed = float(np.dot(counts, pixels.centers) / n)
    saturated = not min(c_lo, c_hi) <= observed <= max(c_lo, c_hi)
    if saturated:
        theta_hat = lo if abs(observed - c_lo) <= abs(observed - c_hi) else hi
    else:
        theta_hat = optimize.brentq(
            lambda t: mean_position(t, model, pixels) - observed, lo, hi, xtol=1e-15
        )
    p, dp = pixel_probability_slopes(theta_hat, model, pixels)
    c = pixels.centers
    mass = p.sum()
    slope = float((np.dot(dp, c) * mass - np.dot(p, c) * dp.sum()) / (mass * mass))
    f_pix = pixel_fisher(theta_hat, model, pixels)[0]
    crb = 1.0 / (n * f_pix) if f_pix > 0 else math.inf
    return EstimationReport(theta_hat, math.sqrt(crb), f_pix, crb, slope, n, saturated)


def pixel_fisher(theta, model, pixels):
    """``sum_i (dP_i/dtheta)^2 / P_i`` over pixels above MIN_PIXEL_PROB."""
    p, dp = pixel_probability_slopes(theta, model, pixels)
    if model.g == 0.0:
        return 0.0, int(np.sum(p < MIN_PIXEL_PROB))
    keep = p >= MIN_PIXEL_PROB
    return float(np.sum(dp[keep] ** 2 / p[keep])), int(np.sum(~keep))


def fisher_comparison(theta, model: WeakMeasurementModel, pixels: PixelArraySpec) -> FisherComparison:
    f_two = fisher_information(theta, model, "exact")
    f_pix, excluded = pixel_fisher(theta, model, pixels)
    ratio = f_two / f_pix if f_pix > 0 else math.nan
    return FisherComparison(f_two, f_pix, ratio, excluded)


class EnsembleComparison(NamedTuple):
    std_twobin: float
    std_pixels: float
    ratio: float
    crb_twobin: float
    crb_pixels: float


def compare_estimators(
    theta, model, pixels, n_photons, n_trials=200, master_seed=0,
    interval=DEFAULT_INTERVAL, threads=1,
) -> EnsembleComparison:
    """Monte Carlo spread of both estimators at the same photon budget."""
    pix_probs = pixel_probabilities(theta, model, pixels)
    source = SourceSpec(fixed_n=int(n_photons))

    def one(i):
        rec = simulate_window(theta, model, source, seed=derive_seed(master_seed, 0, i))
        frame = simulate_frame(
            theta, model, pixels, n_photons, derive_seed(master_seed, 1, i), probs=pix_probs
        )
        return (
            estimate_theta(rec, model, interval).theta_hat,
            centroid_estimate(frame, model, pixels, interval).theta_hat,
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            pairs = list(pool.map(one, range(n_trials)))
    else:
        pairs = [one(i) for i in range(n_trials)]
    arr = np.array(pairs)
    s2, sp = arr.std(axis=0, ddof=1)
    fc = fisher_comparison(theta, model, pixels)
    return EnsembleComparison(
        float(s2), float(sp), float(s2 / sp),
        math.sqrt(1.0 / (n_photons * fc.f_twobin)),
        math.sqrt(1.0 / (n_photons * fc.f_pixels)),
    )
