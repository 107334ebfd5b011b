"""Seeded simulation of photon-counting runs with two single-pixel detectors.

Every window draws from its own Philox stream, keyed by
``(master_seed, point_index, trial_index)``, so results do not depend on
how trials are scheduled across threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .errors import PseudoSpinError
from .estimation import (
    DEFAULT_INTERVAL,
    crb_std,
    estimate_theta,
    fisher_information,
    monotonic_branch,
)
from .model import EXACT, OutcomeProbabilities, WeakMeasurementModel, contrast, outcome_probabilities

SWEEP_KINDS = ("theta", "n_photons", "window")


@dataclass(frozen=True)
class NoiseSpec:
    background_rate: float = 0.0  # counts/s per detector
    power_rel_sigma: float = 0.0
    detector_efficiency: float = 1.0

    def __post_init__(self):
        if self.background_rate < 0:
            raise ValueError("background_rate must be >= 0")
        if self.power_rel_sigma < 0:
            raise ValueError("power_rel_sigma must be >= 0")
        if not 0.0 <= self.detector_efficiency <= 1.0:
            raise ValueError("detector_efficiency must lie in [0, 1]")


@dataclass(frozen=True)
class SourceSpec:
    """Either a mean post-selected rate (counts/s) or a fixed photon number per window."""

    post_rate: Optional[float] = None
    fixed_n: Optional[int] = None

    def __post_init__(self):
        if (self.post_rate is None) == (self.fixed_n is None):
            raise ValueError("set exactly one of post_rate and fixed_n")
        if self.post_rate is not None and not self.post_rate > 0:
            raise ValueError("post_rate must be positive")
        if self.fixed_n is not None and not self.fixed_n > 0:
            raise ValueError("fixed_n must be positive")

    def expected_photons(self, window_ms: float, efficiency: float = 1.0) -> float:
        if self.fixed_n is not None:
            return float(self.fixed_n)
        return self.post_rate * window_ms * 1e-3 * efficiency


@dataclass(frozen=True)
class CountRecord:
    n_plus: int
    n_minus: int
    window: float = 0.0  # ms
    theta_true: float = math.nan
    seed: int = 0

    @property
    def n_total(self):
        return self.n_plus + self.n_minus

    @property
    def contrast(self) -> float:
        n = self.n_total
        return (self.n_plus - self.n_minus) / n if n > 0 else math.nan


def derive_seed(master_seed: int, *indices: int) -> int:
    """64-bit seed for the stream at ``indices`` under ``master_seed``."""
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(i) for i in indices))
    return int(ss.generate_state(1, np.uint64)[0])


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def simulate_window(
    theta: float,
    model: WeakMeasurementModel,
    source: SourceSpec,
    noise: NoiseSpec = NoiseSpec(),
    window: float = 10.0,
    seed: int = 0,
    mode: str = EXACT,
    probs: Optional[OutcomeProbabilities] = None,
) -> CountRecord:
    """Counts on the two detectors for one integration window of ``window`` ms.

    ``probs`` short-circuits the model evaluation when the caller already
    has the outcome probabilities for ``theta``.
    """
    rng = rng_for(seed)
    if probs is None:
        probs = outcome_probabilities(theta, model, mode)
    t = window * 1e-3
    power = max(rng.normal(1.0, noise.power_rel_sigma), 0.0)
    if source.fixed_n is not None:
        n = int(source.fixed_n)
    else:
        n = int(rng.poisson(power * source.post_rate * t * noise.detector_efficiency))
    n_plus = int(rng.binomial(n, min(max(probs.p_plus, 0.0), 1.0)))
    n_minus = n - n_plus
    bg = rng.poisson(noise.background_rate * t, size=2)
    return CountRecord(
        n_plus=n_plus + int(bg[0]),
        n_minus=n_minus + int(bg[1]),
        window=window,
        theta_true=theta,
        seed=seed,
    )


@dataclass
class TrialStats:
    theta: float
    mean_contrast: float
    std_contrast: float
    records: List[CountRecord] = field(repr=False)

    @property
    def contrasts(self) -> np.ndarray:
        return np.array([r.contrast for r in self.records])


def run_trials(
    theta: float,
    model: WeakMeasurementModel,
    source: SourceSpec,
    noise: NoiseSpec = NoiseSpec(),
    window: float = 10.0,
    n_trials: int = 10,
    master_seed: int = 0,
    mode: str = EXACT,
    threads: int = 1,
    point_index: int = 0,
) -> TrialStats:
    """Repeat ``simulate_window`` ``n_trials`` times with independent streams."""
    if n_trials < 2:
        raise ValueError("n_trials must be >= 2")
    probs = outcome_probabilities(theta, model, mode)

    def one(i):
        seed = derive_seed(master_seed, point_index, i)
        return simulate_window(theta, model, source, noise, window, seed, mode, probs)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(one, range(n_trials)))
    else:
        records = [one(i) for i in range(n_trials)]
    c = np.array([r.contrast for r in records])
    c = c[np.isfinite(c)]
    mean = float(c.mean()) if c.size else math.nan
    std = float(c.std(ddof=1)) if c.size > 1 else math.nan
    return TrialStats(theta, mean, std, records)


@dataclass(frozen=True)
class SweepRow:
    value: float
    mean_contrast: float
    std_contrast: float
    exact_contrast: float
    theta_hat_mean: float
    theta_hat_std: float
    crb_std: float
    fisher: float

    def as_tuple(self):
        return (
            self.value,
            self.mean_contrast,
            self.std_contrast,
            self.exact_contrast,
            self.theta_hat_mean,
            self.theta_hat_std,
            self.crb_std,
            self.fisher,
        )


SWEEP_COLUMNS = (
    "value",
    "mean_contrast",
    "std_contrast",
    "exact_contrast",
    "theta_hat_mean",
    "theta_hat_std",
    "crb_std",
    "fisher",
)


def estimate_ensemble(records, model, interval, mode=EXACT) -> np.ndarray:
    out = np.full(len(records), math.nan)
    for i, rec in enumerate(records):
        if rec.n_total > 0:
            out[i] = estimate_theta(rec, model, interval, mode).theta_hat
    return out


def _sweep_point(
    index, kind, value, theta, model, source, noise, window, n_trials,
    master_seed, mode, interval,
):
    if kind == "theta":
        theta = value
    elif kind == "n_photons":
        source = SourceSpec(fixed_n=int(value))
    elif kind == "window":
        window = value
    else:
        raise ValueError(f"unknown sweep parameter {kind!r}; expected one of {SWEEP_KINDS}")
    stats = run_trials(
        theta, model, source, noise, window, n_trials, master_seed, mode, 1, index
    )
    exact = contrast(theta, model, EXACT)
    n_mean = source.expected_photons(window, noise.detector_efficiency)
    try:
        fisher = fisher_information(theta, model, mode)
    except PseudoSpinError:
        fisher = math.nan
    crb = crb_std(theta, model, n_mean, mode)
    branch = monotonic_branch(theta, model, interval)
    th_mean = th_std = math.nan
    if branch is not None:
        hats = estimate_ensemble(stats.records, model, branch, mode)
        hats = hats[np.isfinite(hats)]
        if hats.size > 1:
            th_mean, th_std = float(hats.mean()), float(hats.std(ddof=1))
    return SweepRow(
        float(value), stats.mean_contrast, stats.std_contrast, exact,
        th_mean, th_std, crb, fisher,
    )


def sweep(
    kind: str,
    grid: Sequence[float],
    model: WeakMeasurementModel,
    theta: float = 0.01,
    source: SourceSpec = SourceSpec(post_rate=5e4),
    noise: NoiseSpec = NoiseSpec(),
    window: float = 10.0,
    n_trials: int = 10,
    master_seed: int = 0,
    mode: str = EXACT,
    threads: int = 1,
    interval=DEFAULT_INTERVAL,
) -> List[SweepRow]:
    """One row of trial statistics per grid value of ``kind``.

    ``kind`` is ``theta`` (rad), ``n_photons`` (fixed photons per window)
    or ``window`` (ms). Rows come back in grid order whatever ``threads`` is.
    """
    if kind not in SWEEP_KINDS:
        raise ValueError(f"unknown sweep parameter {kind!r}; expected one of {SWEEP_KINDS}")
    grid = list(grid)
    if not grid:
        raise ValueError("sweep grid is empty")

    def point(i):
        try:
            return _sweep_point(
                i, kind, grid[i], theta, model, source, noise, window,
                n_trials, master_seed, mode, interval,
            )
        except PseudoSpinError as exc:
            raise type(exc)(f"{kind} = {grid[i]!r}: {exc}") from exc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(point, range(len(grid))))
    return [point(i) for i in range(len(grid))]
