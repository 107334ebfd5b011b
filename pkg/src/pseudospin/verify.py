"""Invariant checks behind the ``verify`` subcommand.

Each check returns a measured value and the bound it must respect; the
acceptance tests reuse the same functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List

import numpy as np

from .baseline import PixelArraySpec, fisher_comparison, pixel_probabilities
from .estimation import (
    DEFAULT_INTERVAL,
    crb_variance,
    estimate_theta,
    optimal_working_point,
)
from .model import (
    FIRSTORDER,
    WeakMeasurementModel,
    contrast_firstorder,
    kraus_amplitude,
    outcome_probabilities_exact,
)
from .montecarlo import SourceSpec, estimate_ensemble, run_trials
from .optics import OpticalSetup, fresnel, shel_contrast, to_model

LAB_SETUP = OpticalSetup()


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tolerance: float
    relation: str = "<="

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.value):
            return False
        if self.relation == "<=":
            return self.value <= self.tolerance
        return self.value >= self.tolerance


def crb_identity(n_grid=1000, seed=0) -> float:
    """Worst relative gap between error propagation and 1/(N F) on a random grid."""
    rng = np.random.default_rng(seed)
    thetas = rng.uniform(1e-3, 1.5, n_grid)
    ratios = 10 ** rng.uniform(-4, -1, n_grid) * rng.choice([-1, 1], n_grid)
    ns = rng.integers(1, 10**6, n_grid)
    worst = 0.0
    for t, r, n in zip(thetas, ratios, ns):
        crb, prop = crb_variance(t, WeakMeasurementModel.from_ratio(r, 27.0), n, FIRSTORDER)
        worst = max(worst, abs(prop - crb) / crb)
    return worst


def closed_form_composition(setup=LAB_SETUP, n_grid=1000) -> float:
    theta = np.linspace(-0.3, 0.3, n_grid)
    theta = theta[np.abs(theta) > 1e-12]
    return float(np.max(np.abs(shel_contrast(theta, setup) - contrast_firstorder(theta, to_model(setup)))))


def kraus_closed_form(n_grid=1000, seed=1) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for t, g, u in zip(rng.uniform(-np.pi, np.pi, n_grid), rng.uniform(-5, 5, n_grid),
                       rng.uniform(-3, 3, n_grid)):
        m = WeakMeasurementModel(g=g, meter=_METER)
        amp = kraus_amplitude(u, m, t)
        worst = max(worst, abs(abs(amp) ** 2 - math.sin(t + g * u) ** 2))
    return worst


def regime_grid(n_theta=40, ratios=(1e-4, 1e-3, 3.27e-3, 1e-2, 3e-2, 1e-1)):
    """(theta, g/sigma) pairs with |g cot/sigma| <= 0.5 and sin^2 >= 10 (g/sigma)^2."""
    pts = []
    for eps in ratios:
        for t in np.geomspace(1e-4, np.pi / 2 - 1e-3, n_theta):
            if abs(eps / math.tan(t)) <= 0.5 and math.sin(t) ** 2 >= 10 * eps**2:
                pts.append((t, eps))
    return pts


def firstorder_agreement(sigma=27.0) -> float:
    worst = 0.0
    for t, eps in regime_grid():
        m = WeakMeasurementModel.from_ratio(eps, sigma)
        exact = outcome_probabilities_exact(t, m).contrast
        approx = float(contrast_firstorder(t, m))
        worst = max(worst, abs(exact - approx) / abs(approx))
    return worst


def normalization(sigma=27.0) -> float:
    worst = 0.0
    for t in (-1.0, -0.01, 0.0, 0.003, 0.05, 1.2):
        for eps in (-0.05, 1e-4, 3.27e-3, 0.3):
            p = outcome_probabilities_exact(t, WeakMeasurementModel.from_ratio(eps, sigma))
            worst = max(worst, abs(p.p_plus + p.p_minus - 1.0))
    return worst


def crb_tracking(model, theta=0.01, n=50000, trials=1000, master_seed=0, threads=1,
                 interval=DEFAULT_INTERVAL):
    """Relative gap between the Monte Carlo estimator spread and sqrt(CRB)."""
    stats = run_trials(theta, model, SourceSpec(fixed_n=n), n_trials=trials,
                       master_seed=master_seed, threads=threads)
    hats = estimate_ensemble(stats.records, model, interval)
    bound = math.sqrt(crb_variance(theta, model, n).crb_var)
    return abs(np.std(hats, ddof=1) / bound - 1.0), float(np.std(hats, ddof=1)), bound


def data_processing_gap(model, thetas, pixel_counts=(2, 16, 256)) -> float:
    """Largest excess of two-bin over pixel Fisher information (rad^-2)."""
    worst = -math.inf
    for t in thetas:
        for n in pixel_counts:
            fc = fisher_comparison(t, model, PixelArraySpec.covering(n, model))
            worst = max(worst, fc.f_twobin - fc.f_pixels)
    return worst


def two_pixel_equality(model, thetas) -> float:
    px = PixelArraySpec.covering(2, model)
    return max(abs(fisher_comparison(t, model, px).ratio - 1.0) for t in thetas)


def refinement_violation(model, thetas) -> float:
    worst = -math.inf
    for t in thetas:
        prev = None
        for n in (2, 4, 8, 16, 32, 64, 128, 256):
            f = fisher_comparison(t, model, PixelArraySpec.covering(n, model)).f_pixels
            if prev is not None:
                worst = max(worst, prev - f)
            prev = f
    return worst


def reduction_consistency(model, thetas) -> float:
    worst = 0.0
    for t in thetas:
        p = pixel_probabilities(t, model, PixelArraySpec.covering(16, model))
        ex = outcome_probabilities_exact(t, model)
        worst = max(worst, abs(p[8:].sum() - ex.p_plus), abs(p[:8].sum() - ex.p_minus))
    return worst


def fisher_ratio_at_optimum(model, n_pixels=256, interval=DEFAULT_INTERVAL) -> float:
    theta = optimal_working_point(model, interval)
    return fisher_comparison(theta, model, PixelArraySpec.covering(n_pixels, model)).ratio


def thread_invariance(model, master_seed=0) -> float:
    """Count of trial records that differ between 1 and 4 threads."""
    a = run_trials(0.01, model, SourceSpec(post_rate=5e4), n_trials=50,
                   master_seed=master_seed, threads=1).records
    b = run_trials(0.01, model, SourceSpec(post_rate=5e4), n_trials=50,
                   master_seed=master_seed, threads=4).records
    return float(sum(x != y for x, y in zip(a, b)))


def fresnel_bounds() -> float:
    worst = 0.0
    for ti in np.linspace(1e-3, math.pi / 2 - 1e-3, 400):
        fc = fresnel(OpticalSetup(theta_i=ti))
        worst = max(worst, fc.r_p**2 - 1.0, fc.r_s**2 - 1.0)
    return worst


def brewster_crossings() -> float:
    rp = [fresnel(OpticalSetup(theta_i=t)).r_p for t in np.linspace(1e-4, math.pi / 2 - 1e-4, 4000)]
    return float(np.sum(np.diff(np.sign(rp)) != 0))


def round_trip(model, theta=0.01, n=50000, interval=DEFAULT_INTERVAL) -> float:
    from .montecarlo import CountRecord

    p = outcome_probabilities_exact(theta, model)
    rec = CountRecord(n * p.p_plus, n * p.p_minus)
    return abs(estimate_theta(rec, model, interval).theta_hat - theta)


_METER = to_model(LAB_SETUP).meter


def run_checks(cfg=None, quick=False) -> List[CheckResult]:
    model = cfg.model() if cfg is not None else to_model(LAB_SETUP)
    seed = cfg.master_seed if cfg is not None else 0
    interval = cfg.estimate_interval if cfg is not None else DEFAULT_INTERVAL
    thetas = (0.004, 0.0052, 0.01, 0.03, 0.1, 0.3)
    checks: List[tuple] = [
        ("crb_saturation_identity", lambda: crb_identity(), 1e-12, "<="),
        ("closed_form_optics_vs_weak_value", lambda: closed_form_composition(), 1e-12, "<="),
        ("kraus_closed_form", lambda: kraus_closed_form(), 1e-12, "<="),
        ("outcome_normalization", normalization, 1e-10, "<="),
        ("firstorder_agreement_in_regime", firstorder_agreement, 0.01, "<="),
        ("fresnel_energy_bound", fresnel_bounds, 0.0, "<="),
        ("brewster_single_crossing", brewster_crossings, 1.0, "<="),
        ("mle_round_trip_rad", lambda: round_trip(model, interval=interval), 1e-10, "<="),
        ("data_processing_inequality_abs", lambda: data_processing_gap(model, thetas), 1e-9, "<="),
        ("two_pixel_equality_rel", lambda: two_pixel_equality(model, thetas), 1e-12, "<="),
        ("pixel_refinement_monotone_abs", lambda: refinement_violation(model, thetas), 1e-9, "<="),
        ("pixel_reduction_consistency", lambda: reduction_consistency(model, thetas), 1e-9, "<="),
        ("fisher_ratio_at_optimum_256px", lambda: fisher_ratio_at_optimum(model, interval=interval), 0.5, ">="),
        ("thread_invariance_mismatches", lambda: thread_invariance(model, seed), 0.0, "<="),
    ]
    if not quick:
        checks.append(
            ("crb_tracking_rel_gap", lambda: crb_tracking(model, master_seed=seed, interval=interval)[0], 0.10, "<=")
        )
    return [CheckResult(name, float(fn()), tol, rel) for name, fn, tol, rel in checks]
