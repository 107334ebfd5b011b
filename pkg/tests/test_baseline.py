import math

import numpy as np
import pytest
from scipy import integrate

from pseudospin.baseline import (
    PixelArraySpec,
    pixel_probability_slopes,
    centroid_estimate,
    compare_estimators,
    fisher_comparison,
    mean_position,
    pixel_fisher,
    pixel_probabilities,
    simulate_frame,
)
from pseudospin.errors import EmptyFrame
from pseudospin.model import WeakMeasurementModel, outcome_probabilities_exact

THETAS = (0.004, 0.0052, 0.01, 0.03, 0.1, 0.3)


def density(u, theta, model):
    s = model.sigma
    return math.sin(theta + model.g * u) ** 2 * s / math.sqrt(2 * math.pi) * math.exp(-0.5 * (u * s) ** 2)


def test_pixel_validation():
    with pytest.raises(ValueError):
        PixelArraySpec(1, 1.0)
    with pytest.raises(ValueError):
        PixelArraySpec(4, 1.0, read_noise_sigma=-1)


def test_pixels_against_adaptive_quadrature(lab_model):
    px = PixelArraySpec.covering(16, lab_model)
    p = pixel_probabilities(0.01, lab_model, px)
    e = px.edges
    raw = np.array([integrate.quad(density, a, b, args=(0.01, lab_model), epsabs=0, epsrel=1e-12)[0]
                    for a, b in zip(e[:-1], e[1:])])
    assert p == pytest.approx(raw / raw.sum(), rel=1e-9, abs=1e-14)


@pytest.mark.parametrize("theta", THETAS)
def test_two_halves_reproduce_detectors(theta, lab_model):
    p = pixel_probabilities(theta, lab_model, PixelArraySpec.covering(16, lab_model))
    ex = outcome_probabilities_exact(theta, lab_model)
    assert p.sum() == pytest.approx(1.0, abs=1e-12)
    assert p[8:].sum() == pytest.approx(ex.p_plus, abs=1e-9)


def test_narrow_array_loses_mass(lab_model):
    p = pixel_probabilities(0.3, lab_model, PixelArraySpec.covering(8, lab_model, half_width=1.0))
    assert 0.6 < p.sum() < 0.75  # about erf(1/sqrt 2)


@pytest.mark.parametrize("theta", THETAS)
def test_data_processing(theta, lab_model):
    for n in (2, 16, 256):
        fc = fisher_comparison(theta, lab_model, PixelArraySpec.covering(n, lab_model))
        assert fc.f_twobin <= fc.f_pixels + 1e-9


@pytest.mark.parametrize("theta", THETAS)
def test_two_pixels_equal_two_bins(theta, lab_model):
    fc = fisher_comparison(theta, lab_model, PixelArraySpec.covering(2, lab_model))
    assert fc.ratio == pytest.approx(1.0, rel=1e-12)


def test_refinement_never_loses_information(lab_model):
    for theta in (0.0052, 0.05):
        f = [pixel_fisher(theta, lab_model, PixelArraySpec.covering(n, lab_model))[0]
             for n in (2, 4, 8, 16, 32, 64, 128, 256)]
        assert all(b >= a - 1e-9 for a, b in zip(f, f[1:]))


def test_fisher_ratio_profile(lab_model):
    px = PixelArraySpec.covering(256, lab_model)
    r_opt = fisher_comparison(0.0052, lab_model, px).ratio
    r_mid = fisher_comparison(0.01, lab_model, px).ratio
    r_far = fisher_comparison(0.3, lab_model, px).ratio
    assert r_opt < r_mid < r_far
    # far from the dark fringe the density is a shifted Gaussian and the
    # sign-only readout keeps 2/pi of the information
    assert r_far == pytest.approx(2 / math.pi, rel=0.02)


def test_no_coupling_has_no_information():
    m = WeakMeasurementModel.from_ratio(0.0, 27.0)
    assert pixel_fisher(0.1, m, PixelArraySpec.covering(16, m))[0] == 0.0


def test_frame_and_centroid(lab_model):
    px = PixelArraySpec.covering(64, lab_model)
    fr = simulate_frame(0.01, lab_model, px, 50000, seed=4)
    assert fr.pixel_counts.sum() == 50000
    rep = centroid_estimate(fr, lab_model, px)
    assert rep.theta_hat == pytest.approx(0.01, abs=5 * rep.std_theta)
    with pytest.raises(EmptyFrame):
        centroid_estimate(simulate_frame(0.01, lab_model, px, 0), lab_model, px)


def test_read_noise_keeps_counts_nonnegative(lab_model):
    px = PixelArraySpec.covering(64, lab_model, read_noise_sigma=3.0)
    fr = simulate_frame(0.01, lab_model, px, 100, seed=1)
    assert fr.pixel_counts.min() >= 0


def test_mean_position_sign(lab_model):
    px = PixelArraySpec.covering(64, lab_model)
    assert np.sign(mean_position(0.01, lab_model, px)) == np.sign(
        outcome_probabilities_exact(0.01, lab_model).contrast
    )


def test_ensemble_spreads_track_their_bounds(lab_model):
    px = PixelArraySpec.covering(64, lab_model)
    r = compare_estimators(0.05, lab_model, px, 20000, n_trials=200, master_seed=3)
    assert r.std_twobin == pytest.approx(r.crb_twobin, rel=0.2)
    assert r.std_pixels == pytest.approx(r.crb_pixels, rel=0.2)
    assert r.std_twobin > r.std_pixels


@pytest.mark.parametrize("theta", [0.0052, 0.05])
def test_pixel_slopes_match_finite_differences(theta, lab_model):
    px = PixelArraySpec.covering(32, lab_model)
    _, dp = pixel_probability_slopes(theta, lab_model, px)
    h = 1e-6
    fd = (pixel_probabilities(theta + h, lab_model, px) - pixel_probabilities(theta - h, lab_model, px)) / (2 * h)
    assert dp == pytest.approx(fd, rel=1e-6, abs=1e-9)
    assert dp.sum() == pytest.approx(0.0, abs=1e-12)
