import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import dawsn

from oracles import LAB_FISHER_001, LAB_SLOPE_RIGHT, LAB_STD_001
from pseudospin.errors import ContrastOutOfRange, EmptyFrame, NonMonotonicInterval
from pseudospin.estimation import (
    DEFAULT_INTERVAL,
    crb_std,
    crb_variance,
    estimate_theta,
    fisher_information,
    invert_contrast,
    monotonic_branch,
    optimal_working_point,
    pointer_variance,
    richardson_derivative,
    sensitivity,
)
from pseudospin.model import FIRSTORDER, WeakMeasurementModel, contrast, outcome_probabilities
from pseudospin.montecarlo import CountRecord


def test_pointer_variance_binomial():
    p = outcome_probabilities(0.3, WeakMeasurementModel.from_ratio(0.01))
    assert pointer_variance(p, 100) == pytest.approx((1 - p.contrast**2) / 100, rel=1e-12)
    with pytest.raises(ValueError):
        pointer_variance(p, 0)


def test_richardson_on_polynomial():
    assert richardson_derivative(lambda x: x**5, 1.3, 1e-3) == pytest.approx(5 * 1.3**4, rel=1e-11)


def test_firstorder_slope_vs_numeric(lab_model):
    for t in (0.004, 0.01, 0.1, 1.0):
        numeric = richardson_derivative(lambda x: contrast(x, lab_model, FIRSTORDER), t)
        assert sensitivity(t, lab_model, FIRSTORDER) == pytest.approx(numeric, rel=1e-8)


class TestWorkingPoint:
    def test_fisher_and_bound(self, lab_model):
        assert fisher_information(0.01, lab_model, FIRSTORDER) == pytest.approx(LAB_FISHER_001, rel=1e-12)
        assert crb_std(0.01, lab_model, 5e4, FIRSTORDER) == pytest.approx(LAB_STD_001, rel=1e-12)
        # exact model differs from first order at the 1e-5 level here
        assert fisher_information(0.01, lab_model) == pytest.approx(LAB_FISHER_001, rel=1e-4)
        assert crb_std(0.01, lab_model, 5e4) == pytest.approx(1.037e-4, rel=1e-3)

    def test_right_angle_slope(self, lab_model):
        eps = lab_model.coupling_ratio
        assert sensitivity(math.pi / 2, lab_model, FIRSTORDER) == pytest.approx(LAB_SLOPE_RIGHT, rel=1e-12)
        # d/dtheta of sin(2 theta) D / (sqrt(pi) P_ps) at pi/2, where dP_ps/dtheta = 0
        p_ps = (1 + math.exp(-2 * eps**2)) / 2
        exact = -2 * dawsn(math.sqrt(2) * eps) / math.sqrt(math.pi) / p_ps
        assert sensitivity(math.pi / 2, lab_model) == pytest.approx(exact, rel=1e-11)

    def test_right_angle_precision(self, lab_model):
        # no amplification: the pointer splits evenly so F = slope^2
        for n in (500, 1500):
            assert crb_std(math.pi / 2, lab_model, n) == pytest.approx(
                1 / (math.sqrt(n) * abs(LAB_SLOPE_RIGHT)), rel=1e-5
            )
            p = outcome_probabilities(math.pi / 2, lab_model)
            assert math.sqrt(pointer_variance(p, n)) == pytest.approx(1 / math.sqrt(n), rel=1e-12)

    def test_optimum(self, lab_model):
        t = optimal_working_point(lab_model)
        f = fisher_information(t, lab_model)
        assert DEFAULT_INTERVAL[0] < t < 0.01
        for dt in (-1e-4, 1e-4):
            assert fisher_information(t + dt, lab_model) < f


class TestCRB:
    @settings(max_examples=100, deadline=None)
    @given(
        theta=st.floats(1e-3, 1.5),
        log_eps=st.floats(-4, -1),
        n=st.integers(1, 10**6),
    )
    def test_saturation_identity(self, theta, log_eps, n):
        crb, prop = crb_variance(theta, WeakMeasurementModel.from_ratio(10**log_eps), n, FIRSTORDER)
        assert prop == pytest.approx(crb, rel=1e-12)

    def test_identity_holds_in_exact_mode(self, lab_model):
        crb, prop = crb_variance(0.02, lab_model, 1234)
        assert prop == pytest.approx(crb, rel=1e-12)

    def test_scaling_with_photons(self, lab_model):
        a = crb_std(0.02, lab_model, 1000)
        b = crb_std(0.02, lab_model, 100000)
        assert a / b == pytest.approx(10.0, rel=1e-12)

    def test_no_coupling_is_nan(self):
        assert math.isnan(crb_std(0.3, WeakMeasurementModel.from_ratio(0.0), 100))


class TestInversion:
    def test_non_monotonic_interval_rejected(self, lab_model):
        # the contrast peaks near atan|g/sigma| ~ 3.27e-3
        with pytest.raises(NonMonotonicInterval):
            invert_contrast(-0.5, lab_model, (0.002, 0.3))

    def test_default_interval_is_monotonic(self, lab_model):
        grid = np.linspace(*DEFAULT_INTERVAL, 2000)
        c = np.array([contrast(t, lab_model) for t in grid])
        assert np.all(np.diff(c) > 0)

    @pytest.mark.parametrize("theta", [0.0045, 0.01, 0.05, 0.29])
    def test_round_trip(self, theta, lab_model):
        c = contrast(theta, lab_model)
        t_hat, sat = invert_contrast(c, lab_model)
        assert not sat
        assert t_hat == pytest.approx(theta, abs=1e-10)

    def test_estimate_from_expected_counts(self, lab_model):
        p = outcome_probabilities(0.01, lab_model)
        rep = estimate_theta(CountRecord(5e4 * p.p_plus, 5e4 * p.p_minus), lab_model)
        assert rep.theta_hat == pytest.approx(0.01, abs=1e-10)
        assert rep.std_theta == pytest.approx(crb_std(0.01, lab_model, 5e4), rel=1e-6)
        assert rep.n_total == pytest.approx(5e4)

    def test_saturation(self, lab_model):
        rep = estimate_theta(CountRecord(0, 100), lab_model)
        assert rep.saturated and rep.theta_hat == DEFAULT_INTERVAL[0]
        rep = estimate_theta(CountRecord(50, 50), lab_model)
        assert rep.saturated and rep.theta_hat == DEFAULT_INTERVAL[1]
        with pytest.raises(ContrastOutOfRange):
            estimate_theta(CountRecord(0, 100), lab_model, strict=True)

    def test_empty_frame(self, lab_model):
        with pytest.raises(EmptyFrame):
            estimate_theta(CountRecord(0, 0), lab_model)

    def test_mirrored_branch(self, lab_model):
        assert monotonic_branch(0.01, lab_model) == DEFAULT_INTERVAL
        assert monotonic_branch(-0.01, lab_model) == (-DEFAULT_INTERVAL[1], -DEFAULT_INTERVAL[0])
        assert monotonic_branch(0.001, lab_model) is None
        p = outcome_probabilities(-0.02, lab_model)
        rep = estimate_theta(CountRecord(1e4 * p.p_plus, 1e4 * p.p_minus), lab_model,
                             monotonic_branch(-0.02, lab_model))
        assert rep.theta_hat == pytest.approx(-0.02, abs=1e-10)

    @settings(max_examples=40, deadline=None)
    @given(theta=st.floats(DEFAULT_INTERVAL[0], DEFAULT_INTERVAL[1]))
    def test_round_trip_property(self, theta):
        m = WeakMeasurementModel.from_ratio(-0.0032679117664646254, 27.0)
        t_hat, _ = invert_contrast(contrast(theta, m), m)
        assert t_hat == pytest.approx(theta, abs=1e-10)
