"""Acceptance gate: one check per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or directly as a script.
"""

import math
import time

import numpy as np
import pytest

from pseudospin import verify
from pseudospin.baseline import PixelArraySpec, fisher_comparison
from pseudospin.config import parse_config, with_overrides
from pseudospin.estimation import DEFAULT_INTERVAL, crb_std, optimal_working_point
from pseudospin.montecarlo import SourceSpec, run_trials
from pseudospin.optics import OpticalSetup, to_model
from pseudospin.presets import preset_text
from pseudospin.runner import run_sweep, run_verify

pytestmark = pytest.mark.acceptance

SETUP = OpticalSetup(wavelength=632.8, theta_i=math.radians(30.0), n=1.515, sigma=27.0)
MODEL = to_model(SETUP)


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def crb_saturation():
    worst, dt = _timed(lambda: verify.crb_identity(n_grid=1000))
    return worst <= 1e-12 and dt < 1.0, f"max rel gap {worst:.2e} (<= 1e-12), {dt:.2f} s (< 1 s)"


def optics_composition():
    worst, dt = _timed(lambda: verify.closed_form_composition(SETUP, n_grid=1000))
    return worst < 1e-12 and dt < 1.0, f"max |diff| {worst:.2e} (< 1e-12), {dt:.2f} s (< 1 s)"


def exact_oracle():
    def run():
        return verify.kraus_closed_form(n_grid=1000), verify.firstorder_agreement()

    (kraus, agree), dt = _timed(run)
    ok = kraus <= 1e-12 and agree <= 0.01 and dt < 10.0
    return ok, f"Kraus {kraus:.2e} (<= 1e-12), first-order rel {agree:.2e} (<= 1e-2), {dt:.2f} s (< 10 s)"


def precision_claim():
    def run():
        theta_opt = optimal_working_point(MODEL, DEFAULT_INTERVAL)
        best = crb_std(theta_opt, MODEL, 50000)
        gap, std, bound = verify.crb_tracking(MODEL, theta=0.01, n=50000, trials=1000)
        return theta_opt, best, gap, std, bound

    (theta_opt, best, gap, std, bound), dt = _timed(run)
    ok = 1e-5 <= best <= 2e-4 and gap <= 0.10 and dt < 60.0
    detail = (
        f"min sqrt(CRB) {best:.3e} rad at theta {theta_opt:.5f} (in [1e-5, 2e-4]), "
        f"MC std {std:.4e} vs sqrt(CRB) {bound:.4e}, gap {gap:.3f} (<= 0.10), {dt:.1f} s (< 60 s)"
    )
    return ok, detail


def contrast_noise_band():
    def run():
        out = {}
        for i, n in enumerate((500, 1500)):
            stats = run_trials(math.pi / 2, MODEL, SourceSpec(fixed_n=n), n_trials=1000,
                               master_seed=0, point_index=i)
            out[n] = stats.std_contrast
        return out

    stds, dt = _timed(run)
    targets = {500: 0.0447, 1500: 0.0258}
    ok = all(abs(stds[n] / t - 1) <= 0.10 for n, t in targets.items()) and dt < 10.0
    detail = ", ".join(f"N={n}: {stds[n]:.4f} (target {t})" for n, t in targets.items())
    return ok, f"{detail}, {dt:.2f} s (< 10 s)"


def integration_time_scaling():
    def run():
        stds = []
        for i, window in enumerate((10.0, 1000.0)):
            stats = run_trials(0.01, MODEL, SourceSpec(post_rate=5e4), window=window,
                               n_trials=100, master_seed=0, point_index=i)
            stds.append(stats.std_contrast)
        return stds[0] / stds[1]

    ratio, dt = _timed(run)
    ok = abs(ratio / 10.0 - 1) <= 0.25 and dt < 30.0
    return ok, f"std(10 ms)/std(1000 ms) = {ratio:.3f} (10 +/- 25%), {dt:.2f} s (< 30 s)"


def data_processing():
    thetas = np.geomspace(DEFAULT_INTERVAL[0], DEFAULT_INTERVAL[1], 9).tolist() + [0.01]

    def run():
        return (
            verify.data_processing_gap(MODEL, thetas),
            verify.two_pixel_equality(MODEL, thetas),
            verify.fisher_ratio_at_optimum(MODEL, 256),
            fisher_comparison(0.01, MODEL, PixelArraySpec.covering(256, MODEL)).ratio,
        )

    (gap, eq, ratio, ratio_001), dt = _timed(run)
    ok = gap <= 1e-9 and eq <= 1e-12 and ratio >= 0.5 and dt < 30.0
    detail = (
        f"max F2-Fpix {gap:.1e} (<= 1e-9), 2-pixel rel diff {eq:.1e} (<= 1e-12), "
        f"F2/F256 at optimum {ratio:.3f} (>= 0.5; {ratio_001:.3f} at theta 0.01), {dt:.1f} s (< 30 s)"
    )
    return ok, detail


def determinism(tmp_path):
    def outputs(threads):
        out = tmp_path / f"t{threads}"
        cfg = with_overrides(parse_config("[setup]\n"), threads=threads)
        run_verify(cfg, out / "verify", echo=None)
        for name in ("fig4", "fig5"):
            run_sweep(with_overrides(parse_config(preset_text(name)), threads=threads), out / name)
        return {p.relative_to(out): p.read_bytes() for p in sorted(out.rglob("*.csv"))}

    ref = outputs(1)
    mismatched = [str(k) for t in (4, 8) for k, v in outputs(t).items() if ref.get(k) != v]
    ok = not mismatched and len(ref) == 3
    return ok, f"{len(ref)} CSVs compared across 1/4/8 threads, mismatches: {mismatched or 'none'}"


CRITERIA = [
    ("1 CRB saturation identity", crb_saturation),
    ("2 optics closed form vs weak-value route", optics_composition),
    ("3 exact-model oracle", exact_oracle),
    ("4 precision at N = 50000", precision_claim),
    ("5 contrast-noise band", contrast_noise_band),
    ("6 integration-time scaling", integration_time_scaling),
    ("7 data-processing inequality", data_processing),
    ("8 determinism across threads", determinism),
]


def _report(label, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  criterion {label}: {detail}"
    print(line)
    return line


@pytest.mark.parametrize("label,check", CRITERIA, ids=[c[0].split()[0] for c in CRITERIA])
def test_criterion(label, check, tmp_path, capsys):
    ok, detail = check(tmp_path) if check is determinism else check()
    with capsys.disabled():
        print()
        _report(label, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    import sys
    import tempfile
    from pathlib import Path

    failures = 0
    for label, check in CRITERIA:
        if check is determinism:
            with tempfile.TemporaryDirectory() as d:
                ok, detail = check(Path(d))
        else:
            ok, detail = check()
        _report(label, ok, detail)
        failures += not ok
    sys.exit(1 if failures else 0)
