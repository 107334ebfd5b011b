"""Config-driven runs: compute tables, write CSV, SVG and a manifest."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path
from typing import Dict, List, Sequence

import numpy as np

from . import __version__, plotting
from .baseline import PixelArraySpec, compare_estimators, fisher_comparison
from .config import ExperimentConfig
from .errors import PseudoSpinError
from .estimation import (
    crb_std,
    estimate_theta,
    fisher_information,
    monotonic_branch,
    optimal_working_point,
    sensitivity,
)
from .model import EXACT, contrast_firstorder, outcome_probabilities
from .montecarlo import SWEEP_COLUMNS, derive_seed, simulate_window, sweep
from .verify import run_checks


class Table:
    """Column-named rows destined for one CSV file."""

    def __init__(self, columns: Sequence[str]):
        self.columns = tuple(columns)
        self.rows: List[tuple] = []

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(f"expected {len(self.columns)} values, got {len(values)}")
        self.rows.append(tuple(values))

    def __getitem__(self, name):
        i = self.columns.index(name)
        return [r[i] for r in self.rows]


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(table: Table, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table.columns)
        for row in table.rows:
            w.writerow([_fmt(v) for v in row])


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _finish(cfg: ExperimentConfig, command: str, out: Path, tables, figures) -> Dict[str, Path]:
    out.mkdir(parents=True, exist_ok=True)
    written = {}
    for name, table in tables.items():
        path = out / f"{name}.csv"
        write_csv(table, path)
        written[name] = path
    for name, draw in figures.items():
        path = out / f"{name}.svg"
        draw(path)
        written[name + "_svg"] = path
    manifest = {
        "tool": "pseudospin",
        "version": __version__,
        "command": command,
        "config_sha256": cfg.digest(),
        "master_seed": cfg.master_seed,
        "config": cfg.canonical(),
        "files": {p.name: _sha256(p) for p in written.values() if p.suffix == ".csv"},
    }
    path = out / f"manifest_{command}.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    written["manifest"] = path
    return written


def sweep_table(cfg: ExperimentConfig) -> Table:
    rows = sweep(
        cfg.sweep.kind,
        cfg.sweep.grid,
        cfg.model(),
        theta=cfg.sweep.theta,
        source=cfg.source,
        noise=cfg.noise,
        window=cfg.window,
        n_trials=max(cfg.trials, 2),
        master_seed=cfg.master_seed,
        mode=cfg.mode,
        threads=cfg.threads,
        interval=cfg.estimate_interval,
    )
    table = Table((cfg.sweep.kind,) + SWEEP_COLUMNS[1:])
    for r in rows:
        table.add(*r.as_tuple())
    return table


def run_sweep(cfg: ExperimentConfig, out: Path):
    table = sweep_table(cfg)
    name = f"sweep_{cfg.sweep.kind}"
    plot_view = Table(("value",) + table.columns[1:])
    plot_view.rows = table.rows
    return _finish(
        cfg, "sweep", out, {name: table},
        {name: lambda p: plotting.plot_sweep(plot_view, cfg.sweep.kind, p)},
    )


def _theta_grid(cfg):
    if cfg.sweep.kind == "theta":
        return list(cfg.sweep.grid)
    return np.linspace(-0.1, 0.1, 41).tolist()


def fisher_table(cfg: ExperimentConfig) -> Table:
    model = cfg.model()
    n = cfg.source.expected_photons(cfg.window, cfg.noise.detector_efficiency)
    table = Table(
        ("theta", "p_plus", "p_ps", "contrast_exact", "contrast_firstorder",
         "sensitivity", "fisher", "crb_std")
    )
    for theta in _theta_grid(cfg):
        probs = outcome_probabilities(theta, model, EXACT)
        try:
            c1 = float(contrast_firstorder(theta, model))
        except PseudoSpinError:
            c1 = math.nan
        try:
            slope = sensitivity(theta, model, cfg.mode)
            fisher = fisher_information(theta, model, cfg.mode)
        except PseudoSpinError:
            slope = fisher = math.nan
        table.add(
            theta, probs.p_plus, probs.p_ps, probs.contrast, c1, slope, fisher,
            crb_std(theta, model, n, cfg.mode),
        )
    return table


def run_fisher(cfg: ExperimentConfig, out: Path):
    table = fisher_table(cfg)
    return _finish(cfg, "fisher", out, {"fisher": table},
                   {"fisher": lambda p: plotting.plot_fisher(table, p)})


def simulate_table(cfg: ExperimentConfig) -> Table:
    model = cfg.model()
    theta = cfg.sweep.theta
    seed = derive_seed(cfg.master_seed, 0, 0)
    rec = simulate_window(theta, model, cfg.source, cfg.noise, cfg.window, seed, cfg.mode)
    theta_hat, std, saturated = math.nan, math.nan, False
    branch = monotonic_branch(theta, model, cfg.estimate_interval)
    if branch is not None and rec.n_total > 0:
        rep = estimate_theta(rec, model, branch, cfg.mode)
        theta_hat, std, saturated = rep.theta_hat, rep.std_theta, rep.saturated
    table = Table(
        ("theta_true", "window_ms", "seed", "n_plus", "n_minus", "contrast",
         "theta_hat", "std_theta", "saturated")
    )
    table.add(theta, rec.window, rec.seed, rec.n_plus, rec.n_minus, rec.contrast,
              theta_hat, std, saturated)
    return table


def run_simulate(cfg: ExperimentConfig, out: Path):
    return _finish(cfg, "simulate", out, {"simulate": simulate_table(cfg)}, {})


def baseline_tables(cfg: ExperimentConfig):
    model = cfg.model()
    b = cfg.baseline
    lo, hi = cfg.estimate_interval
    theta_opt = optimal_working_point(model, cfg.estimate_interval)
    thetas = sorted(set(np.geomspace(lo, hi, 13).tolist()) | {theta_opt, cfg.sweep.theta})
    fisher = Table(("theta", "n_pixels", "f_twobin", "f_pixels", "ratio", "excluded_pixels"))
    for theta in thetas:
        for n in b.n_pixels:
            px = PixelArraySpec.covering(n, model, b.half_width, b.read_noise_sigma)
            fc = fisher_comparison(theta, model, px)
            fisher.add(theta, n, fc.f_twobin, fc.f_pixels, fc.ratio, fc.excluded)
    mc = Table(("theta", "n_pixels", "photons", "trials", "std_twobin", "std_pixels",
                "std_ratio", "crb_twobin", "crb_pixels"))
    theta = cfg.sweep.theta
    for n in b.n_pixels:
        px = PixelArraySpec.covering(n, model, b.half_width, b.read_noise_sigma)
        r = compare_estimators(theta, model, px, b.photons, b.trials, cfg.master_seed,
                               cfg.estimate_interval, cfg.threads)
        mc.add(theta, n, b.photons, b.trials, r.std_twobin, r.std_pixels, r.ratio,
               r.crb_twobin, r.crb_pixels)
    return fisher, mc


def run_compare_baseline(cfg: ExperimentConfig, out: Path):
    fisher, mc = baseline_tables(cfg)
    return _finish(cfg, "compare-baseline", out,
                   {"baseline_fisher": fisher, "baseline_mc": mc},
                   {"baseline_fisher": lambda p: plotting.plot_baseline(fisher, p)})


def run_verify(cfg: ExperimentConfig, out: Path, echo=print, quick=False):
    results = run_checks(cfg, quick=quick)
    table = Table(("check", "value", "tolerance", "passed"))
    for r in results:
        table.add(r.name, r.value, r.tolerance, r.passed)
        if echo is not None:
            echo(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.value:.6g} ({r.relation} {r.tolerance:g})")
    written = _finish(cfg, "verify", out, {"verify": table}, {})
    return written, results


COMMANDS = {
    "sweep": run_sweep,
    "fisher": run_fisher,
    "simulate": run_simulate,
    "compare-baseline": run_compare_baseline,
}
