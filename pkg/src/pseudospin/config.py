"""TOML experiment configuration.

Sections: ``[setup]`` or ``[model]`` (exactly one), ``[sweep]``,
``[source]``, ``[noise]``, ``[run]`` and ``[baseline]``. Angles are radians
unless given as a string with a ``deg`` or ``rad`` suffix (``"30 deg"``).
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import asdict, dataclass, replace
from typing import Any, Dict, Optional, Tuple

import numpy as np

try:
    import tomllib as tomli
except ModuleNotFoundError:  # Python < 3.11
    import tomli

from .errors import ParseError, ValidationError
from .estimation import DEFAULT_INTERVAL
from .model import MODES, MeterSpec, WeakMeasurementModel
from .montecarlo import SWEEP_KINDS, NoiseSpec, SourceSpec
from .optics import OpticalSetup, to_model

DEFAULT_TRIALS = 10  # repeated sets per point, as in the lab protocol

_SECTIONS = {
    "setup": {"wavelength", "theta_i", "n", "sigma"},
    "model": {"g", "sigma"},
    "sweep": {"kind", "grid", "start", "stop", "num", "theta"},
    "source": {"post_rate", "fixed_n", "window"},
    "noise": {"background_rate", "power_rel_sigma", "detector_efficiency"},
    "run": {"trials", "master_seed", "output", "mode", "estimate_interval", "threads"},
    "baseline": {"n_pixels", "half_width", "read_noise_sigma", "photons", "trials"},
}
_ANGLE_KEYS = {"theta_i", "theta"}
_ANGLE_RE = re.compile(r"^\s*([-+0-9.eE]+)\s*(deg|rad)\s*$")


@dataclass(frozen=True)
class SweepSpec:
    kind: str = "theta"
    grid: Tuple[float, ...] = tuple(np.linspace(-0.1, 0.1, 41).tolist())
    theta: float = 0.01


@dataclass(frozen=True)
class BaselineSpec:
    n_pixels: Tuple[int, ...] = (2, 16, 256)
    half_width: float = 8.0  # meter standard deviations
    read_noise_sigma: float = 0.0
    photons: int = 50000
    trials: int = 200


@dataclass(frozen=True)
class ExperimentConfig:
    setup: Optional[OpticalSetup] = None
    direct_g: Optional[float] = None
    direct_sigma: Optional[float] = None
    sweep: SweepSpec = SweepSpec()
    source: SourceSpec = SourceSpec(post_rate=5e4)
    window: float = 10.0  # ms
    noise: NoiseSpec = NoiseSpec()
    trials: int = DEFAULT_TRIALS
    master_seed: int = 0
    output: str = "pseudospin-out"
    mode: str = "exact"
    estimate_interval: Tuple[float, float] = DEFAULT_INTERVAL
    threads: int = 1
    baseline: BaselineSpec = BaselineSpec()

    def model(self) -> WeakMeasurementModel:
        if self.setup is not None:
            return to_model(self.setup)
        return WeakMeasurementModel(g=self.direct_g, meter=MeterSpec(self.direct_sigma))

    def canonical(self) -> Dict[str, Any]:
        """Resolved configuration as JSON-able data.

        ``output`` and ``threads`` are left out: they never change results.
        """
        d = asdict(self)
        d["sweep"]["grid"] = list(self.sweep.grid)
        del d["output"], d["threads"]
        return d

    def digest(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _angle(value, key):
    if isinstance(value, bool):
        raise ValidationError(f"{key}: expected an angle, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        m = _ANGLE_RE.match(value)
        if m:
            x = float(m.group(1))
            return math.radians(x) if m.group(2) == "deg" else x
    raise ValidationError(f"{key}: cannot read angle {value!r} (use radians or '<x> deg')")


def _number(value, key, kind=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{key}: expected a number, got {value!r}")
    if kind is int:
        if isinstance(value, float) and not value.is_integer():
            raise ValidationError(f"{key}: expected an integer, got {value!r}")
        return int(value)
    return float(value)


def _check_keys(doc):
    for section, body in doc.items():
        if section not in _SECTIONS:
            raise ParseError("unknown section", key=section)
        if not isinstance(body, dict):
            raise ParseError("expected a table", key=section)
        for k in body:
            if k not in _SECTIONS[section]:
                raise ParseError("unknown key", key=f"{section}.{k}")


def _build(cls, key, **kwargs):
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ValidationError(f"[{key}] {exc}") from None


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a TOML document into an ExperimentConfig."""
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ParseError(str(exc), line=int(m.group(1)) if m else None) from None
    _check_keys(doc)

    kw: Dict[str, Any] = {}
    if ("setup" in doc) == ("model" in doc):
        raise ValidationError("provide exactly one of [setup] and [model]")
    if "setup" in doc:
        s = doc["setup"]
        args = {}
        for k, v in s.items():
            args[k] = _angle(v, f"setup.{k}") if k in _ANGLE_KEYS else _number(v, f"setup.{k}")
        kw["setup"] = _build(OpticalSetup, "setup", **args)
    else:
        s = doc["model"]
        if "g" not in s or "sigma" not in s:
            raise ValidationError("[model] needs both g and sigma")
        kw["direct_g"] = _number(s["g"], "model.g")
        kw["direct_sigma"] = _number(s["sigma"], "model.sigma")
        if not kw["direct_sigma"] > 0:
            raise ValidationError("model.sigma must be positive")

    sw = doc.get("sweep", {})
    sweep_kw: Dict[str, Any] = {}
    if "kind" in sw:
        if sw["kind"] not in SWEEP_KINDS:
            raise ValidationError(f"sweep.kind must be one of {SWEEP_KINDS}, got {sw['kind']!r}")
        sweep_kw["kind"] = sw["kind"]
    kind = sweep_kw.get("kind", "theta")
    conv = (lambda v, k: _angle(v, k)) if kind == "theta" else _number
    if "grid" in sw:
        if any(k in sw for k in ("start", "stop", "num")):
            raise ValidationError("sweep: give either grid or start/stop/num, not both")
        if not isinstance(sw["grid"], list):
            raise ValidationError("sweep.grid must be an array")
        sweep_kw["grid"] = tuple(conv(v, "sweep.grid") for v in sw["grid"])
    elif any(k in sw for k in ("start", "stop", "num")):
        try:
            start, stop = conv(sw["start"], "sweep.start"), conv(sw["stop"], "sweep.stop")
            num = _number(sw["num"], "sweep.num", int)
        except KeyError as exc:
            raise ValidationError(f"sweep: missing {exc.args[0]}") from None
        sweep_kw["grid"] = tuple(np.linspace(start, stop, num).tolist())
    elif kind != "theta":
        raise ValidationError(f"sweep.kind = {kind!r} needs an explicit grid")
    if "theta" in sw:
        sweep_kw["theta"] = _angle(sw["theta"], "sweep.theta")
    kw["sweep"] = SweepSpec(**sweep_kw)
    if not kw["sweep"].grid:
        raise ValidationError("sweep grid must not be empty")
    if kind == "n_photons" and any(v < 1 or v != int(v) for v in kw["sweep"].grid):
        raise ValidationError("n_photons grid must hold positive integers")
    if kind == "window" and any(v <= 0 for v in kw["sweep"].grid):
        raise ValidationError("window grid must be positive (ms)")

    src = dict(doc.get("source", {}))
    if "window" in src:
        kw["window"] = _number(src.pop("window"), "source.window")
        if not kw["window"] > 0:
            raise ValidationError("source.window must be positive (ms)")
    if src:
        args = {}
        if "post_rate" in src:
            args["post_rate"] = _number(src["post_rate"], "source.post_rate")
        if "fixed_n" in src:
            args["fixed_n"] = _number(src["fixed_n"], "source.fixed_n", int)
        kw["source"] = _build(SourceSpec, "source", **args)

    if "noise" in doc:
        args = {k: _number(v, f"noise.{k}") for k, v in doc["noise"].items()}
        kw["noise"] = _build(NoiseSpec, "noise", **args)

    run = doc.get("run", {})
    if "trials" in run:
        kw["trials"] = _number(run["trials"], "run.trials", int)
        if kw["trials"] < 1:
            raise ValidationError("run.trials must be >= 1")
    if "master_seed" in run:
        kw["master_seed"] = _number(run["master_seed"], "run.master_seed", int)
        if not 0 <= kw["master_seed"] < 2**64:
            raise ValidationError("run.master_seed must be an unsigned 64-bit integer")
    if "output" in run:
        if not isinstance(run["output"], str):
            raise ValidationError("run.output must be a path string")
        kw["output"] = run["output"]
    if "mode" in run:
        if run["mode"] not in MODES:
            raise ValidationError(f"run.mode must be one of {MODES}")
        kw["mode"] = run["mode"]
    if "estimate_interval" in run:
        iv = run["estimate_interval"]
        if not isinstance(iv, list) or len(iv) != 2:
            raise ValidationError("run.estimate_interval must be [lo, hi]")
        lo, hi = (_angle(v, "run.estimate_interval") for v in iv)
        if not 0 < lo < hi:
            raise ValidationError("run.estimate_interval needs 0 < lo < hi")
        kw["estimate_interval"] = (lo, hi)
    if "threads" in run:
        kw["threads"] = _number(run["threads"], "run.threads", int)
        if kw["threads"] < 1:
            raise ValidationError("run.threads must be >= 1")

    if "baseline" in doc:
        b = doc["baseline"]
        args = {}
        if "n_pixels" in b:
            if not isinstance(b["n_pixels"], list) or not b["n_pixels"]:
                raise ValidationError("baseline.n_pixels must be a non-empty array")
            args["n_pixels"] = tuple(_number(v, "baseline.n_pixels", int) for v in b["n_pixels"])
            if any(v < 2 for v in args["n_pixels"]):
                raise ValidationError("baseline.n_pixels entries must be >= 2")
        for k in ("half_width", "read_noise_sigma"):
            if k in b:
                args[k] = _number(b[k], f"baseline.{k}")
        for k in ("photons", "trials"):
            if k in b:
                args[k] = _number(b[k], f"baseline.{k}", int)
        if args.get("half_width", 1.0) <= 0 or args.get("read_noise_sigma", 0.0) < 0:
            raise ValidationError("baseline: half_width > 0 and read_noise_sigma >= 0 required")
        if args.get("photons", 1) < 1 or args.get("trials", 2) < 2:
            raise ValidationError("baseline: photons >= 1 and trials >= 2 required")
        kw["baseline"] = BaselineSpec(**args)

    return ExperimentConfig(**kw)


def with_overrides(cfg: ExperimentConfig, seed=None, out=None, threads=None) -> ExperimentConfig:
    changes = {}
    if seed is not None:
        if not 0 <= seed < 2**64:
            raise ValidationError("--seed must be an unsigned 64-bit integer")
        changes["master_seed"] = seed
    if out is not None:
        changes["output"] = str(out)
    if threads is not None:
        if threads < 1:
            raise ValidationError("--threads must be >= 1")
        changes["threads"] = threads
    return replace(cfg, **changes)
