"""Command-line entry point: ``pseudospin <subcommand> --config FILE``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import parse_config, with_overrides
from .errors import ConfigError, PseudoSpinError
from .presets import preset_text
from .runner import COMMANDS, run_verify

EXIT_OK = 0
EXIT_CHECKS_FAILED = 1
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3

log = logging.getLogger("pseudospin")

_DEFAULT_CONFIG = """
[setup]
"""


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pseudospin", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "sweep": "Monte Carlo sweep over angle, photon number or window",
        "fisher": "sensitivity, Fisher information and CRB over an angle grid",
        "simulate": "one integration window and its angle estimate",
        "compare-baseline": "two-detector pointer against a pixel array",
        "verify": "run the invariant suite and print pass/fail per check",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text)
        src = sp.add_mutually_exclusive_group()
        src.add_argument("--config", type=Path, help="TOML experiment config")
        src.add_argument("--preset", help="built-in config: fig3, fig4, fig5, fig6")
        sp.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
        sp.add_argument("--out", type=Path, help="output directory")
        sp.add_argument("--threads", type=int, help="worker threads")
        if name == "verify":
            sp.add_argument("--quick", action="store_true", help="skip the Monte Carlo CRB check")
    return p


def _load(args):
    if args.config is not None:
        text = args.config.read_text(encoding="utf-8")
    elif args.preset is not None:
        text = preset_text(args.preset)
    else:
        text = _DEFAULT_CONFIG
    cfg = parse_config(text)
    return with_overrides(cfg, seed=args.seed, out=args.out, threads=args.threads)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = _load(args)
    except (ConfigError, KeyError) as exc:
        log.error("config error: %s", exc)
        return EXIT_VALIDATION
    except OSError as exc:
        log.error("cannot read config: %s", exc)
        return EXIT_VALIDATION
    out = Path(cfg.output)
    try:
        if args.command == "verify":
            written, results = run_verify(cfg, out, quick=args.quick)
            for path in written.values():
                log.info("wrote %s", path)
            return EXIT_OK if all(r.passed for r in results) else EXIT_CHECKS_FAILED
        written = COMMANDS[args.command](cfg, out)
    except (PseudoSpinError, OSError, ValueError) as exc:
        log.error("%s failed: %s", args.command, exc)
        return EXIT_RUNTIME
    for path in written.values():
        log.info("wrote %s", path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
