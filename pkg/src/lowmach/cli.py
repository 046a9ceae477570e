"""Command-line entry point: ``lowmach <subcommand> --config file.json``.

Exit status: 0 when every threshold check passes, 1 when the run completed
but some check failed, 2 on a runtime or configuration error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

from .harness import experiments
from .harness.config import config_schema, load_config

COMMANDS = {
    "sweep-wp": ("well-prepared Mach sweep", experiments.sweep_wp, True),
    "sweep-ill": ("ill-prepared sweep with acoustic correction", experiments.sweep_ill, True),
    "acoustic-decay": ("dispersion exponent experiment", experiments.acoustic_decay, False),
    "energy-check": ("discrete energy monotonicity audit for one run", experiments.energy_check, False),
    "residual": ("weak-form residual refinement study", experiments.residual, False),
    "ensemble": ("vanishing-viscosity ensembles with defect ledger", experiments.ensemble, True),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lowmach", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, (help_text, _, _) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", required=True, type=Path, help="JSON experiment config")
        sp.add_argument("--out", type=Path, default=None,
                        help="output directory (default: config 'out', else results/<command>)")
        sp.add_argument("--threads", type=int, default=1, help="parallel sweep members")
        sp.add_argument("--seed", type=int, default=None,
                        help="seed for random initial data (overrides v0.seed)")
        sp.add_argument("-v", "--verbose", action="store_true")
    sub.add_parser("schema", help="print the JSON schema of the config file")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "schema":
        print(json.dumps(config_schema(), indent=2, sort_keys=True))
        return 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2 ** 64:
                raise ValueError("--seed must be an unsigned 64-bit integer")
            cfg = cfg.model_copy(update={"v0": cfg.v0.model_copy(update={"seed": args.seed})})
        if args.threads < 1:
            raise ValueError("--threads must be >= 1")
        out = args.out or Path(cfg.out or Path("results") / args.command)
        _, fn, parallel = COMMANDS[args.command]
        kwargs = {"workers": args.threads} if parallel else {}
        _, checks = fn(cfg, out, **kwargs)
    except (OSError, ValueError, ValidationError) as err:
        print(f"lowmach {args.command}: error: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # any other failure is a runtime error, not a threshold miss
        logging.getLogger("lowmach").exception("run failed")
        print(f"lowmach {args.command}: runtime error: {type(err).__name__}: {err}", file=sys.stderr)
        return 2
    for name, ok in checks.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    print(f"outputs written to {out}")
    return 0 if all(checks.values()) else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
