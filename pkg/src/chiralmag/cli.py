"""Command line entry point.

Usage::

    chiralmag relax --config scenario.yaml [--out DIR] [--seed N] [--stride N]
    chiralmag evolve --config scenario.yaml [--restart checkpoint.npz]
    chiralmag string --config string.yaml
    chiralmag postprocess --config post.yaml

Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from chiralmag.config import ConfigError, load_config
from chiralmag.io import CheckpointError
from chiralmag.run import run

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def build_parser():
    parser = argparse.ArgumentParser(prog="chiralmag", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in ("relax", "evolve", "string", "postprocess"):
        p = sub.add_parser(mode)
        p.add_argument("--config", "-c", required=True, help="YAML scenario file")
        p.add_argument("--out", "-o", help="output directory (overrides output.dir)")
        p.add_argument("--seed", type=int, help="rng seed override")
        p.add_argument("--stride", type=int, help="trace stride override")
        p.add_argument("--snapshot-stride", type=int, help="snapshot stride override")
        p.add_argument("--max-steps", type=int, help="step budget override")
        if mode in ("relax", "evolve"):
            p.add_argument("--restart", help="resume from a checkpoint file")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {
        "mode": args.mode,
        "output.dir": args.out,
        "seed": args.seed,
        "output.stride": args.stride,
        "output.snapshot_stride": args.snapshot_stride,
        "dynamics.max_steps": args.max_steps,
    }
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        summary = run(cfg, getattr(args, "restart", None))
    except (ConfigError, CheckpointError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # surfaced to the shell as a runtime failure
        step = getattr(exc, "step", None)
        where = f" (step {step})" if step is not None else ""
        print(f"runtime failure{where}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    status = "converged" if summary.converged else "not converged"
    print(f"{summary.mode}: {status} after {summary.steps} steps; output in {summary.output_dir}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
