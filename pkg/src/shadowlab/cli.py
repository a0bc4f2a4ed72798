"""Command line entry point: ``shadowlab <verb> [flags]``."""
import argparse
import logging
import os
import sys

from .errors import ConfigError
from .experiment import (EXIT_IO, ExperimentConfig, bounds_report, inspect_splitting, perturb,
                         run_experiment, sweep)

VERBS = {
    "shadow": run_experiment,
    "sweep": sweep,
    "bounds": bounds_report,
    "inspect-splitting": inspect_splitting,
    "perturb": perturb,
}


def build_parser():
    p = argparse.ArgumentParser(prog="shadowlab",
                                description="Pseudo-orbit shadowing and attractor bounds.")
    p.add_argument("verb", choices=sorted(VERBS))
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--d", type=float, help="noise level (defect) of generated orbits")
    p.add_argument("--preset", help="system preset")
    return p


def resolve_config(args) -> ExperimentConfig:
    """Defaults, then the config file, then command-line flags."""
    data = {}
    if args.config:
        data = ExperimentConfig.load(args.config).to_dict()
    if args.preset is not None:
        if data.get("preset") not in (None, args.preset):
            # parameters of another preset do not carry over
            data.pop("params", None)
            data.pop("start", None)
        data["preset"] = args.preset
    if args.seed is not None:
        if args.seed < 0 or args.seed >= 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        data["seed"] = args.seed
    if args.out is not None:
        data["output_dir"] = args.out
    if args.d is not None:
        data["noise_level"] = args.d
    return ExperimentConfig.from_dict(data)


def _configure_logging():
    level = os.environ.get("SHADOWLAB_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None):
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    report = VERBS[args.verb](cfg)
    if report.exit_code == 0:
        print(f"{args.verb}: ok -> {cfg.output_dir}")
    else:
        where = f" at stage {report.stage}" if report.stage else ""
        print(f"{args.verb}: {report.status}{where}: {report.reason}", file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
