"""Command-line entry point.

    python run.py forward --potential data/potentials/mode_1.json --alpha 5 --out out/spectrum.json
    python run.py bundle --potential data/potentials/two_mode.json --alpha 1.5 --out out/bundle
    python run.py inverse4 --bundle out/bundle
    python run.py verify --seed 3
    python run.py identities

Exit status: 0 on success, 1 when a run completes but misses its tolerance,
2 on any error (one JSON line on stderr).
"""
import argparse
import json
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from app.commands import COMMANDS
from app.config import settings
from app.errors import ConfigError, OutputError, TrispecError
from app.schemas import RunConfig

LOG = logging.getLogger("trispec")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="trispec", description=f"{settings.app_name} {settings.app_version}")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--potential", dest="potential_path")
    parser.add_argument("--bundle", dest="bundle_dir")
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--trunc", type=int, dest="truncation_N")
    parser.add_argument("--tol", type=float)
    parser.add_argument("--out", dest="output_path")
    parser.add_argument("--format", choices=["json", "csv"], default="json")
    parser.add_argument("--symmetry", choices=["even", "odd"])
    parser.add_argument("--route", choices=["four", "even", "odd"], default="four")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--log-level", default=None)
    return parser


def fail(error: TrispecError) -> int:
    sys.stderr.write(json.dumps(error.to_dict(), sort_keys=False) + "\n")
    return 2


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except TrispecError as e:
        return fail(e)

    logging.basicConfig(
        level="DEBUG" if settings.debug else (args.log_level or settings.log_level).upper(),
        format="%(asctime)s [%(levelname)s] %(message)s",
        stream=sys.stderr,
    )

    try:
        config = RunConfig(
            command=args.command,
            potential_path=args.potential_path,
            bundle_dir=args.bundle_dir,
            alpha=args.alpha,
            truncation_N=args.truncation_N if args.truncation_N is not None else settings.truncation_n,
            tol=args.tol,
            output_path=args.output_path,
            format=args.format,
            symmetry=args.symmetry,
            route=args.route,
            seed=args.seed,
        )
    except ValidationError as e:
        return fail(ConfigError(e.errors()[0]["msg"]))

    try:
        with settings.overridden(recon_tol=config.tol, truncation_n=config.truncation_N):
            return COMMANDS[config.command](config)
    except TrispecError as e:
        return fail(e)
    except OSError as e:
        return fail(OutputError(f"{e.strerror or e}", path=str(e.filename)))


if __name__ == "__main__":
    sys.exit(main())
