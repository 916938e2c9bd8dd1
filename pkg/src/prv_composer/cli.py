"""Command-line front-end."""

import argparse
import json
import sys
from collections.abc import Sequence
from typing import TextIO

from pydantic import ValidationError

from prv_composer import __version__
from prv_composer.accountant import PrvAccountant
from prv_composer.commands.compose import handle_compose
from prv_composer.commands.curve import handle_curve
from prv_composer.commands.dpsgd import handle_dpsgd
from prv_composer.commands.report import (
    load_compose_config,
    render_report,
    render_validation,
    write_json,
)
from prv_composer.commands.validate_gaussian import handle_validate_gaussian
from prv_composer.config import Config
from prv_composer.errors import NumericalGuardError, PrvComposerError
from prv_composer.utils.logger import get_logger, setup_logging

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prv-composer",
        description="Bounds on the privacy curve of composed differentially private mechanisms",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--settings", help="YAML settings file (numerics, budget, logging)")
    parser.add_argument(
        "--log-level",
        choices=["debug", "info", "warning", "error", "critical"],
        help="Override the configured log level",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("compose", help="Compose the mechanisms of a JSON config")
    s.add_argument("--config", required=True, help="Path to the compose config (JSON)")
    s.add_argument("--out", help="Write the JSON report to this path")
    s.set_defaults(func=cmd_compose)

    s = sub.add_parser("dpsgd", help="Epsilon of DP-SGD (subsampled Gaussian, self-composed)")
    s.add_argument("--sigma", type=float, required=True, help="Noise multiplier")
    s.add_argument("--sampling-prob", type=float, required=True, help="Poisson sampling rate")
    s.add_argument("--steps", type=int, required=True, help="Number of iterations")
    s.add_argument("--delta", type=float, required=True, help="Target delta")
    s.add_argument("--eps-error", type=float, default=0.1, help="Additive epsilon accuracy")
    s.add_argument(
        "--delta-error", type=float, help="Additive delta accuracy (default: delta/1000)"
    )
    s.add_argument(
        "--inverted-direction",
        action="store_true",
        help="Account for the reversed neighbouring relation",
    )
    s.add_argument("--out", help="Write the JSON report to this path")
    s.set_defaults(func=cmd_dpsgd)

    s = sub.add_parser("curve", help="Write the delta(eps) curve of a config as CSV")
    s.add_argument("--config", required=True, help="Path to a compose config with a curve query")
    s.add_argument("--out", required=True, help="Output CSV path")
    s.set_defaults(func=cmd_curve)

    s = sub.add_parser(
        "validate-gaussian", help="Check the composed bounds against the closed-form Gaussian"
    )
    s.add_argument("--sigma", type=float, required=True, help="Noise multiplier")
    s.add_argument("--steps", type=int, required=True, help="Number of compositions")
    s.add_argument("--eps-error", type=float, required=True, help="Additive epsilon accuracy")
    s.add_argument("--delta-error", type=float, default=1e-10, help="Additive delta accuracy")
    s.add_argument("--num-points", type=int, default=21, help="Epsilon grid size")
    s.set_defaults(func=cmd_validate_gaussian)

    return parser


def cmd_compose(args: argparse.Namespace, accountant: PrvAccountant, out: TextIO) -> int:
    logger = get_logger("cli")
    config = load_compose_config(args.config)
    report = handle_compose(config, accountant, logger)
    out.write(render_report(report))
    if args.out:
        write_json(report, args.out)
    return EXIT_OK


def cmd_dpsgd(args: argparse.Namespace, accountant: PrvAccountant, out: TextIO) -> int:
    logger = get_logger("cli")
    report = handle_dpsgd(
        sigma=args.sigma,
        sampling_prob=args.sampling_prob,
        steps=args.steps,
        delta=args.delta,
        accountant=accountant,
        logger=logger,
        eps_error=args.eps_error,
        delta_error=args.delta_error,
        inverted=args.inverted_direction,
    )
    out.write(render_report(report))
    if args.out:
        write_json(report, args.out)
    return EXIT_OK


def cmd_curve(args: argparse.Namespace, accountant: PrvAccountant, out: TextIO) -> int:
    logger = get_logger("cli")
    config = load_compose_config(args.config)
    metadata = handle_curve(config, args.out, accountant, logger)
    out.write(
        f"wrote {args.out} (h={metadata.mesh!r}, L={metadata.half_width!r}, k={metadata.k})\n"
    )
    return EXIT_OK


def cmd_validate_gaussian(args: argparse.Namespace, accountant: PrvAccountant, out: TextIO) -> int:
    logger = get_logger("cli")
    validation = handle_validate_gaussian(
        sigma=args.sigma,
        steps=args.steps,
        eps_error=args.eps_error,
        accountant=accountant,
        logger=logger,
        delta_error=args.delta_error,
        num_points=args.num_points,
    )
    out.write(render_validation(validation))
    return EXIT_OK if validation.passed else NumericalGuardError.exit_code


def error_line(code: str, exit_code: int, message: str) -> str:
    """The single machine-parsable failure line."""
    return f"error code={code} exit={exit_code} message={json.dumps(message)}"


def run(
    argv: Sequence[str] | None = None,
    out: TextIO | None = None,
    err: TextIO | None = None,
) -> int:
    """Parse arguments, run one command and map failures to exit codes."""
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)

    try:
        config = Config.load(args.settings)
        if args.log_level:
            config.logging.level = args.log_level
        logger = setup_logging(config.logging)
        accountant = PrvAccountant(config, logger.getChild("accountant"))
        return int(args.func(args, accountant, out))
    except PrvComposerError as e:
        print(error_line(e.code, e.exit_code, str(e)), file=err)
        return e.exit_code
    except ValidationError as e:
        detail = "; ".join(
            f"{'.'.join(str(part) for part in error['loc'])}: {error['msg']}"
            for error in e.errors()
        )
        print(error_line("validation", EXIT_VALIDATION, detail), file=err)
        return EXIT_VALIDATION
    except OSError as e:
        print(error_line("io", EXIT_IO, str(e)), file=err)
        return EXIT_IO
