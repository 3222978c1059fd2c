import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import load_config, update_config_value
from .config_models import RunConfig
from .constants import ExitCodes
from .errors import ConfigError
from .parser import create_parser
from .handlers import (
    handle_oracle_command, handle_run_command, handle_schedule_command, handle_summarize_command,
    handle_sweep_command, handle_synth_trace_command,
)

# flag -> RunConfig field
OVERRIDES = {
    "seed": "seed",
    "rps": "target_rps",
    "policy": "scheduler_policy",
    "allocation": "allocation_policy",
    "cost_mode": "cost_mode",
    "catalog": "catalog_path",
    "trace": "trace_path",
    "schedule": "schedule_path",
    "out": "output_dir",
}


def setup_logging(debug=False):
    level = logging.DEBUG if debug else logging.WARNING
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )


def apply_overrides(config: RunConfig, args) -> RunConfig:
    """Apply command-line flags on top of the loaded config."""
    for flag, key in OVERRIDES.items():
        value = getattr(args, flag, None)
        if value is not None:
            config = update_config_value(config, key, value)
    if args.debug and not config.debug:
        config = update_config_value(config, "debug", True)
    return config


def build_config(args) -> RunConfig:
    config = load_config(Path(args.config) if args.config else None)
    return apply_overrides(config, args)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = create_parser()
    args = parser.parse_args(argv)

    setup_logging(args.debug)
    logger = logging.getLogger(__name__)

    if args.debug:
        logger.debug("Debug mode enabled")
        logger.debug(f"Arguments: {args}")

    if args.command == "summarize":
        return handle_summarize_command(Path(args.results), Path(args.out) if args.out else None, args.quiet)

    if args.command == "synth-trace":
        return handle_synth_trace_command(Path(args.out), args.functions, args.mean_per_minute, args.seed)

    try:
        config = build_config(args)
    except ConfigError as e:
        print(f"Error: {e}", file=sys.stderr)
        return ExitCodes.BAD_INPUT

    if config.debug and not args.debug:
        logging.getLogger().setLevel(logging.DEBUG)

    if args.command == "run":
        return handle_run_command(config, quiet=args.quiet)
    if args.command == "sweep":
        return handle_sweep_command(config, args.axis, args.values)
    if args.command == "oracle":
        return handle_oracle_command(config, quiet=args.quiet)
    if args.command == "schedule":
        return handle_schedule_command(config)

    parser.print_help()
    return ExitCodes.BAD_INPUT
