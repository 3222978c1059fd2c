import argparse
from . import __version__
from .constants import Defaults, FileNames, SweepAxes


def add_basic_arguments(parser: argparse.ArgumentParser) -> None:
    """Add basic arguments like version, debug, etc."""
    parser.add_argument(
        "-v", "--version",
        action="version",
        version=f"%(prog)s {__version__}"
    )

    parser.add_argument(
        "-d", "--debug",
        action="store_true",
        help="Enable debug mode with detailed logging"
    )


def add_config_arguments(parser: argparse.ArgumentParser) -> None:
    """Add the config file and the flags that override its values."""
    parser.add_argument(
        "--config",
        type=str,
        metavar="PATH",
        help="Flat JSON run configuration (defaults apply to missing keys)"
    )

    parser.add_argument(
        "--seed",
        type=int,
        help=f"Seed for the schedule and routing streams (default: {Defaults.SEED})"
    )

    parser.add_argument(
        "--rps",
        type=float,
        help=f"Target requests per second (default: {Defaults.TARGET_RPS})"
    )

    parser.add_argument(
        "--policy",
        type=str,
        help="Scheduler policy: hashing, packing or memory-centric-baseline"
    )

    parser.add_argument(
        "--allocation",
        type=str,
        help="Allocation policy: learned, static-medium or static-large"
    )

    parser.add_argument(
        "--cost-mode",
        type=str,
        help="vCPU cost mode: absolute or proportional"
    )

    parser.add_argument(
        "--catalog",
        type=str,
        metavar="PATH",
        help="Catalog JSON (default: bundled demo catalog)"
    )

    parser.add_argument(
        "--trace",
        type=str,
        metavar="PATH",
        help="Per-minute invocation trace CSV (default: synthesized from the seed)"
    )

    parser.add_argument(
        "--schedule",
        type=str,
        metavar="PATH",
        help="Replay this schedule CSV instead of drawing one from the trace"
    )

    parser.add_argument(
        "--out",
        type=str,
        metavar="DIR",
        help=f"Output directory (default: {Defaults.OUTPUT_DIR})"
    )

    parser.add_argument(
        "-q", "--quiet",
        action="store_true",
        help="Do not print the metrics table"
    )


def add_sweep_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--axis",
        type=str,
        required=True,
        choices=SweepAxes.ALL,
        help="Config value to sweep"
    )

    parser.add_argument(
        "--values",
        type=str,
        nargs='+',
        required=True,
        help="Values of the axis, one independent run each"
    )


def add_summarize_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--results",
        type=str,
        required=True,
        metavar="PATH",
        help=f"A {FileNames.RESULTS} written by a run"
    )

    parser.add_argument(
        "--out",
        type=str,
        metavar="DIR",
        help="Where to write metrics.csv (default: next to the results file)"
    )

    parser.add_argument(
        "-q", "--quiet",
        action="store_true",
        help="Do not print the metrics table"
    )


def add_synth_trace_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--out",
        type=str,
        default=FileNames.TRACE,
        metavar="PATH",
        help=f"Trace file to write (default: {FileNames.TRACE})"
    )

    parser.add_argument(
        "--functions",
        type=int,
        default=50,
        help="Number of trace rows (default: 50)"
    )

    parser.add_argument(
        "--mean-per-minute",
        type=float,
        default=300.0,
        help="Mean aggregate invocations per minute (default: 300)"
    )

    parser.add_argument(
        "--seed",
        type=int,
        default=Defaults.SEED,
        help=f"Generator seed (default: {Defaults.SEED})"
    )


def create_parser():
    parser = argparse.ArgumentParser(
        prog="faas-rightsizer",
        description="FaaS rightsizing simulator - learned vCPU and memory allocation on a simulated cluster",
        formatter_class=argparse.RawDescriptionHelpFormatter
    )

    add_basic_arguments(parser)

    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True

    run = commands.add_parser("run", help="Simulate one configuration and write results.csv and metrics.csv")
    add_config_arguments(run)

    sweep = commands.add_parser("sweep", help="Run one simulation per axis value and merge a summary.csv")
    add_config_arguments(sweep)
    add_sweep_arguments(sweep)

    oracle = commands.add_parser("oracle", help="Brute-force minimum vCPUs and memory per catalog input")
    add_config_arguments(oracle)

    summarize = commands.add_parser("summarize", help="Regenerate metrics.csv from a results.csv")
    add_summarize_arguments(summarize)

    synth = commands.add_parser("synth-trace", help="Write a synthetic per-minute invocation trace")
    add_synth_trace_arguments(synth)

    schedule = commands.add_parser("schedule", help="Write the arrival schedule a run would replay")
    add_config_arguments(schedule)

    return parser
