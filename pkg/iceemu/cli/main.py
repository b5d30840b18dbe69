"""
This module is the command-line front end of the emulator toolkit.

Verbs:
- `gen-data`: build the mesh and write every oracle frame of the configured rates and months.
- `train`: fit a GCN or FCN emulator on the training rates.
- `eval`: score an emulator on the held-out test rates.
- `bench`: time the oracle and the emulators on every configured frame.
- `sweep`: mean velocity/thickness trajectories, mass change and sea-level equivalent per rate.
- `gradcheck`: finite-difference check of every analytic gradient.

Global flags select the config file (`--config`), override the seed, output
directory and worker count, redirect output to a log file (`--log_file`) or
silence it (`--quiet`), and `--profile` prints a cProfile summary at the end.
"""

import argparse
import cProfile
import io
import pstats
import sys
from pathlib import Path

from iceemu.cli.commands import cmd_bench, cmd_eval, cmd_gen_data, cmd_gradcheck, cmd_sweep, cmd_train
from iceemu.cli.config import RunConfig, parse_rates
from iceemu.common.errors import IceEmuError
from iceemu.common.io_interface import ConsoleIOInterface, DummyIOInterface, IOInterface, LoggingIOInterface


def create_io_interface(args) -> IOInterface:
    """Pick where messages go based on the command line arguments."""
    if args.log_file:
        return LoggingIOInterface(args.log_file)
    if args.quiet:
        return DummyIOInterface()
    return ConsoleIOInterface()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="iceemu", description="Graph-network emulator toolkit for ice-sheet fields.")
    parser.add_argument("--config", type=str, help="Config file with [mesh] [graph] [oracle] ... sections")
    parser.add_argument("--seed", type=int, help="Run seed; overrides [run] seed")
    parser.add_argument("--out", type=str, help="Output directory; overrides [run] out")
    parser.add_argument("--workers", type=int, help="Worker processes for data generation; overrides [run] workers")
    parser.add_argument("--force", action="store_true", default=False, help="Overwrite existing outputs")
    parser.add_argument("--log_file", type=str, help="Append output to the specified file instead of the console")
    parser.add_argument("--quiet", action="store_true", default=False, help="Suppress all output")
    parser.add_argument(
        "--profile", action="store_true", default=False, help="Run the command with profiling to analyze performance."
    )
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("gen-data", help="Generate the mesh and oracle frames")

    train = commands.add_parser("train", help="Train an emulator")
    train.add_argument("--kind", choices=["gcn", "fcn"], default="gcn")

    evaluate = commands.add_parser("eval", help="Evaluate an emulator on the test rates")
    evaluate.add_argument("--kind", choices=["gcn", "fcn"], default="gcn")
    evaluate.add_argument("--artifact", type=str, help="Model artifact; defaults to <out>/<kind>/model.gemu")
    evaluate.add_argument(
        "--identity", action="store_true", default=False, help="Score the stored targets against themselves"
    )
    evaluate.add_argument("--maps", action="store_true", default=False, help="Write a map of the mean velocity error")

    bench = commands.add_parser("bench", help="Time the oracle and the emulators")
    bench.add_argument("--artifacts", nargs="*", type=str, help="Artifacts to time; defaults to <out>/{gcn,fcn}")
    bench.add_argument("--repetitions", type=int, help="Repetitions; overrides [run] bench_repetitions")

    sweep = commands.add_parser("sweep", help="Melting-rate sensitivity sweep")
    sweep.add_argument("--artifacts", nargs="*", type=str, default=[], help="Emulator artifacts to compare")
    sweep.add_argument("--rates", type=str, help="Rates, comma-separated or start:stop:step")
    sweep.add_argument("--months", type=int, help="Horizon in months; defaults to [data] months")
    sweep.add_argument("--maps", action="store_true", default=False, help="Write time-averaged field maps")

    gradcheck = commands.add_parser("gradcheck", help="Finite-difference gradient checks")
    gradcheck.add_argument("--kind", choices=["gcn", "fcn", "all"], default="all")
    gradcheck.add_argument("--samples", type=int, default=50, help="Coordinates sampled per parameter array")
    gradcheck.add_argument(
        "--corrupt", action="store_true", default=False, help="Scale one analytic gradient; the check must fail"
    )
    return parser


def load_config(args) -> RunConfig:
    overrides = {
        ("run", "seed"): args.seed,
        ("run", "out"): args.out,
        ("run", "workers"): args.workers,
    }
    if args.command == "bench":
        overrides[("run", "bench_repetitions")] = args.repetitions
    return RunConfig.load(args.config, overrides)


def run_command(args, io_interface: IOInterface):
    if args.command == "gradcheck":
        kinds = ("gcn", "fcn") if args.kind == "all" else (args.kind,)
        seed = args.seed if args.seed is not None else 0
        return cmd_gradcheck(io_interface, kinds, sample_count=args.samples, seed=seed, corrupt=args.corrupt)

    config = load_config(args)
    if args.command == "gen-data":
        return cmd_gen_data(config, io_interface, args.force)
    if args.command == "train":
        return cmd_train(config, args.kind, io_interface, args.force)
    if args.command == "eval":
        artifact = Path(args.artifact) if args.artifact else None
        return cmd_eval(config, args.kind, io_interface, artifact, args.identity, args.maps, args.force)
    if args.command == "bench":
        artifacts = None
        if args.artifacts:
            artifacts = {Path(path).parent.name or Path(path).stem: Path(path) for path in args.artifacts}
        return cmd_bench(config, io_interface, artifacts, args.force)
    if args.command == "sweep":
        rates = parse_rates(args.rates) if args.rates is not None else None
        paths = [Path(path) for path in args.artifacts]
        return cmd_sweep(config, io_interface, paths, rates, args.months, args.maps, args.force)
    raise ValueError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    """
    Parse the command line, run one command and return its exit code.

    Errors raised by the toolkit are reported through the chosen interface and
    mapped to their exit code: 2 for configuration, 3 for validation and 4 for
    numerical aborts.
    """
    args = build_parser().parse_args(argv)
    io_interface = create_io_interface(args)

    profiler = None
    if args.profile:
        profiler = cProfile.Profile()
        profiler.enable()

    try:
        run_command(args, io_interface)
        code = 0
    except IceEmuError as exc:
        if isinstance(io_interface, DummyIOInterface):
            print(f"error: {exc}", file=sys.stderr)
        else:
            io_interface.output(f"error: {exc}")
        code = exc.exit_code

    if args.profile and profiler is not None:
        profiler.disable()
        s = io.StringIO()
        sortby = "tottime"
        ps = pstats.Stats(profiler, stream=s).sort_stats(sortby)
        ps.print_stats()
        print(s.getvalue())
    return code


if __name__ == "__main__":
    sys.exit(main())
