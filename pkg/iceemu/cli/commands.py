"""
The command implementations behind the ``iceemu`` verbs.

Every command takes a resolved RunConfig, reports through an IOInterface and
writes its files under the configured output directory. Existing outputs are
only replaced when ``force`` is set.
"""

from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from iceemu.cli.bench import bench_lines, hardware_description, run_bench, write_bench_csv
from iceemu.cli.config import RunConfig
from iceemu.cli.graph import SweepGraph, field_map
from iceemu.cli.sweep import FOOTER, SweepReport, build_sweep, write_sweep_series, write_sweep_summary
from iceemu.common.errors import ConfigError, GradientCheckError
from iceemu.common.io_interface import IOInterface
from iceemu.mesh.mesh import Mesh, read_mesh, write_mesh
from iceemu.models.grid import GridSpec
from iceemu.models.suites import run_gradcheck_suites
from iceemu.nn.artifact import ModelArtifact, read_artifact, write_artifact
from iceemu.oracle.dataset import generate_dataset, generate_transport_dataset
from iceemu.oracle.fields import OracleConfig, calibrate_oracle
from iceemu.oracle.frames import FrameSet, export_frames, import_frames
from iceemu.oracle.transport import mass_balance_report
from iceemu.pipeline.emulator import Emulator, TargetEmulator, load_emulator
from iceemu.pipeline.metrics import Metrics, evaluate_predictions
from iceemu.pipeline.split import split_frames
from iceemu.pipeline.stats import TrainingHistory
from iceemu.pipeline.train import train

MESH_FILE = "mesh.csv"
FRAMES_FILE = "frames.csv"
CONFIG_FILE = "config.ini"
ARTIFACT_FILE = "model.gemu"


def prepare_outputs(paths: Sequence[Path], force: bool):
    """
    :raises ConfigError: If any path exists and force is not set
    """
    for path in paths:
        if path.exists() and not force:
            raise ConfigError(f"{path} already exists; pass --force to overwrite")
    for path in paths:
        path.parent.mkdir(parents=True, exist_ok=True)


def default_artifact(config: RunConfig, kind: str) -> Path:
    return Path(config.out) / kind / ARTIFACT_FILE


def oracle_frames(
    mesh: Mesh, oracle: OracleConfig, rates: Sequence[float], months: int, config: RunConfig, io_interface: IOInterface
) -> FrameSet:
    generate = generate_transport_dataset if config.mode == "transport" else generate_dataset
    return generate(mesh, oracle, rates, months, workers=config.workers, io_interface=io_interface)


def load_mesh(config: RunConfig) -> Mesh:
    """The stored mesh when gen-data has run, else the configured one."""
    path = Path(config.out) / MESH_FILE
    return read_mesh(path) if path.exists() else config.build_mesh()


def load_frames(config: RunConfig) -> FrameSet:
    out = Path(config.out)
    mesh_file, frames_file = out / MESH_FILE, out / FRAMES_FILE
    if not mesh_file.exists() or not frames_file.exists():
        raise ConfigError(f"no dataset in {out}; run gen-data first")
    return import_frames(mesh_file, frames_file)


def cmd_gen_data(config: RunConfig, io_interface: IOInterface, force: bool = False) -> FrameSet:
    """Generate the mesh and every frame of the configured rates and months."""
    out = Path(config.out)
    paths = [out / MESH_FILE, out / FRAMES_FILE, out / CONFIG_FILE]
    if config.mode == "transport":
        paths.append(out / "mass_balance.txt")
    prepare_outputs(paths, force)

    mesh = config.build_mesh()
    io_interface.output(f"Mesh: {mesh}")
    oracle = calibrate_oracle(config.oracle_config(), mesh)
    frames = oracle_frames(mesh, oracle, config.rates, config.months, config, io_interface)

    write_mesh(mesh, out / MESH_FILE)
    export_frames(frames, out / FRAMES_FILE)
    config.write(out / CONFIG_FILE)
    if config.mode == "transport":
        lines = []
        for rate in frames.rates:
            lines += mass_balance_report(frames, rate, oracle).report_lines()
        (out / "mass_balance.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    io_interface.output(f"Wrote {len(frames)} frames to {out / FRAMES_FILE}")
    return frames


def cmd_train(config: RunConfig, kind: str, io_interface: IOInterface, force: bool = False):
    """Train one emulator on the training rates; validation rates pick the checkpoint."""
    target = Path(config.out) / kind
    paths = [target / ARTIFACT_FILE, target / "history.csv", target / CONFIG_FILE]
    prepare_outputs(paths, force)

    frames = load_frames(config)
    train_frames, val_frames, _ = split_frames(frames, config.split_spec())
    io_interface.output(
        f"Training {kind} on {len(train_frames)} frames, validating on {len(val_frames)} frames"
    )
    grid_spec = GridSpec.covering(frames.mesh, config.grid_cells) if kind == "fcn" else None
    artifact, history = train(
        frames.mesh,
        train_frames,
        val_frames,
        config.train_config(kind),
        config.model_config(kind),
        graph_options=config.graph_options(),
        grid_spec=grid_spec,
        io_interface=io_interface,
    )
    write_artifact(artifact, paths[0])
    history.write_csv(paths[1], include_timing=False)
    config.write(paths[2])
    io_interface.output_lines(history_summary(history))
    io_interface.output(f"Training took {sum(record.wall_seconds for record in history.records):.1f} s")
    io_interface.output(f"Artifact written to {paths[0]}")
    return artifact, history


def cmd_eval(
    config: RunConfig,
    kind: str,
    io_interface: IOInterface,
    artifact_path: Optional[Path] = None,
    identity: bool = False,
    maps: bool = False,
    force: bool = False,
) -> Metrics:
    """
    Score an emulator on the test rates.

    With identity set the stored targets stand in for predictions, which must score perfectly.
    """
    target = Path(config.out) / ("identity" if identity else kind) / "eval"
    paths = [target / "metrics.txt", target / "metrics.csv", target / CONFIG_FILE]
    if maps:
        paths.append(target / "velocity_error_map.png")
    prepare_outputs(paths, force)

    frames = load_frames(config)
    _, _, test = split_frames(frames, config.split_spec())
    if len(test) == 0:
        raise ConfigError("the dataset contains none of the configured test rates")
    if identity:
        emulator: Emulator = TargetEmulator(test)
    else:
        emulator = load_emulator(read_artifact(artifact_path or default_artifact(config, kind)), frames.mesh)

    predictions = emulator.predict_frames(test)
    metrics = evaluate_predictions(predictions, test)
    metrics.write_report(paths[0])
    metrics.write_csv(paths[1])
    config.write(paths[2])
    if maps:
        predicted_speed = np.hypot(predictions[..., 0], predictions[..., 1])
        error = np.abs(predicted_speed - np.hypot(test.fields[..., 0], test.fields[..., 1])).mean(axis=(0, 1))
        field_map(frames.mesh, error, f"Mean absolute velocity error ({emulator.kind})", "m/year", paths[3])
    io_interface.output_lines(metrics.report_lines())
    return metrics


def cmd_bench(
    config: RunConfig,
    io_interface: IOInterface,
    artifact_paths: Optional[Dict[str, Path]] = None,
    force: bool = False,
):
    """Median wall time over the configured repetitions for every configured (rate, month)."""
    target = Path(config.out) / "bench"
    paths = [target / "bench.csv", target / "bench.txt", target / CONFIG_FILE]
    prepare_outputs(paths, force)

    if artifact_paths is None:
        artifact_paths = {kind: default_artifact(config, kind) for kind in ("gcn", "fcn")}
    mesh = load_mesh(config)
    oracle = calibrate_oracle(config.oracle_config(), mesh)
    emulators = {}
    for name, path in artifact_paths.items():
        if not Path(path).exists():
            io_interface.output(f"Skipping {name}: no artifact at {path}")
            continue
        emulators[name] = load_emulator(read_artifact(path), mesh)

    timings = run_bench(mesh, oracle, emulators, config.rates, config.months, config.bench_repetitions)
    hardware = hardware_description()
    lines = bench_lines(timings, hardware)
    write_bench_csv(timings, hardware, paths[0])
    paths[1].write_text("\n".join(lines) + "\n", encoding="utf-8")
    config.write(paths[2])
    io_interface.output_lines(lines)
    return timings


def _source_names(artifacts: Sequence[ModelArtifact]) -> List[str]:
    names = []
    for artifact in artifacts:
        name = artifact.kind
        suffix = 2
        while name in names:
            name = f"{artifact.kind}{suffix}"
            suffix += 1
        names.append(name)
    return names


def cmd_sweep(
    config: RunConfig,
    io_interface: IOInterface,
    artifact_paths: Sequence[Path] = (),
    rates: Optional[Sequence[float]] = None,
    months: Optional[int] = None,
    maps: bool = False,
    force: bool = False,
) -> List[SweepReport]:
    """
    Mean-field trajectories of the oracle and every given emulator over a set of melting rates.

    :raises ConfigError: If the horizon has no months or no rate is given
    """
    rates = sorted(float(rate) for rate in (config.sweep_rates if rates is None else rates))
    months = config.months if months is None else months
    if months < 1:
        raise ConfigError(f"the sweep horizon must contain at least one month, got {months}")
    if not rates:
        raise ConfigError("the sweep needs at least one melting rate")

    target = Path(config.out) / "sweep"
    artifacts = [read_artifact(path) for path in artifact_paths]
    names = ["oracle"] + _source_names(artifacts)
    paths = [target / "sweep_series.csv", target / "sweep_summary.csv", target / "sweep.txt", target / "sweep.png"]
    if maps:
        for name in names:
            for rate in rates:
                paths += [target / f"{name}_m{rate:g}_speed.png", target / f"{name}_m{rate:g}_thickness.png"]
    prepare_outputs(paths + [target / CONFIG_FILE], force)

    mesh = load_mesh(config)
    oracle = calibrate_oracle(config.oracle_config(), mesh)
    fields = [oracle_frames(mesh, oracle, rates, months, config, io_interface).fields]
    for artifact in artifacts:
        emulator = load_emulator(artifact, mesh)
        fields.append(np.stack([emulator.predict_series(rate, months) for rate in rates]))
    reports = [build_sweep(name, mesh, rates, values) for name, values in zip(names, fields)]

    write_sweep_series(reports, paths[0])
    write_sweep_summary(reports, paths[1])
    lines = [line for report in reports for line in report.report_lines()] + [f"note: {FOOTER}"]
    paths[2].write_text("\n".join(lines) + "\n", encoding="utf-8")
    graph = SweepGraph(months)
    for report in reports:
        graph.update(report)
    graph.save(paths[3])
    if maps:
        for name, values in zip(names, fields):
            for r, rate in enumerate(rates):
                mean = values[r].mean(axis=0)
                stem = target / f"{name}_m{rate:g}"
                speed = np.hypot(mean[:, 0], mean[:, 1])
                field_map(mesh, speed, f"{name}: mean speed, m={rate:g}", "m/year", f"{stem}_speed.png")
                field_map(mesh, mean[:, 2], f"{name}: mean thickness, m={rate:g}", "m", f"{stem}_thickness.png")
    config.write(target / CONFIG_FILE)
    io_interface.output_lines(lines)
    return reports


def cmd_gradcheck(
    io_interface: IOInterface,
    kinds: Sequence[str] = ("gcn", "fcn"),
    sample_count: int = 50,
    seed: int = 0,
    corrupt: bool = False,
):
    """
    Run the finite-difference suites.

    :raises GradientCheckError: If any check exceeds its tolerance
    """
    results = run_gradcheck_suites(
        kinds, sample_count=sample_count, seed=seed, corrupt=corrupt, io_interface=io_interface
    )
    failed = [result for result in results if not result.passed]
    if failed:
        worst = max(failed, key=lambda result: result.max_error)
        raise GradientCheckError(
            f"{len(failed)} of {len(results)} gradient checks failed; worst {worst.suite} {worst.parameter} "
            f"max_rel_error={worst.max_error:.3e}"
        )
    io_interface.output(f"All {len(results)} gradient checks passed")
    return results


def history_summary(history: TrainingHistory) -> List[str]:
    return [f"{key}: {value}" for key, value in history.report().items()]
