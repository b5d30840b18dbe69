"""
Wall-time benchmark of producing every (rate, month) frame with the oracle and the emulators.

Only compute is timed; nothing is read or written inside a timed region.
Results are reported, never compared against each other.
"""

import csv
import os
import platform
import statistics
import time
from dataclasses import dataclass
from typing import Dict, List, Sequence

from iceemu.common.errors import ConfigError
from iceemu.common.util import format_row
from iceemu.mesh.mesh import Mesh
from iceemu.oracle.fields import OracleConfig
from iceemu.oracle.transport import run_transport
from iceemu.pipeline.emulator import Emulator, FcnEmulator


@dataclass(frozen=True)
class BenchTiming:
    name: str
    phase: str
    median_seconds: float
    repetitions: int


def hardware_description() -> str:
    return f"{platform.machine()} {platform.processor() or 'unknown cpu'}, {os.cpu_count()} cores, {platform.system()}"


def time_transport(mesh: Mesh, oracle: OracleConfig, rates: Sequence[float], months: int) -> Dict[str, float]:
    started = time.perf_counter()
    for rate in rates:
        run_transport(mesh, oracle, rate, months)
    return {"total": time.perf_counter() - started}


def time_emulator(emulator: Emulator, rates: Sequence[float], months: int) -> Dict[str, float]:
    """Per-frame prediction time; the FCN path is split into its three phases."""
    if not isinstance(emulator, FcnEmulator):
        started = time.perf_counter()
        for rate in rates:
            for month in range(months):
                emulator.predict(rate, month)
        return {"total": time.perf_counter() - started}

    phases = {"rasterize": 0.0, "infer": 0.0, "resample": 0.0}
    for rate in rates:
        for month in range(months):
            t0 = time.perf_counter()
            inputs = emulator.input_raster(rate, month)
            t1 = time.perf_counter()
            outputs = emulator.infer(inputs)
            t2 = time.perf_counter()
            emulator.resample(outputs)
            t3 = time.perf_counter()
            phases["rasterize"] += t1 - t0
            phases["infer"] += t2 - t1
            phases["resample"] += t3 - t2
    phases["total"] = phases["rasterize"] + phases["infer"] + phases["resample"]
    return phases


def run_bench(
    mesh: Mesh,
    oracle: OracleConfig,
    emulators: Dict[str, Emulator],
    rates: Sequence[float],
    months: int,
    repetitions: int = 3,
) -> List[BenchTiming]:
    """
    Median timings over repetitions, oracle transport first, then each emulator by name.

    :raises ConfigError: If repetitions, rates or months are empty
    """
    if repetitions < 1 or not rates or months < 1:
        raise ConfigError("benchmark needs at least one repetition, rate and month")
    runs = {"oracle-transport": lambda: time_transport(mesh, oracle, rates, months)}
    for name, emulator in emulators.items():
        runs[name] = lambda emulator=emulator: time_emulator(emulator, rates, months)

    timings = []
    for name, run in runs.items():
        samples = [run() for _ in range(repetitions)]
        for phase in samples[0]:
            median = statistics.median(sample[phase] for sample in samples)
            timings.append(BenchTiming(name, phase, median, repetitions))
    return timings


def bench_lines(timings: Sequence[BenchTiming], hardware: str) -> List[str]:
    lines = [f"hardware: {hardware}"]
    for timing in timings:
        lines.append(
            f"{timing.name:<18} {timing.phase:<10} {timing.median_seconds:.4f} s (median of {timing.repetitions})"
        )
    return lines


def write_bench_csv(timings: Sequence[BenchTiming], hardware: str, path):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["name", "phase", "median_seconds", "repetitions", "hardware"])
        for timing in timings:
            row = [timing.name, timing.phase, timing.median_seconds, timing.repetitions, hardware]
            writer.writerow(format_row(row))
