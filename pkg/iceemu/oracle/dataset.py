"""
Generation of analytic frame sets.

Rates are independent of each other, so generation fans them out over a
process pool and reassembles the blocks in rate order.
"""

from multiprocessing import Pool
from typing import Optional, Sequence

import numpy as np

from iceemu.common.errors import ConfigError
from iceemu.common.io_interface import DummyIOInterface, IOInterface
from iceemu.mesh.mesh import Mesh
from iceemu.oracle.fields import OracleConfig, analytic_fields, calibrate_oracle
from iceemu.oracle.frames import MONTHS_PER_YEAR, FrameSet, Provenance
from iceemu.oracle.transport import run_transport


def rate_block(config: OracleConfig, coords: np.ndarray, rate: float, months: int) -> np.ndarray:
    """Fields of every month of one rate, shape (months, N, 3)."""
    t = (np.arange(months) / MONTHS_PER_YEAR)[:, None]
    vx, vy, thickness = analytic_fields(config, coords[None, :, 0], coords[None, :, 1], t, rate)
    return np.stack([vx, vy, thickness], axis=-1)


def generate_dataset(
    mesh: Mesh,
    config: OracleConfig,
    rates: Sequence[float],
    months: int,
    workers: int = 1,
    io_interface: Optional[IOInterface] = None,
) -> FrameSet:
    """
    Evaluate the analytic fields at every node for every (rate, month).

    An uncalibrated configuration is calibrated on the mesh first.

    :param mesh: The mesh
    :param config: Oracle configuration
    :param rates: Melting rates in m/year
    :param months: Number of monthly frames per rate
    :param workers: Process count; 1 runs in-process
    :param io_interface: Progress output
    :return: A FrameSet tagged `analytic`
    :raises ConfigError: If rates are empty, duplicated or months < 1
    """
    io_interface = io_interface or DummyIOInterface()
    rates = sorted(float(rate) for rate in rates)
    if not rates:
        raise ConfigError("at least one melting rate is required")
    if len(set(rates)) != len(rates):
        raise ConfigError("melting rates must be distinct")
    if months < 1:
        raise ConfigError(f"months must be at least 1, got {months}")
    if workers < 1:
        raise ConfigError(f"workers must be at least 1, got {workers}")
    if not config.calibrated:
        config = calibrate_oracle(config, mesh)

    coords = np.array(mesh.node_coords)
    jobs = [(config, coords, rate, months) for rate in rates]
    if workers == 1:
        blocks = [rate_block(*job) for job in jobs]
    else:
        with Pool(processes=workers) as pool:
            blocks = pool.starmap(rate_block, jobs)

    io_interface.output(f"Generated {len(rates) * months} frames ({len(rates)} rates x {months} months)")
    return FrameSet(mesh, rates, months, np.stack(blocks), Provenance.ANALYTIC, {"oracle": config})


def generate_transport_dataset(
    mesh: Mesh,
    config: OracleConfig,
    rates: Sequence[float],
    months: int,
    workers: int = 1,
    io_interface: Optional[IOInterface] = None,
) -> FrameSet:
    """
    Step every rate through the mass-conserving transport and assemble one frame set.

    :return: A FrameSet tagged `transport`; metadata maps each rate to its step audits
    :raises ConfigError: As generate_dataset
    :raises StabilityError: If a step violates the CFL bound
    """
    io_interface = io_interface or DummyIOInterface()
    rates = sorted(float(rate) for rate in rates)
    if not rates:
        raise ConfigError("at least one melting rate is required")
    if len(set(rates)) != len(rates):
        raise ConfigError("melting rates must be distinct")
    if workers < 1:
        raise ConfigError(f"workers must be at least 1, got {workers}")
    if not config.calibrated:
        config = calibrate_oracle(config, mesh)

    jobs = [(mesh, config, rate, months) for rate in rates]
    if workers == 1:
        runs = [run_transport(*job, io_interface=io_interface) for job in jobs]
    else:
        with Pool(processes=workers) as pool:
            runs = pool.starmap(run_transport, jobs)

    clamped = sum(run.metadata["clamped"] for run in runs)
    io_interface.output(
        f"Stepped {len(rates) * months} frames ({len(rates)} rates x {months} months), {clamped} clamp events"
    )
    metadata = {
        "oracle": config,
        "clamped": clamped,
        "audit": {rate: run.metadata["audit"] for rate, run in zip(rates, runs)},
    }
    return FrameSet(mesh, rates, months, np.concatenate([run.fields for run in runs]), Provenance.TRANSPORT, metadata)
