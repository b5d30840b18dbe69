"""
This module contains the finite-volume thickness transport stepper and its
mass-balance audit.

Thickness is advanced on median-dual control volumes with a first-order
upwind flux and explicit Euler in time. Velocity is diagnostic: each month
uses the analytic velocity at the start of that month.

Units: lengths in km, velocities converted from m/year to km/year, so face
fluxes are in m * km^2 / year and masses in m * km^2.
"""

import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from iceemu.common.errors import ConfigError, StabilityError
from iceemu.common.io_interface import DummyIOInterface, IOInterface
from iceemu.mesh.mesh import Mesh
from iceemu.oracle.fields import OracleConfig, analytic_fields, calibrate_oracle
from iceemu.oracle.frames import MONTHS_PER_YEAR, FrameFields, FrameSet, Provenance

CFL_LIMIT = 0.5
M_PER_KM = 1000.0
CONSERVATIVE_NOTE = "not conservative by construction"


@dataclass(frozen=True)
class StepAudit:
    """Mass budget of one transport step."""

    mass_before: float
    mass_after: float
    sources: float
    boundary_outflux: float
    clamped: int

    @property
    def residual(self) -> float:
        return step_residual(self.mass_before, self.mass_after, self.sources, self.boundary_outflux)


@dataclass(frozen=True)
class MassBalanceReport:
    rate: float
    residuals: List[float]
    conservative: bool
    clamped: int
    note: str = ""

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)

    def report_lines(self) -> List[str]:
        lines = [
            f"rate={self.rate}",
            f"steps={len(self.residuals)}",
            f"max_residual={self.max_residual!r}",
            f"clamped={self.clamped}",
        ]
        if self.note:
            lines.append(f"note={self.note}")
        return lines


def step_residual(mass_before: float, mass_after: float, sources: float, boundary_outflux: float) -> float:
    """Relative mass-budget error of one step; sources and outflux are integrated over the step."""
    return abs((mass_after - mass_before) - (sources - boundary_outflux)) / max(abs(mass_before), 1.0)


def _velocity_km(vx: np.ndarray, vy: np.ndarray) -> np.ndarray:
    return np.column_stack([vx, vy]) / M_PER_KM


def _divergence(mesh: Mesh, velocity: np.ndarray, thickness: np.ndarray):
    """Net outward flux per control volume and total boundary outflux."""
    dual = mesh.dual
    n = mesh.num_nodes
    a, b = dual.edge_nodes[:, 0], dual.edge_nodes[:, 1]
    face_velocity = 0.5 * (velocity[a] + velocity[b])
    q = np.einsum("ij,ij->i", face_velocity, dual.edge_normals)
    flux = q * np.where(q > 0, thickness[a], thickness[b])
    boundary_flux = np.einsum("ij,ij->i", velocity[dual.boundary_nodes], dual.boundary_normals)
    boundary_flux = boundary_flux * thickness[dual.boundary_nodes]

    net = np.bincount(a, weights=flux, minlength=n) - np.bincount(b, weights=flux, minlength=n)
    net += np.bincount(dual.boundary_nodes, weights=boundary_flux, minlength=n)
    return net, math.fsum(boundary_flux)


def _sources(mesh: Mesh, config: OracleConfig, m: float) -> np.ndarray:
    x, y = mesh.node_coords[:, 0], mesh.node_coords[:, 1]
    accumulation = config.accumulation or 0.0
    return accumulation - m * config.floating_mask(x, y)


def check_cfl(mesh: Mesh, velocity_km: np.ndarray, dt: float):
    """
    :raises StabilityError: If dt exceeds 0.5 * min_edge_length / max_speed
    """
    max_speed = float(np.hypot(velocity_km[:, 0], velocity_km[:, 1]).max(initial=0.0))
    if max_speed > 0 and dt > CFL_LIMIT * mesh.min_edge_length / max_speed:
        limit = CFL_LIMIT * mesh.min_edge_length / max_speed
        raise StabilityError(f"time step {dt} years exceeds the CFL bound {limit} years (max speed {max_speed} km/yr)")


def transport_step(
    mesh: Mesh,
    state: FrameFields,
    dt: float,
    m: float,
    config: OracleConfig,
    audit: Optional[list] = None,
) -> FrameFields:
    """
    Advance thickness by one explicit upwind step.

    :param mesh: The mesh
    :param state: Current fields; its velocity drives the step
    :param dt: Step length in years
    :param m: Melting rate in m/year
    :param config: Oracle configuration (accumulation, floating mask)
    :param audit: When given, a `StepAudit` is appended to it
    :return: New fields with the same velocity and updated, clamped thickness
    :raises StabilityError: If dt violates the CFL bound
    """
    if not dt > 0:
        raise ConfigError(f"time step must be positive, got {dt}")
    areas = mesh.dual.areas
    velocity = _velocity_km(state.vx, state.vy)
    check_cfl(mesh, velocity, dt)

    net, outflux = _divergence(mesh, velocity, state.H)
    sources = _sources(mesh, config, m)
    thickness = state.H + dt * (sources - net / areas)
    negative = thickness < 0
    clamped = int(negative.sum())
    thickness[negative] = 0.0

    if audit is not None:
        audit.append(
            StepAudit(
                mass_before=math.fsum(areas * state.H),
                mass_after=math.fsum(areas * thickness),
                sources=dt * math.fsum(areas * sources),
                boundary_outflux=dt * outflux,
                clamped=clamped,
            )
        )
    return FrameFields(state.vx, state.vy, thickness)


def run_transport(
    mesh: Mesh,
    config: OracleConfig,
    m: float,
    months: int,
    io_interface: Optional[IOInterface] = None,
) -> FrameSet:
    """
    Step thickness month by month from the base state and store monthly snapshots.

    Month 0 is the base state; month k is the result of k steps of one month.

    :return: A single-rate FrameSet tagged `transport`; metadata holds the step audits
    """
    io_interface = io_interface or DummyIOInterface()
    if months < 1:
        raise ConfigError(f"months must be at least 1, got {months}")
    if not config.calibrated:
        config = calibrate_oracle(config, mesh)
    x, y = mesh.node_coords[:, 0], mesh.node_coords[:, 1]
    dt = 1.0 / MONTHS_PER_YEAR

    vx, vy, thickness = analytic_fields(config, x, y, 0.0, m)
    state = FrameFields(vx, vy, thickness)
    snapshots = [state.to_array()]
    audits: List[StepAudit] = []
    for month in range(1, months):
        stepped = transport_step(mesh, state, dt, m, config, audit=audits)
        vx, vy, _ = analytic_fields(config, x, y, month / MONTHS_PER_YEAR, m)
        state = FrameFields(vx, vy, stepped.H)
        snapshots.append(state.to_array())

    clamped = sum(step.clamped for step in audits)
    if clamped:
        io_interface.output(f"Transport at rate {m}: {clamped} thickness values clamped at 0")
    metadata = {"oracle": config, "audit": audits, "clamped": clamped}
    return FrameSet(mesh, [m], months, np.stack(snapshots)[None], Provenance.TRANSPORT, metadata)


def mass_balance_report(frames: FrameSet, rate: float, config: OracleConfig) -> MassBalanceReport:
    """
    Recompute the per-step mass budget of one rate's series from its snapshots.

    Each residual compares the change of total mass between consecutive months
    with the sources minus boundary outflux implied by the earlier snapshot.
    Only transport-mode series are expected to balance.
    """
    series = frames.series(rate)
    mesh = frames.mesh
    areas = mesh.dual.areas
    dt = 1.0 / MONTHS_PER_YEAR
    sources = _sources(mesh, config, rate)
    residuals = []
    for k in range(frames.months - 1):
        velocity = _velocity_km(series[k, :, 0], series[k, :, 1])
        _, outflux = _divergence(mesh, velocity, series[k, :, 2])
        residuals.append(
            step_residual(
                math.fsum(areas * series[k, :, 2]),
                math.fsum(areas * series[k + 1, :, 2]),
                dt * math.fsum(areas * sources),
                dt * outflux,
            )
        )
    conservative = frames.provenance is Provenance.TRANSPORT
    return MassBalanceReport(
        rate=float(rate),
        residuals=residuals,
        conservative=conservative,
        clamped=int(frames.metadata.get("clamped", 0)),
        note="" if conservative else CONSERVATIVE_NOTE,
    )
