"""
This module contains the SweepReport class: area-weighted mean trajectories,
mass change and sea-level equivalent of a set of melting rates.
"""

import csv
import math
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from iceemu.common.errors import ConfigError, ShapeError
from iceemu.common.util import format_float, format_row
from iceemu.mesh.mesh import Mesh

ICE_DENSITY = 917.0  # kg/m^3
GT_PER_MM_SEA_LEVEL = 362.5
KG_PER_GT = 1e12
M2_PER_KM2 = 1e6

FOOTER = (
    f"sea-level equivalent uses {GT_PER_MM_SEA_LEVEL} Gt per mm of global mean sea level; "
    "pairing 1800 Gt with 2.57 mm would imply about 700 Gt per mm, which cannot be reproduced "
    "because floating ice does not raise sea level directly"
)


def area_means(values: np.ndarray, areas: np.ndarray) -> np.ndarray:
    """Area-weighted means over the last axis."""
    total = math.fsum(areas)
    flat = values.reshape(-1, values.shape[-1])
    return np.array([math.fsum(row * areas) / total for row in flat]).reshape(values.shape[:-1])


@dataclass
class SweepReport:
    """
    Per-rate trajectories of one emulator (or the oracle) over the sweep horizon.

    mean_velocity and mean_thickness have shape (R, T); mass_change_gt and
    sea_level_mm have shape (R,). Positive sea_level_mm means mass was lost.
    """

    source: str
    rates: np.ndarray
    mean_velocity: np.ndarray
    mean_thickness: np.ndarray
    flat_mean_thickness: np.ndarray
    mass_change_gt: np.ndarray
    sea_level_mm: np.ndarray

    @property
    def months(self) -> int:
        return self.mean_velocity.shape[1]

    def thickness_change(self) -> np.ndarray:
        return self.mean_thickness[:, -1] - self.mean_thickness[:, 0]

    def flat_thickness_change(self) -> np.ndarray:
        return self.flat_mean_thickness[:, -1] - self.flat_mean_thickness[:, 0]

    def report_lines(self) -> List[str]:
        lines = [f"{self.source}:"]
        for r, rate in enumerate(self.rates):
            lines.append(
                f"  rate {format_float(rate)}: thickness change {self.thickness_change()[r]:+.2f} m "
                f"(flat mean {self.flat_thickness_change()[r]:+.2f} m), "
                f"final mean speed {self.mean_velocity[r, -1]:.1f} m/year, "
                f"mass change {self.mass_change_gt[r]:+.2f} Gt, sea level {self.sea_level_mm[r]:+.4f} mm"
            )
        return lines


def build_sweep(source: str, mesh: Mesh, rates: Sequence[float], fields: np.ndarray) -> SweepReport:
    """
    Summarize per-rate fields of shape (R, T, N, 3).

    :raises ConfigError: If the horizon has no months
    :raises ShapeError: If fields do not match the rates and mesh
    """
    rates = np.asarray(rates, dtype=np.float64)
    fields = np.asarray(fields, dtype=np.float64)
    if fields.ndim != 4 or fields.shape[1] == 0:
        raise ConfigError("the sweep horizon must contain at least one month")
    if fields.shape[0] != len(rates) or fields.shape[2:] != (mesh.num_nodes, 3):
        raise ShapeError(f"fields of shape {fields.shape} do not match {len(rates)} rates on {mesh.num_nodes} nodes")
    areas = mesh.dual.areas
    speed = np.hypot(fields[..., 0], fields[..., 1])
    thickness = fields[..., 2]
    delta = thickness[:, -1] - thickness[:, 0]
    volume_m3 = np.array([math.fsum(row * areas) for row in delta]) * M2_PER_KM2
    mass_gt = ICE_DENSITY * volume_m3 / KG_PER_GT
    return SweepReport(
        source=source,
        rates=rates,
        mean_velocity=area_means(speed, areas),
        mean_thickness=area_means(thickness, areas),
        flat_mean_thickness=thickness.mean(axis=-1),
        mass_change_gt=mass_gt,
        sea_level_mm=-mass_gt / GT_PER_MM_SEA_LEVEL,
    )


def write_sweep_series(reports: Sequence[SweepReport], path):
    """Columns source, rate, month, mean_velocity_m_per_year, mean_thickness_m."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["source", "rate", "month", "mean_velocity_m_per_year", "mean_thickness_m"])
        for report in reports:
            for r, rate in enumerate(report.rates):
                for month in range(report.months):
                    row = [report.source, rate, month, report.mean_velocity[r, month], report.mean_thickness[r, month]]
                    writer.writerow(format_row(row))


def write_sweep_summary(reports: Sequence[SweepReport], path):
    """One row per (source, rate), then the sea-level footer as a comment line."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(
            ["source", "rate", "thickness_change_m", "flat_thickness_change_m", "mass_change_gt", "sea_level_mm"]
        )
        for report in reports:
            for r, rate in enumerate(report.rates):
                writer.writerow(
                    format_row(
                        [
                            report.source,
                            rate,
                            report.thickness_change()[r],
                            report.flat_thickness_change()[r],
                            report.mass_change_gt[r],
                            report.sea_level_mm[r],
                        ]
                    )
                )
        f.write(f"# {FOOTER}\n")
