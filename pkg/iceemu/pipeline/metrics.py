"""
This module computes accuracy metrics of emulator predictions against reference frames.

Velocity errors are taken on the speed sqrt(vx^2 + vy^2); component errors are
reported alongside. Correlations are pooled over every node of every frame,
with the mean per-frame correlation reported as a second reading. All sums are
exactly rounded, so the metrics do not depend on frame order.
"""

import csv
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from iceemu.common.errors import ShapeError, UndefinedMetricError
from iceemu.common.util import format_float, format_row
from iceemu.oracle.frames import FrameSet

VARIABLES = ("velocity", "thickness", "vx", "vy")


def pearson_r(a, b) -> float:
    """
    Sample correlation coefficient of two equally long value lists.

    :raises ShapeError: If the lengths differ or fewer than two values are given
    :raises UndefinedMetricError: If either list is constant
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ShapeError(f"cannot correlate {a.size} values with {b.size} values")
    if a.size < 2:
        raise ShapeError("correlation needs at least two values")
    da = a - math.fsum(a) / a.size
    db = b - math.fsum(b) / b.size
    saa = math.fsum(da * da)
    sbb = math.fsum(db * db)
    if saa == 0.0 or sbb == 0.0:
        raise UndefinedMetricError("correlation is undefined for a constant series")
    r = math.fsum(da * db) / math.sqrt(saa * sbb)
    return max(-1.0, min(1.0, r))


def rmse(predicted, reference) -> float:
    predicted = np.asarray(predicted, dtype=np.float64).ravel()
    reference = np.asarray(reference, dtype=np.float64).ravel()
    if predicted.shape != reference.shape or predicted.size == 0:
        raise ShapeError(f"cannot compare {predicted.size} predictions with {reference.size} references")
    diff = predicted - reference
    return math.sqrt(math.fsum(diff * diff) / diff.size)


def _variables(fields: np.ndarray) -> Dict[str, np.ndarray]:
    return {
        "velocity": np.hypot(fields[..., 0], fields[..., 1]),
        "thickness": fields[..., 2],
        "vx": fields[..., 0],
        "vy": fields[..., 1],
    }


@dataclass(frozen=True)
class RateMetrics:
    rate: float
    rmse_velocity: float
    rmse_thickness: float
    pearson_r_velocity: Optional[float]
    pearson_r_thickness: Optional[float]


@dataclass
class Metrics:
    """
    Accuracy of one emulator on one frame set. Physical units: m/year and m.

    Correlations that are undefined (a constant series) are None, with a
    matching entry in flags.
    """

    rmse: Dict[str, float]
    pearson_r: Dict[str, Optional[float]]
    per_frame_r: Dict[str, Optional[float]]
    per_rate: List[RateMetrics]
    frames: int
    nodes: int
    flags: List[str] = field(default_factory=list)

    @property
    def rmse_velocity(self) -> float:
        return self.rmse["velocity"]

    @property
    def rmse_thickness(self) -> float:
        return self.rmse["thickness"]

    @property
    def pearson_r_velocity(self) -> Optional[float]:
        return self.pearson_r["velocity"]

    @property
    def pearson_r_thickness(self) -> Optional[float]:
        return self.pearson_r["thickness"]

    def report_lines(self) -> List[str]:
        lines = [
            f"frames = {self.frames}",
            f"nodes = {self.nodes}",
            f"rmse_velocity_m_per_year = {format_float(self.rmse_velocity)}",
            f"rmse_thickness_m = {format_float(self.rmse_thickness)}",
            f"pearson_r_velocity = {_text(self.pearson_r_velocity)}",
            f"pearson_r_thickness = {_text(self.pearson_r_thickness)}",
            f"rmse_vx_m_per_year = {format_float(self.rmse['vx'])}",
            f"rmse_vy_m_per_year = {format_float(self.rmse['vy'])}",
            f"per_frame_r_velocity = {_text(self.per_frame_r['velocity'])}",
            f"per_frame_r_thickness = {_text(self.per_frame_r['thickness'])}",
        ]
        for row in self.per_rate:
            lines.append(
                f"rate {format_float(row.rate)}: rmse_velocity = {format_float(row.rmse_velocity)}, "
                f"rmse_thickness = {format_float(row.rmse_thickness)}, "
                f"r_velocity = {_text(row.pearson_r_velocity)}, r_thickness = {_text(row.pearson_r_thickness)}"
            )
        lines.extend(f"flag: {flag}" for flag in self.flags)
        return lines

    def write_report(self, path):
        with open(path, "w", encoding="utf-8") as f:
            f.write("\n".join(self.report_lines()) + "\n")

    def write_csv(self, path):
        """Columns scope, rate, variable, rmse, r; one pooled row per variable then per-rate rows."""
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["scope", "rate", "variable", "rmse", "r"])
            for variable in VARIABLES:
                writer.writerow(format_row(["all", "", variable, self.rmse[variable], _cell(self.pearson_r[variable])]))
            for row in self.per_rate:
                writer.writerow(
                    format_row(["rate", row.rate, "velocity", row.rmse_velocity, _cell(row.pearson_r_velocity)])
                )
                writer.writerow(
                    format_row(["rate", row.rate, "thickness", row.rmse_thickness, _cell(row.pearson_r_thickness)])
                )


def _text(value: Optional[float]) -> str:
    return "undefined" if value is None else format_float(value)


def _cell(value: Optional[float]):
    return "" if value is None else value


def _safe_r(a, b, label: str, flags: List[str]) -> Optional[float]:
    try:
        return pearson_r(a, b)
    except UndefinedMetricError:
        flags.append(f"{label} undefined: constant series")
        return None


def evaluate_predictions(predictions: np.ndarray, frames: FrameSet) -> Metrics:
    """
    Compare predictions aligned with frames.fields, shape (R, T, N, 3), against the frames.

    :raises ShapeError: If the shapes differ or the frame set is empty
    """
    predictions = np.asarray(predictions, dtype=np.float64)
    if predictions.shape != frames.fields.shape:
        raise ShapeError(f"predictions have shape {predictions.shape}, frames have {frames.fields.shape}")
    if len(frames) == 0:
        raise ShapeError("cannot evaluate on an empty frame set")
    predicted = _variables(predictions)
    reference = _variables(frames.fields)
    flags: List[str] = []

    errors = {name: rmse(predicted[name], reference[name]) for name in VARIABLES}
    pooled = {name: _safe_r(predicted[name], reference[name], f"pooled r_{name}", flags) for name in VARIABLES}

    per_frame = {}
    for name in ("velocity", "thickness"):
        values = []
        for r, month in frames.index_pairs():
            try:
                values.append(pearson_r(predicted[name][r, month], reference[name][r, month]))
            except UndefinedMetricError:
                pass
        skipped = len(frames) - len(values)
        if skipped:
            flags.append(f"per-frame r_{name} undefined on {skipped} of {len(frames)} frames")
        per_frame[name] = math.fsum(values) / len(values) if values else None

    per_rate = []
    for r, rate in enumerate(frames.rates):
        label = f"rate {format_float(rate)}"
        per_rate.append(
            RateMetrics(
                float(rate),
                rmse(predicted["velocity"][r], reference["velocity"][r]),
                rmse(predicted["thickness"][r], reference["thickness"][r]),
                _safe_r(predicted["velocity"][r], reference["velocity"][r], f"{label} r_velocity", flags),
                _safe_r(predicted["thickness"][r], reference["thickness"][r], f"{label} r_thickness", flags),
            )
        )
    return Metrics(errors, pooled, per_frame, per_rate, len(frames), frames.mesh.num_nodes, flags)


def evaluate(emulator, frames: FrameSet) -> Metrics:
    """Predict every frame of the set with an emulator and score the predictions."""
    return evaluate_predictions(emulator.predict_frames(frames), frames)
