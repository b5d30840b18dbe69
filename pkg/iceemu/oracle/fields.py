"""
This module defines the analytic (velocity, thickness) field family that stands
in for a transient ice-flow simulation, and its calibration on a mesh.

The family is separable in time and melting rate:

    H(x, y, t, m) = H_base(x, y) + (c_g - c_m * m) * t * phi(x, y)    clamped at 0
    speed         = V0(x, y) * (1 + gamma * m * t / T)

with flow directed toward a terminus point beyond the left edge of the domain.
phi is the floating-ice mask: 1 seaward of the grounding line, 0 inland.
"""

import dataclasses
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from iceemu.common.errors import ConfigError, DomainError
from iceemu.common.util import area_weighted_mean

DOMAIN_TOLERANCE_KM = 1e-9


@dataclass(frozen=True)
class OracleConfig:
    """
    Parameters of the analytic field family.

    The rate constants (growth_rate, melt_sensitivity, speedup, velocity_scale)
    are left unset until `calibrate_oracle` solves them against the targets.
    """

    width_km: float = 200.0
    height_km: float = 150.0
    terminus_km: Optional[Tuple[float, float]] = None

    base_thickness_front_m: float = 400.0
    base_thickness_slope_m: float = 1500.0
    thickness_ripple_m: float = 100.0

    grounding_line_km: float = 70.0
    grounding_width_km: float = 8.0
    sharp_mask: bool = False

    horizon_years: float = 20.0
    target_growth_m: float = 25.0
    target_thinning_m: float = -50.0
    target_melt_rate: float = 60.0
    target_mean_speed: float = 525.0
    target_speedup: float = 200.0

    growth_rate: Optional[float] = None
    melt_sensitivity: Optional[float] = None
    speedup: Optional[float] = None
    velocity_scale: Optional[float] = None
    accumulation: Optional[float] = None

    def __post_init__(self):
        if not self.width_km > 0 or not self.height_km > 0:
            raise ConfigError(f"domain extents must be positive, got {self.width_km} x {self.height_km}")
        if not self.horizon_years > 0:
            raise ConfigError(f"horizon_years must be positive, got {self.horizon_years}")
        if not self.grounding_width_km > 0:
            raise ConfigError(f"grounding_width_km must be positive, got {self.grounding_width_km}")
        if not self.target_melt_rate > 0:
            raise ConfigError(f"target_melt_rate must be positive, got {self.target_melt_rate}")
        if self.target_growth_m <= self.target_thinning_m:
            raise ConfigError("target_growth_m must exceed target_thinning_m")
        if not self.target_mean_speed > 0 or not self.target_speedup > 0:
            raise ConfigError("speed targets must be positive")
        if self.base_thickness_front_m - self.thickness_ripple_m <= 0:
            raise ConfigError("base thickness must stay positive")
        for name in ("growth_rate", "melt_sensitivity", "speedup", "velocity_scale"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ConfigError(f"{name} must be positive, got {value}")
        if self.accumulation is not None and self.accumulation < 0:
            raise ConfigError(f"accumulation must be non-negative, got {self.accumulation}")
        if self.terminus_km is None:
            object.__setattr__(self, "terminus_km", (-0.25 * self.width_km, 0.5 * self.height_km))
        else:
            object.__setattr__(self, "terminus_km", tuple(float(v) for v in self.terminus_km))

    @property
    def calibrated(self) -> bool:
        return None not in (self.growth_rate, self.melt_sensitivity, self.speedup, self.velocity_scale)

    def floating_mask(self, x, y) -> np.ndarray:
        """phi(x, y) in [0, 1]; a logistic ramp across the grounding line, or a step when sharp."""
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if self.sharp_mask:
            phi = np.where(x < self.grounding_line_km, 1.0, 0.0)
        else:
            phi = 0.5 * (1.0 + np.tanh(0.5 * (self.grounding_line_km - x) / self.grounding_width_km))
        return np.broadcast_to(phi, np.broadcast(x, y).shape).astype(np.float64)

    def base_thickness(self, x, y) -> np.ndarray:
        """H_base(x, y) in meters: thin at the front, thickening inland, with a cross-flow ripple."""
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        return (
            self.base_thickness_front_m
            + self.base_thickness_slope_m * x / self.width_km
            + self.thickness_ripple_m * np.cos(2.0 * np.pi * y / self.height_km)
        )

    def speed_shape(self, x, y) -> np.ndarray:
        """Unscaled V0 shape: fastest near the front on the centre line."""
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        across = (y - 0.5 * self.height_km) / (0.5 * self.height_km)
        return (0.35 + (1.0 - x / self.width_km) ** 2) * (1.0 - 0.4 * across**2)

    def flow_direction(self, x, y) -> Tuple[np.ndarray, np.ndarray]:
        """Unit vector toward the terminus point."""
        dx = self.terminus_km[0] - np.asarray(x, dtype=np.float64)
        dy = self.terminus_km[1] - np.asarray(y, dtype=np.float64)
        norm = np.hypot(dx, dy)
        return dx / norm, dy / norm

    def check_domain(self, x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        tol = DOMAIN_TOLERANCE_KM
        outside = (x < -tol) | (x > self.width_km + tol) | (y < -tol) | (y > self.height_km + tol) | ~np.isfinite(x + y)
        if np.any(outside):
            bx, by = np.broadcast_arrays(x, y)
            k = np.flatnonzero(np.broadcast_to(outside, bx.shape))[0]
            raise DomainError(
                f"point ({bx.ravel()[k]}, {by.ravel()[k]}) km lies outside the domain "
                f"[0, {self.width_km}] x [0, {self.height_km}]"
            )


def analytic_fields(config: OracleConfig, x, y, t, m) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Evaluate the analytic field family.

    All arguments broadcast against each other.

    :param config: A calibrated oracle configuration
    :param x: x in km
    :param y: y in km
    :param t: time in years, >= 0
    :param m: melting rate in m/year, >= 0
    :return: (vx, vy, H) in m/year, m/year and m
    :raises ConfigError: If the configuration has not been calibrated
    :raises DomainError: If a point is outside the domain or t, m is negative
    """
    if not config.calibrated:
        raise ConfigError("oracle configuration is not calibrated; call calibrate_oracle first")
    t = np.asarray(t, dtype=np.float64)
    m = np.asarray(m, dtype=np.float64)
    if np.any(~(t >= 0)):
        raise DomainError(f"time must be non-negative, got {t[~(t >= 0)].ravel()[0]}")
    if np.any(~(m >= 0)):
        raise DomainError(f"melting rate must be non-negative, got {m[~(m >= 0)].ravel()[0]}")
    config.check_domain(x, y)

    phi = config.floating_mask(x, y)
    thickness = config.base_thickness(x, y) + (config.growth_rate - config.melt_sensitivity * m) * t * phi
    thickness = np.maximum(thickness, 0.0)

    speed = config.velocity_scale * config.speed_shape(x, y) * (1.0 + config.speedup * m * (t / config.horizon_years))
    ux, uy = config.flow_direction(x, y)
    vx, vy, thickness = np.broadcast_arrays(speed * ux, speed * uy, thickness)
    return np.array(vx), np.array(vy), np.array(thickness)


def calibrate_oracle(config: OracleConfig, mesh) -> OracleConfig:
    """
    Solve the rate constants so mesh means hit the calibration targets.

    With area weights from the median-dual control volumes, at t = horizon:

    - mean dH at m = 0 equals target_growth_m
    - mean dH at m = target_melt_rate equals target_thinning_m
    - mean speed at m = 0 equals target_mean_speed
    - mean speed gain at m = target_melt_rate equals target_speedup

    Accumulation for the transport stepper defaults to growth_rate * mean(phi).

    :param config: Oracle configuration; existing rate constants are replaced
    :param mesh: Mesh the means are taken over
    :return: A calibrated copy of the configuration
    :raises ConfigError: If the floating mask vanishes on the mesh
    """
    x, y = mesh.node_coords[:, 0], mesh.node_coords[:, 1]
    config.check_domain(x, y)
    areas = mesh.dual.areas
    mean_phi = area_weighted_mean(config.floating_mask(x, y), areas)
    if not mean_phi > 0:
        raise ConfigError("floating mask is zero over the whole mesh; move the grounding line")
    mean_shape = area_weighted_mean(config.speed_shape(x, y), areas)

    horizon = config.horizon_years
    growth = config.target_growth_m / (horizon * mean_phi)
    sensitivity = (config.target_growth_m - config.target_thinning_m) / (horizon * mean_phi * config.target_melt_rate)
    speedup = config.target_speedup / (config.target_mean_speed * config.target_melt_rate)
    accumulation = config.accumulation if config.accumulation is not None else growth * mean_phi
    return dataclasses.replace(
        config,
        growth_rate=growth,
        melt_sensitivity=sensitivity,
        speedup=speedup,
        velocity_scale=config.target_mean_speed / mean_shape,
        accumulation=accumulation,
    )
