import numpy as np
import pytest

from iceemu.common.errors import ConfigError, DomainError
from iceemu.common.util import area_weighted_mean
from iceemu.oracle.fields import OracleConfig, analytic_fields, calibrate_oracle


def test_default_terminus_lies_beyond_the_front():
    config = OracleConfig()
    assert config.terminus_km == (-50.0, 75.0)
    assert not config.calibrated


def test_uncalibrated_config_is_rejected():
    with pytest.raises(ConfigError):
        analytic_fields(OracleConfig(), 10.0, 10.0, 0.0, 0.0)


@pytest.mark.parametrize("kwargs", [{"width_km": 0.0}, {"horizon_years": -1.0}, {"growth_rate": -1.0}])
def test_invalid_config_values(kwargs):
    with pytest.raises(ConfigError):
        OracleConfig(**kwargs)


@pytest.mark.parametrize("rate", [0.0, 20.0, 70.0])
def test_base_state_at_time_zero(config, mesh, rate):
    x, y = mesh.node_coords.T
    vx, vy, thickness = analytic_fields(config, x, y, 0.0, rate)
    assert np.array_equal(thickness, config.base_thickness(x, y))
    speed = np.hypot(vx, vy)
    assert speed == pytest.approx(config.velocity_scale * config.speed_shape(x, y), rel=1e-12)


def test_no_melt_keeps_speed_constant(config, mesh):
    x, y = mesh.node_coords.T
    early = analytic_fields(config, x, y, 0.0, 0.0)
    late = analytic_fields(config, x, y, 20.0, 0.0)
    assert np.array_equal(early[0], late[0])
    assert np.array_equal(early[1], late[1])


def test_flow_points_toward_terminus(config):
    vx, vy, _ = analytic_fields(config, 100.0, 75.0, 5.0, 10.0)
    assert vx < 0
    assert vy == pytest.approx(0.0, abs=1e-9)


def test_calibration_hits_targets(config, mesh):
    x, y = mesh.node_coords.T
    areas = mesh.dual.areas
    base = config.base_thickness(x, y)

    _, _, grown = analytic_fields(config, x, y, 20.0, 0.0)
    assert area_weighted_mean(grown - base, areas) == pytest.approx(25.0, rel=1e-9)

    vx, vy, thinned = analytic_fields(config, x, y, 20.0, 60.0)
    assert area_weighted_mean(thinned - base, areas) == pytest.approx(-50.0, rel=1e-9)

    vx0, vy0, _ = analytic_fields(config, x, y, 20.0, 0.0)
    mean_speed = area_weighted_mean(np.hypot(vx0, vy0), areas)
    assert mean_speed == pytest.approx(525.0, rel=1e-9)
    assert area_weighted_mean(np.hypot(vx, vy), areas) - mean_speed == pytest.approx(200.0, rel=1e-9)


def test_calibration_relations(config):
    assert config.melt_sensitivity == pytest.approx(config.growth_rate / 20.0)
    assert config.speedup == pytest.approx(200.0 / (525.0 * 60.0))
    assert config.accumulation > 0


def test_monotone_in_melting_rate(config):
    x, y = np.full(5, 30.0), np.linspace(10.0, 140.0, 5)
    thick = [analytic_fields(config, x, y, 3.0, rate)[2] for rate in (0.0, 10.0, 20.0)]
    speed = [np.hypot(*analytic_fields(config, x, y, 3.0, rate)[:2]) for rate in (0.0, 10.0, 20.0)]
    assert np.all(thick[0] > thick[1]) and np.all(thick[1] > thick[2])
    assert np.all(speed[0] < speed[1]) and np.all(speed[1] < speed[2])


def test_sharp_mask_is_binary(mesh):
    config = OracleConfig(sharp_mask=True)
    phi = config.floating_mask(mesh.node_coords[:, 0], mesh.node_coords[:, 1])
    assert set(np.unique(phi)) <= {0.0, 1.0}
    assert calibrate_oracle(config, mesh).calibrated


def test_calibration_requires_floating_ice(mesh):
    with pytest.raises(ConfigError):
        calibrate_oracle(OracleConfig(grounding_line_km=-10.0, sharp_mask=True), mesh)


@pytest.mark.parametrize(
    "x, y, t, m",
    [(-1.0, 10.0, 0.0, 0.0), (10.0, 151.0, 0.0, 0.0), (10.0, 10.0, -0.1, 0.0), (10.0, 10.0, 0.0, -2.0)],
)
def test_domain_errors(config, x, y, t, m):
    with pytest.raises(DomainError):
        analytic_fields(config, x, y, t, m)
