import numpy as np
import pytest

from iceemu.cli.sweep import FOOTER, build_sweep, write_sweep_series, write_sweep_summary
from iceemu.common.errors import ConfigError
from iceemu.mesh.mesh import triangulate_rectangle
from iceemu.oracle.dataset import generate_dataset
from iceemu.oracle.fields import OracleConfig, calibrate_oracle


@pytest.fixture
def mesh():
    return triangulate_rectangle(25.0, 200.0, 150.0, jitter_fraction=0.2, seed=5)


@pytest.fixture
def horizon_report(mesh):
    oracle = calibrate_oracle(OracleConfig(), mesh)
    frames = generate_dataset(mesh, oracle, [0.0, 60.0], 241)
    return build_sweep("oracle", mesh, frames.rates, frames.fields)


def test_oracle_hits_calibrated_thickness_changes(horizon_report):
    np.testing.assert_allclose(horizon_report.thickness_change(), [25.0, -50.0], rtol=1e-9)


def test_melting_speeds_up_flow(horizon_report):
    assert horizon_report.mean_velocity[1, -1] > horizon_report.mean_velocity[0, -1]
    assert horizon_report.mean_velocity[0, -1] == pytest.approx(horizon_report.mean_velocity[0, 0], rel=1e-12)


def test_mass_and_sea_level(horizon_report):
    expected_gt = 917.0 * 1e6 * 200.0 * 150.0 * 25.0 / 1e12
    assert horizon_report.mass_change_gt[0] == pytest.approx(expected_gt, rel=1e-9)
    assert horizon_report.sea_level_mm[0] == pytest.approx(-expected_gt / 362.5, rel=1e-9)
    assert horizon_report.sea_level_mm[1] > 0


def test_flat_mean_reported_alongside(horizon_report):
    assert horizon_report.flat_thickness_change()[0] > 0
    assert horizon_report.flat_thickness_change()[0] != horizon_report.thickness_change()[0]


def test_empty_horizon_rejected(mesh):
    with pytest.raises(ConfigError):
        build_sweep("oracle", mesh, [0.0], np.zeros((1, 0, mesh.num_nodes, 3)))


def test_csv_outputs(horizon_report, tmp_path):
    series, summary = tmp_path / "series.csv", tmp_path / "summary.csv"
    write_sweep_series([horizon_report], series)
    write_sweep_summary([horizon_report], summary)
    rows = series.read_text().splitlines()
    assert rows[0] == "source,rate,month,mean_velocity_m_per_year,mean_thickness_m"
    assert len(rows) == 1 + 2 * 241
    lines = summary.read_text().splitlines()
    assert len(lines) == 1 + 2 + 1
    assert lines[-1] == f"# {FOOTER}"
