"""
This module contains the RunConfig class, the resolved configuration every command runs from.

Values come from built-in defaults, then an optional ``key = value`` file with
sections, then command-line overrides. The resolved configuration is written
into every output directory.
"""

import configparser
from typing import Dict, List, Optional, Tuple

import numpy as np

from iceemu.common.errors import ConfigError
from iceemu.mesh.graph import GraphOptions, Kernel
from iceemu.mesh.mesh import Mesh, triangulate_rectangle
from iceemu.models.fcn import FcnConfig
from iceemu.models.gcn import GcnConfig
from iceemu.oracle.fields import OracleConfig
from iceemu.pipeline.split import SplitSpec
from iceemu.pipeline.train import TrainConfig

DEFAULTS: Dict[str, Dict[str, str]] = {
    "mesh": {
        "spacing_km": "5.0",
        "width_km": "200.0",
        "height_km": "150.0",
        "jitter_fraction": "0.2",
        "seed": "0",
    },
    "graph": {
        "self_loops": "true",
        "kernel": "inverse-exp",
        "distance_units": "km",
    },
    "oracle": {
        "base_thickness_front_m": "400.0",
        "base_thickness_slope_m": "1500.0",
        "thickness_ripple_m": "100.0",
        "grounding_line_km": "70.0",
        "grounding_width_km": "8.0",
        "sharp_mask": "false",
        "horizon_years": "20.0",
        "target_growth_m": "25.0",
        "target_thinning_m": "-50.0",
        "target_melt_rate": "60.0",
        "target_mean_speed": "525.0",
        "target_speedup": "200.0",
    },
    "data": {
        "rates": "0:70:2",
        "months": "240",
        "mode": "analytic",
    },
    "model": {
        "hidden_width": "128",
        "num_graph_layers": "5",
        "num_conv_layers": "6",
        "kernel_size": "3",
        "leaky_slope": "0.01",
    },
    "train": {
        "epochs": "200",
        "learning_rate": "0.01",
        "early_stop": "false",
        "patience": "20",
    },
    "grid": {
        "cells": "64",
    },
    "split": {
        "validation_rates": "10, 30, 50, 70",
        "test_rates": "0, 20, 40, 60",
    },
    "run": {
        "seed": "0",
        "out": "runs",
        "workers": "1",
        "bench_repetitions": "3",
        "sweep_rates": "0, 20, 40, 60",
    },
}

DATA_MODES = ("analytic", "transport")


def parse_rates(text: str) -> List[float]:
    """
    Parse a rate list: comma-separated values, or ``start:stop:step`` with stop included.

    :raises ConfigError: On unparsable text or a non-positive step
    """
    text = text.strip()
    if not text:
        return []
    try:
        if ":" in text:
            start, stop, step = (float(part) for part in text.split(":"))
            if not step > 0:
                raise ConfigError(f"rate step must be positive, got {step}")
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            return [start + k * step for k in range(max(count, 0))]
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse rate list {text!r}") from exc


class RunConfig:
    """
    Fully resolved run configuration.

    :param parser: A ConfigParser holding every section and key of DEFAULTS
    """

    def __init__(self, parser: configparser.ConfigParser):
        self.parser = parser

    @classmethod
    def load(cls, path=None, overrides: Optional[Dict[Tuple[str, str], str]] = None) -> "RunConfig":
        """
        Resolve defaults, then the file at path, then overrides keyed by (section, key).

        :raises ConfigError: On a missing file, unknown section or key, or unparsable value
        """
        parser = configparser.ConfigParser()
        parser.read_dict(DEFAULTS)
        if path is not None:
            user = configparser.ConfigParser()
            try:
                with open(path, encoding="utf-8") as f:
                    user.read_file(f)
            except OSError as exc:
                raise ConfigError(f"cannot read config file {path}: {exc}") from exc
            except configparser.Error as exc:
                raise ConfigError(f"malformed config file {path}: {exc}") from exc
            for section in user.sections():
                if section not in DEFAULTS:
                    raise ConfigError(f"unknown config section [{section}]")
                for key, value in user.items(section, raw=True):
                    if key not in DEFAULTS[section]:
                        raise ConfigError(f"unknown config key {key!r} in section [{section}]")
                    parser.set(section, key, value)
        for (section, key), value in (overrides or {}).items():
            if value is not None:
                parser.set(section, key, str(value))
        config = cls(parser)
        config.validate()
        return config

    def validate(self):
        """Build every typed view once so a bad value fails before any command runs."""
        self.oracle_config()
        self.graph_options()
        self.split_spec()
        self.train_config("gcn")
        self.model_config("gcn")
        self.model_config("fcn")
        if self.months < 1:
            raise ConfigError(f"months must be at least 1, got {self.months}")
        if self.mode not in DATA_MODES:
            raise ConfigError(f"unknown data mode {self.mode!r}; expected one of {DATA_MODES}")
        if not self.rates:
            raise ConfigError("at least one melting rate is required")
        if self.workers < 1 or self.bench_repetitions < 1:
            raise ConfigError("workers and bench_repetitions must be at least 1")
        if self.grid_cells < 2:
            raise ConfigError(f"grid cells must be at least 2, got {self.grid_cells}")

    def _get(self, section: str, key: str, kind=str):
        try:
            if kind is bool:
                return self.parser.getboolean(section, key)
            if kind is int:
                return self.parser.getint(section, key)
            if kind is float:
                return self.parser.getfloat(section, key)
            return self.parser.get(section, key).strip()
        except ValueError as exc:
            value = self.parser.get(section, key)
            raise ConfigError(f"[{section}] {key} = {value!r} is not a valid {kind.__name__}") from exc

    @property
    def seed(self) -> int:
        return self._get("run", "seed", int)

    @property
    def out(self) -> str:
        return self._get("run", "out")

    @property
    def workers(self) -> int:
        return self._get("run", "workers", int)

    @property
    def bench_repetitions(self) -> int:
        return self._get("run", "bench_repetitions", int)

    @property
    def sweep_rates(self) -> List[float]:
        return parse_rates(self._get("run", "sweep_rates"))

    @property
    def rates(self) -> List[float]:
        return parse_rates(self._get("data", "rates"))

    @property
    def months(self) -> int:
        return self._get("data", "months", int)

    @property
    def mode(self) -> str:
        return self._get("data", "mode")

    @property
    def grid_cells(self) -> int:
        return self._get("grid", "cells", int)

    def build_mesh(self) -> Mesh:
        return triangulate_rectangle(
            self._get("mesh", "spacing_km", float),
            self._get("mesh", "width_km", float),
            self._get("mesh", "height_km", float),
            self._get("mesh", "jitter_fraction", float),
            self._get("mesh", "seed", int),
        )

    def graph_options(self) -> GraphOptions:
        kernel = self._get("graph", "kernel")
        try:
            kernel = Kernel(kernel).value
        except ValueError:
            raise ConfigError(f"unknown kernel {kernel!r}") from None
        options = GraphOptions(self._get("graph", "self_loops", bool), kernel, self._get("graph", "distance_units"))
        if options.distance_units not in ("km", "m"):
            raise ConfigError(f"unknown distance unit {options.distance_units!r}")
        return options

    def oracle_config(self) -> OracleConfig:
        values = {}
        for key in DEFAULTS["oracle"]:
            values[key] = self._get("oracle", key, bool if key == "sharp_mask" else float)
        return OracleConfig(
            width_km=self._get("mesh", "width_km", float), height_km=self._get("mesh", "height_km", float), **values
        )

    def split_spec(self) -> SplitSpec:
        return SplitSpec(
            tuple(parse_rates(self._get("split", "validation_rates"))),
            tuple(parse_rates(self._get("split", "test_rates"))),
        )

    def train_config(self, kind: str) -> TrainConfig:
        return TrainConfig(
            epochs=self._get("train", "epochs", int),
            learning_rate=self._get("train", "learning_rate", float),
            seed=self.seed,
            kind=kind,
            early_stop=self._get("train", "early_stop", bool),
            patience=self._get("train", "patience", int),
        )

    def model_config(self, kind: str):
        width = self._get("model", "hidden_width", int)
        slope = self._get("model", "leaky_slope", float)
        if kind == "gcn":
            return GcnConfig(
                hidden_width=width, num_graph_layers=self._get("model", "num_graph_layers", int), leaky_slope=slope
            )
        return FcnConfig(
            hidden_width=width,
            num_conv_layers=self._get("model", "num_conv_layers", int),
            kernel_size=self._get("model", "kernel_size", int),
            leaky_slope=slope,
        )

    def write(self, path):
        """Write the resolved configuration; reading it back reproduces this run."""
        with open(path, "w", encoding="utf-8") as f:
            self.parser.write(f)
