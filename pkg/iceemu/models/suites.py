"""
Finite-difference suites covering every layer type and both full model losses.

Each suite builds a small random problem, wraps its forward/backward pair as
a loss function and samples it with `finite_diff_check`. Full-model suites
check every parameter array separately so the report names the layer that
disagrees.
"""

from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from iceemu.common.io_interface import DummyIOInterface, IOInterface
from iceemu.mesh.graph import build_graph
from iceemu.mesh.mesh import triangulate_rectangle
from iceemu.models.conv import conv2d_backward, conv2d_forward
from iceemu.models.fcn import FcnConfig, FcnModel
from iceemu.models.gcn import GcnConfig, GcnModel, gcn_layer_backward, gcn_layer_forward
from iceemu.nn.core import masked_mse, mse
from iceemu.nn.gradcheck import finite_diff_check
from iceemu.nn.params import LayerParams

TOLERANCE = 1e-5
CORRUPTION_FACTOR = 1.5


@dataclass(frozen=True)
class CheckResult:
    suite: str
    parameter: str
    max_error: float
    samples: int
    tolerance: float = TOLERANCE

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tolerance

    def report_line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.suite} {self.parameter} max_rel_error={self.max_error!r} samples={self.samples}"


def _small_graph(seed: int):
    mesh = triangulate_rectangle(1.0, 3.0, 2.0, jitter_fraction=0.2, seed=seed)
    return build_graph(mesh)


def _check_arrays(
    suite: str,
    names: Sequence[str],
    loss_fn: Callable,
    params: List[np.ndarray],
    sample_count: int,
    h: float,
    seed: int,
) -> List[CheckResult]:
    results = []
    for index, name in enumerate(names):
        samples = min(sample_count, params[index].size)
        error = finite_diff_check(loss_fn, params, samples, h, seed + index, param_index=index)
        results.append(CheckResult(suite, name, error, samples))
    return results


def _corrupted(loss_fn: Callable, factor: float) -> Callable:
    def wrapped(params):
        loss, grads = loss_fn(params)
        grads = list(grads)
        grads[0] = grads[0] * factor
        return loss, grads

    return wrapped


def graph_conv_suite(rng, sample_count, h, seed) -> List[CheckResult]:
    graph = _small_graph(seed)
    h_in = rng.normal(size=(graph.num_nodes, 5))
    weight = rng.normal(size=(6, 5))
    cotangent = rng.normal(size=(graph.num_nodes, 6))

    def loss_fn(params):
        features, w = params
        out, cache = gcn_layer_forward(graph, features, LayerParams(w), activation=True)
        d_in, d_w = gcn_layer_backward(graph, cache, cotangent)
        return float(np.sum(cotangent * out)), [d_in, d_w]

    return _check_arrays("graph_conv_layer", ["input", "weight"], loss_fn, [h_in, weight], sample_count, h, seed)


def dense_head_suite(rng, sample_count, h, seed) -> List[CheckResult]:
    features = rng.normal(size=(12, 6))
    weight = rng.normal(size=(3, 6))
    bias = rng.normal(size=3)
    cotangent = rng.normal(size=(12, 3))

    def loss_fn(params):
        x, w, b = params
        out = x @ w.T + b
        return float(np.sum(cotangent * out)), [cotangent @ w, cotangent.T @ x, cotangent.sum(axis=0)]

    return _check_arrays(
        "dense_head", ["input", "weight", "bias"], loss_fn, [features, weight, bias], sample_count, h, seed
    )


def conv2d_suite(rng, sample_count, h, seed) -> List[CheckResult]:
    x = rng.normal(size=(3, 6, 5))
    kernel = rng.normal(size=(4, 3, 3, 3))
    bias = rng.normal(size=4)
    cotangent = rng.normal(size=(4, 6, 5))

    def loss_fn(params):
        out, cache = conv2d_forward(*params)
        return float(np.sum(cotangent * out)), list(conv2d_backward(cache, cotangent))

    return _check_arrays("conv2d_layer", ["input", "kernel", "bias"], loss_fn, [x, kernel, bias], sample_count, h, seed)


def loss_suite(rng, sample_count, h, seed) -> List[CheckResult]:
    pred = rng.normal(size=(3, 5, 4))
    target = rng.normal(size=(3, 5, 4))
    mask = rng.uniform(size=(5, 4)) > 0.3

    def plain(params):
        loss, grad = mse(params[0], target)
        return loss, [grad]

    # Masked cells carry no gradient, so sample the valid cells only.
    def masked(params):
        full = pred.copy()
        full[:, mask] = params[0]
        loss, grad = masked_mse(full, target, mask)
        return loss, [grad[:, mask]]

    return _check_arrays("mse", ["pred"], plain, [pred.copy()], sample_count, h, seed) + _check_arrays(
        "masked_mse", ["pred"], masked, [pred[:, mask].copy()], sample_count, h, seed
    )


def gcn_suite(rng, sample_count, h, seed, corrupt: bool = False) -> List[CheckResult]:
    graph = _small_graph(seed)
    model = GcnModel(GcnConfig(hidden_width=8, num_graph_layers=3, seed=seed), graph)
    inputs = rng.normal(size=(graph.num_nodes, 4))
    targets = rng.normal(size=(graph.num_nodes, 3))

    def loss_fn(params):
        return model.loss_and_grad(inputs, targets)

    if corrupt:
        loss_fn = _corrupted(loss_fn, CORRUPTION_FACTOR)
    return _check_arrays("gcn_full", model.params.names(), loss_fn, model.params.arrays(), sample_count, h, seed)


def fcn_suite(rng, sample_count, h, seed, corrupt: bool = False) -> List[CheckResult]:
    model = FcnModel(FcnConfig(hidden_width=4, num_conv_layers=3, seed=seed))
    inputs = rng.normal(size=(4, 6, 5))
    targets = rng.normal(size=(3, 6, 5))
    mask = np.ones((6, 5), dtype=bool)
    mask[0, :2] = False

    def loss_fn(params):
        return model.loss_and_grad(inputs, targets, mask)

    if corrupt:
        loss_fn = _corrupted(loss_fn, CORRUPTION_FACTOR)
    return _check_arrays("fcn_full", model.params.names(), loss_fn, model.params.arrays(), sample_count, h, seed)


def run_gradcheck_suites(
    kinds: Sequence[str] = ("gcn", "fcn"),
    sample_count: int = 50,
    h: float = 1e-5,
    seed: int = 0,
    corrupt: bool = False,
    io_interface: Optional[IOInterface] = None,
) -> List[CheckResult]:
    """
    Run the layer suites plus the full-model suites for the requested kinds.

    :param kinds: Any of "gcn" and "fcn"
    :param sample_count: Coordinates sampled per parameter array (capped at its size)
    :param h: Finite-difference step
    :param seed: Seed for the random problems and sample choice
    :param corrupt: Scale the first analytic gradient of each full model, which must then fail
    :param io_interface: Receives one line per check
    :return: Every check result, in run order
    """
    io_interface = io_interface or DummyIOInterface()
    rng = np.random.default_rng(seed)
    results = []
    results += graph_conv_suite(rng, sample_count, h, seed)
    results += dense_head_suite(rng, sample_count, h, seed)
    results += conv2d_suite(rng, sample_count, h, seed)
    results += loss_suite(rng, sample_count, h, seed)
    if "gcn" in kinds:
        results += gcn_suite(rng, sample_count, h, seed, corrupt)
    if "fcn" in kinds:
        results += fcn_suite(rng, sample_count, h, seed, corrupt)
    for result in results:
        io_interface.output(result.report_line())
    return results
