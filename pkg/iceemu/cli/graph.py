"""
Static plots: sweep trajectories and per-node field maps, written as PNG files.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.tri import Triangulation  # noqa: E402

from iceemu.mesh.mesh import Mesh  # noqa: E402

LINESTYLES = {"oracle": "-", "gcn": "--", "fcn": ":"}


class SweepGraph:
    def __init__(self, months: int):
        self.months = months
        self.fig, (self.ax_velocity, self.ax_thickness) = plt.subplots(1, 2, figsize=(12, 4.5))
        self.colors = {}

        self.ax_velocity.set_title("Mean ice velocity")
        self.ax_velocity.set_xlabel("Month")
        self.ax_velocity.set_ylabel("m/year")
        self.ax_thickness.set_title("Mean ice thickness")
        self.ax_thickness.set_xlabel("Month")
        self.ax_thickness.set_ylabel("m")

    def _color(self, rate: float):
        if rate not in self.colors:
            self.colors[rate] = plt.cm.viridis(len(self.colors) / 8.0 % 1.0)
        return self.colors[rate]

    def update(self, report):
        """Add one source's trajectories, one line per rate."""
        months = np.arange(report.months)
        style = LINESTYLES.get(report.source, "-.")
        for r, rate in enumerate(report.rates):
            label = f"{report.source} m={rate:g}"
            color = self._color(float(rate))
            self.ax_velocity.plot(months, report.mean_velocity[r], style, color=color, label=label)
            self.ax_thickness.plot(months, report.mean_thickness[r], style, color=color, label=label)

    def save(self, path):
        self.ax_thickness.legend(fontsize="small", ncol=2)
        self.fig.tight_layout()
        self.fig.savefig(path, dpi=120)
        plt.close(self.fig)


def field_map(mesh: Mesh, values: np.ndarray, title: str, unit: str, path):
    """Per-node values drawn with Gouraud shading over the mesh triangles."""
    triangulation = Triangulation(mesh.node_coords[:, 0], mesh.node_coords[:, 1], mesh.elements)
    fig, ax = plt.subplots(figsize=(7, 5))
    image = ax.tripcolor(triangulation, values, shading="gouraud", cmap="viridis")
    fig.colorbar(image, ax=ax, label=unit)
    ax.set_title(title)
    ax.set_xlabel("x (km)")
    ax.set_ylabel("y (km)")
    ax.set_aspect("equal")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
