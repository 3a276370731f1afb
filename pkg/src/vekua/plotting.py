"""Figure rendering for solve reports.

Plots keep the angular perspective: the ordinate axis carries the boundary
angle over [-pi, pi) and the abscissa the potential (or residual) value, so
corner angles read as horizontal lines.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .geometry import wrap_angle

__all__ = ["render_boundary_comparison", "render_residual"]


def _angular_order(report):
    theta = wrap_angle(report.boundary_angles)
    order = np.argsort(theta)
    return theta[order], order


def render_boundary_comparison(report, path, dpi: int = 150) -> None:
    """Boundary condition against the fitted combination, angle on the y-axis."""
    theta, order = _angular_order(report)
    fig, ax = plt.subplots(figsize=(5.0, 6.0))
    ax.plot(report.boundary_condition[order], theta, "k-", lw=1.2, label="boundary condition")
    ax.plot(report.fitted[order], theta, "r--", lw=1.0, label="fit")
    ax.set_xlabel("potential")
    ax.set_ylabel(r"$\theta$ [rad]")
    ax.set_ylim(-np.pi, np.pi)
    ax.legend(loc="best", fontsize=8)
    e = report.total_error
    ax.set_title(f"total error {e:.4e}", fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)


def render_residual(report, path, dpi: int = 150) -> None:
    """Residual profile, angle on the y-axis."""
    theta, order = _angular_order(report)
    fig, ax = plt.subplots(figsize=(5.0, 6.0))
    ax.plot(report.residual[order], theta, "b-", lw=1.0)
    ax.axvline(0.0, color="k", lw=0.5)
    ax.set_xlabel("residual")
    ax.set_ylabel(r"$\theta$ [rad]")
    ax.set_ylim(-np.pi, np.pi)
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
