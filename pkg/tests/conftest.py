"""Shared helpers for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

import vekua as vk


def constant_field(value: float = 1.0) -> vk.ConductivityField:
    return vk.ConductivityField(
        f"const_{value}", "analytic-closed-form",
        lambda x, y, v=value: np.full_like(np.asarray(x, dtype=float), v))


def disk_pipeline(field, N, P, Q, mode="limiting_c1", keep_interior=False):
    """Build grids, sequence, table, weights, and basis on the unit disk."""
    domain = vk.unit_disk()
    angle_set = vk.build_angle_set(Q)
    grids = [vk.build_radial_grid(domain, th, P) for th in angle_set.angles]
    seq = vk.generating_sequence(field, grids, mode)
    table = vk.build_formal_powers(seq, N, keep_interior=keep_interior)
    weights = vk.arc_length_weights(domain, angle_set)
    basis = vk.orthonormalize(vk.boundary_traces(table), weights, angle_set)
    return domain, angle_set, table, weights, basis


@pytest.fixture(scope="session")
def sigma_one():
    return constant_field(1.0)
