"""Boundary basis construction and the Dirichlet collocation fit.

The real parts of the formal powers restricted to the boundary are
orthonormalized under the arc-length inner product, interpolated by periodic
cubic splines, and collocated against the boundary condition at 2N+1 angles.
The figure of merit is the arc-length L2 norm of the boundary residual.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import lu_factor, lu_solve

from .formal_powers import FormalPowerTable
from .geometry import StarDomain, build_angle_set

__all__ = [
    "RankDeficiencyError",
    "IllConditionedSystemError",
    "BoundaryBasis",
    "SolveReport",
    "boundary_traces",
    "orthonormalize",
    "collocation_fit",
    "total_error",
    "evaluate_interior",
    "scaled_boundary_condition",
]

CONDITION_LIMIT = 1e12
_RANK_TOL = 1e-12


class RankDeficiencyError(ValueError):
    """A trace became numerically dependent during orthonormalization."""

    def __init__(self, index: int, ratio: float):
        self.index = index
        self.ratio = ratio
        super().__init__(
            f"trace {index} lost {1/max(ratio, 1e-300):.1e} of its norm under projection; "
            "the boundary traces are rank deficient at working precision")


class IllConditionedSystemError(RuntimeError):
    """Collocation matrix condition estimate exceeds the safety limit."""


def boundary_traces(table: FormalPowerTable) -> np.ndarray:
    """Raw trace matrix, one row per basis function, one column per radius.

    Row order: Re Z^(n)(1, 0; .) for n = 0..N, then Re Z^(n)(i, 0; .) for
    n = 1..N.  The n = 0 member of the second family is skipped: the seed is
    purely imaginary, so its real part vanishes identically.
    """
    rows = [table.boundary_values(1, n).real for n in range(table.N + 1)]
    rows += [table.boundary_values(1j, n).real for n in range(1, table.N + 1)]
    return np.array(rows)


@dataclass(frozen=True)
class BoundaryBasis:
    """Orthonormal boundary functions as samples plus periodic cubic splines.

    ``transform`` is the lower-triangular map from raw traces to the
    orthonormal samples: samples = transform @ raw_traces.
    """

    samples: np.ndarray            # (K, Q)
    transform: np.ndarray          # (K, K) lower triangular
    angles: np.ndarray             # (Q,)
    weights: np.ndarray            # (Q,)
    splines: tuple = field(repr=False, default=())

    @property
    def size(self) -> int:
        return self.samples.shape[0]

    @property
    def N(self) -> int:
        return (self.size - 1) // 2

    def evaluate(self, theta) -> np.ndarray:
        """Basis values at arbitrary angles; exact at stored sample angles."""
        # wrap into the spline's knot span [angles[0], angles[0] + 2*pi)
        base = self.angles[0]
        th = np.atleast_1d(base + np.mod(np.asarray(theta, dtype=float) - base,
                                         2 * np.pi))
        out = np.empty((self.size, len(th)))
        idx = np.searchsorted(self.angles, th)
        for j, t in enumerate(th):
            i = idx[j]
            if i < len(self.angles) and abs(self.angles[i] - t) < 1e-12:
                out[:, j] = self.samples[:, i]
            else:
                out[:, j] = [s(t) for s in self.splines]
        return out

    def gram_matrix(self) -> np.ndarray:
        return (self.samples * self.weights) @ self.samples.T


def orthonormalize(traces: np.ndarray, weights: np.ndarray, angles) -> BoundaryBasis:
    """Modified Gram-Schmidt under the weighted inner product, with one
    reorthogonalization pass, plus periodic cubic splines through the result.

    Raises :class:`RankDeficiencyError` when a trace keeps less than
    ``1e-12`` of its norm after projection.
    """
    th = np.asarray(getattr(angles, "angles", angles), dtype=float)
    V = np.asarray(traces, dtype=float)
    w = np.asarray(weights, dtype=float)
    K, Q = V.shape
    if w.shape != (Q,) or th.shape != (Q,):
        raise ValueError("traces, weights and angles disagree on the sample count")

    U = np.zeros_like(V)
    T = np.eye(K)
    for k in range(K):
        v = V[k].copy()
        t = np.zeros(K)
        t[k] = 1.0
        norm0 = np.sqrt(np.sum(w * v * v))
        for _ in range(2):  # MGS + one reorthogonalization pass
            for j in range(k):
                c = np.sum(w * v * U[j])
                v -= c * U[j]
                t -= c * T[j]
        norm = np.sqrt(np.sum(w * v * v))
        if norm < _RANK_TOL * norm0:
            raise RankDeficiencyError(k, norm / norm0)
        U[k] = v / norm
        T[k] = t / norm

    th_ext = np.concatenate([th, [th[0] + 2 * np.pi]])
    splines = tuple(
        CubicSpline(th_ext, np.concatenate([U[k], [U[k, 0]]]), bc_type="periodic")
        for k in range(K))
    return BoundaryBasis(samples=U, transform=T, angles=th, weights=w, splines=splines)


def total_error(residual, weights) -> float:
    """Arc-length L2 norm of the boundary residual."""
    r = np.asarray(residual, dtype=float)
    w = np.asarray(weights, dtype=float)
    return float(np.sqrt(np.sum(w * r * r)))


@dataclass
class SolveReport:
    """Result of one boundary fit: coefficients, residual profile, total error."""

    total_error: float
    coefficients: np.ndarray        # alpha, for the orthonormal basis
    raw_coefficients: np.ndarray    # beta = transform^T alpha, for the raw traces
    collocation_angles: np.ndarray
    collocation_values: np.ndarray
    collocation_residual: float     # max |U alpha - gamma| after refinement
    condition_number: float
    boundary_angles: np.ndarray
    boundary_condition: np.ndarray
    fitted: np.ndarray
    residual: np.ndarray
    wall_time: float
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "total_error": self.total_error,
            "condition_number": self.condition_number,
            "collocation_residual": self.collocation_residual,
            "coefficients": self.coefficients.tolist(),
            "raw_coefficients": self.raw_coefficients.tolist(),
            "collocation_angles": self.collocation_angles.tolist(),
            "wall_time": self.wall_time,
            "config": self.config,
        }

    def save_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    def save_residual_csv(self, path) -> None:
        """Residual profile as rows theta, u_c, fit, residual."""
        with open(path, "w") as fh:
            fh.write("theta,u_c,fit,residual\n")
            for t, u, f, r in zip(self.boundary_angles, self.boundary_condition,
                                  self.fitted, self.residual):
                fh.write(f"{float(t)!r},{float(u)!r},{float(f)!r},{float(r)!r}\n")


def collocation_fit(
    basis: BoundaryBasis,
    boundary_condition: Callable[[np.ndarray, np.ndarray], np.ndarray],
    domain: StarDomain,
    pinned_angles: Sequence[float] = (),
    allow_ill_conditioned: bool = False,
    config: dict | None = None,
) -> SolveReport:
    """Interpolate the boundary condition at 2N+1 collocation angles.

    The collocation angles are uniform, with nearest-angle replacement by
    ``pinned_angles`` (used to force boundary corners into the fit).  The
    square system is solved by LU with partial pivoting plus one step of
    iterative refinement; a condition estimate above ``CONDITION_LIMIT``
    raises unless ``allow_ill_conditioned`` is set.
    """
    start = time.perf_counter()
    K = basis.size
    omegas = build_angle_set(K, pinned=pinned_angles).angles
    Umat = basis.evaluate(omegas).T
    bx, by = domain.boundary_xy(omegas)
    gamma = np.asarray(boundary_condition(bx, by), dtype=float)
    if not np.all(np.isfinite(gamma)):
        bad = omegas[~np.isfinite(gamma)]
        raise ValueError(f"boundary condition undefined at collocation angles {bad}")

    cond = float(np.linalg.cond(Umat))
    if cond > CONDITION_LIMIT and not allow_ill_conditioned:
        raise IllConditionedSystemError(
            f"collocation matrix condition estimate {cond:.2e} exceeds {CONDITION_LIMIT:.0e}")

    lu = lu_factor(Umat)
    alpha = lu_solve(lu, gamma)
    alpha += lu_solve(lu, gamma - Umat @ alpha)  # one refinement step
    colloc_residual = float(np.max(np.abs(Umat @ alpha - gamma)))

    bx_all, by_all = domain.boundary_xy(basis.angles)
    u_c = np.asarray(boundary_condition(bx_all, by_all), dtype=float)
    fitted = basis.samples.T @ alpha
    residual = fitted - u_c
    err = total_error(residual, basis.weights)

    return SolveReport(
        total_error=err,
        coefficients=alpha,
        raw_coefficients=basis.transform.T @ alpha,
        collocation_angles=omegas,
        collocation_values=gamma,
        collocation_residual=colloc_residual,
        condition_number=cond,
        boundary_angles=basis.angles,
        boundary_condition=u_c,
        fitted=fitted,
        residual=residual,
        wall_time=time.perf_counter() - start,
        config=dict(config or {}),
    )


def scaled_boundary_condition(field, boundary_condition):
    """Dirichlet data premultiplied by sqrt(sigma).

    Fitting the scaled data and dividing the interior combination by
    sqrt(sigma) evaluates the potential that actually solves the conduction
    equation: Re W / sqrt(sigma) is a solution whenever W solves the Vekua
    equation of the pair (sqrt(sigma), i/sqrt(sigma)).
    """

    def scaled(x, y):
        return np.sqrt(field.evaluate(x, y)) * boundary_condition(x, y)

    return scaled


def evaluate_interior(report: SolveReport, table: FormalPowerTable, z,
                      field=None) -> float:
    """Raw-coefficient combination of the stored powers at an interior point.

    The combination reproduces the fitted boundary values on the boundary.
    Values between stored samples are interpolated linearly in radius and
    angle.  With ``field`` given, the result is divided by sqrt(sigma(z));
    use together with :func:`scaled_boundary_condition` for a fit whose
    interior values solve the conduction equation.
    """
    if table.interior is None:
        raise ValueError("interior evaluation needs a table built with keep_interior=True")
    z = complex(z)
    r = abs(z)
    th = float(np.mod(np.angle(z), 2 * np.pi))
    angles = table.angles
    Q = len(angles)
    q0 = (int(np.searchsorted(angles, th, side="right")) - 1) % Q
    q1 = (q0 + 1) % Q
    gap = float(np.mod(angles[q1] - angles[q0], 2 * np.pi)) or 2 * np.pi / Q
    t = float(np.mod(th - angles[q0], 2 * np.pi)) / gap
    if r > max(table.grids[q0].boundary_radius, table.grids[q1].boundary_radius) + 1e-12:
        raise ValueError(f"point {z} lies outside the stored domain")

    beta = report.raw_coefficients
    value = 0.0
    k = 0
    for fam_coeff, n_start in ((1, 0), (1j, 1)):
        for n in range(n_start, table.N + 1):
            prof = table.interior_values(fam_coeff, n)
            v0 = np.interp(r, table.grids[q0].r, prof[q0].real)
            v1 = np.interp(r, table.grids[q1].r, prof[q1].real)
            value += beta[k] * ((1 - t) * v0 + t * v1)
            k += 1
    if field is not None:
        value /= float(np.sqrt(field.evaluate(np.array(z.real), np.array(z.imag))))
    return float(value)
