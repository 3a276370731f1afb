"""Conductivity fields, strip interpolation, and Bers generating sequences.

A conductivity field is a positive function sigma(x, y) on the domain.  The
solver consumes it through a generating sequence: pair values (F_m, G_m) of
the form (p, i/p) sampled on the radial grids, with period c = 1 (limiting
case, F_0 = sqrt(sigma)) or c = 2 (separable strip interpolation, or the
y-strip limit with F_1 = 1/sqrt(sigma)).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .geometry import RadialGrid, StarDomain

__all__ = [
    "ConductivityError",
    "ConductivityField",
    "StripInterpolation",
    "GeneratingSequence",
    "builtin_case",
    "geometric_case",
    "build_strip_interpolation",
    "generating_sequence",
    "field_from_csv",
]

MODES = ("limiting_c1", "strip_c2", "ystrip_c2")

# Grid nodes can land exactly on a jump radius/edge of a piecewise field.
# hypot() rounding then picks different branches on different radii, breaking
# the symmetry of the field on the grid; snapping within a few ulps of an
# edge makes the half-open branch choice consistent.
_EDGE_SNAP = 16 * np.finfo(float).eps


class ConductivityError(ValueError):
    """Raised when a field is invalid (non-positive or undefined) where sampled."""


@dataclass(frozen=True)
class ConductivityField:
    """Positive scalar field sigma(x, y) with a vectorized evaluator."""

    name: str
    kind: str  # analytic-closed-form | geometric-piecewise | strip-interpolated | sampled-grid
    evaluate: Callable[[np.ndarray, np.ndarray], np.ndarray]

    def __call__(self, x, y):
        return self.evaluate(np.asarray(x, dtype=float), np.asarray(y, dtype=float))


def _snap_to_edges(values, edges):
    v = np.asarray(values, dtype=float)
    for e in edges:
        v = np.where(np.abs(v - e) <= _EDGE_SNAP * max(1.0, abs(e)), e, v)
    return v


def builtin_case(name: str, alpha: float = 1.0):
    """Analytic conductivity together with a closed-form potential solving it.

    Returns
    -------
    (field, solution):
        ``field`` is the conductivity; ``solution(x, y)`` the exact potential
        whose boundary trace serves as Dirichlet data.

    The admissibility of ``alpha`` is checked where positivity can fail on
    the unit disk (polynomial, Lorentzian).  The sinusoidal field with large
    ``alpha`` grazes zero along a curve; it is accepted here and rejected at
    sampling time if a grid node lands on the zero set.
    """
    a = float(alpha)
    if name == "separable_lorentzian":
        field = ConductivityField(
            name, "analytic-closed-form",
            lambda x, y: 1.0 / ((x * x + 0.1) * (y * y + 0.1)))
        sol = lambda x, y: (x**3 + y**3) / 3.0 + 0.1 * (x + y)
    elif name == "exponential":
        field = ConductivityField(name, "analytic-closed-form",
                                  lambda x, y: np.exp(a * x * y))
        sol = lambda x, y: np.exp(-a * x * y)
    elif name == "polynomial":
        if abs(a) * np.sqrt(2.0) >= 10.0:
            raise ConductivityError(
                f"polynomial case with alpha={a} is non-positive on the unit disk")
        field = ConductivityField(name, "analytic-closed-form",
                                  lambda x, y: a * (x + y) + 10.0)
        sol = lambda x, y: np.log(a * (x + y) + 10.0)
    elif name == "lorentzian":
        if a <= 0:
            raise ConductivityError("lorentzian case requires alpha > 0")
        field = ConductivityField(name, "analytic-closed-form",
                                  lambda x, y: 1.0 / ((x + y) ** 2 + a))
        sol = lambda x, y: (x + y) ** 3 / 3.0 + a * (x + y)
    elif name == "sinusoidal":
        field = ConductivityField(name, "analytic-closed-form",
                                  lambda x, y: 1.0 + np.sin(a * x * y))
        sol = lambda x, y: 1.0 / (np.tan(a * x * y / 2.0) + 1.0)
    else:
        raise ValueError(f"unknown builtin case {name!r}")
    return field, sol


_CONCENTRIC_EDGES = (0.2, 0.4, 0.6, 0.8)
_CONCENTRIC_VALUES = (100.0, 30.0, 20.0, 15.0, 10.0)
SQUARE_HALF_SIDE = 0.325  # axis-aligned square of side 0.65 centered at origin


def _concentric(x, y):
    r = _snap_to_edges(np.hypot(x, y), _CONCENTRIC_EDGES)
    return np.select(
        [r < e for e in _CONCENTRIC_EDGES], _CONCENTRIC_VALUES[:-1],
        default=_CONCENTRIC_VALUES[-1])


def _offcenter_disk(x, y):
    return np.where((x - 0.6) ** 2 + y**2 <= 0.2, 100.0, 10.0)


def _square_inclusion(x, y):
    ax = _snap_to_edges(np.abs(x), (SQUARE_HALF_SIDE,))
    ay = _snap_to_edges(np.abs(y), (SQUARE_HALF_SIDE,))
    return np.where((ax <= SQUARE_HALF_SIDE) & (ay <= SQUARE_HALF_SIDE), 100.0, 10.0)


_GEOMETRIC = {
    "concentric_disks": _concentric,
    "offcenter_disk": _offcenter_disk,
    "square_inclusion": _square_inclusion,
    # the beaked variants reuse the same patterns on the beaked domain
    "beaked_concentric": _concentric,
    "beaked_square": _square_inclusion,
}


def geometric_case(name: str) -> ConductivityField:
    """Piecewise-constant conductivity from a geometric inclusion pattern."""
    if name not in _GEOMETRIC:
        raise ValueError(f"unknown geometric case {name!r}; expected one of {sorted(_GEOMETRIC)}")
    return ConductivityField(name, "geometric-piecewise", _GEOMETRIC[name])


def field_from_csv(path) -> ConductivityField:
    """Sampled-grid conductivity from a CSV of rows x, y, sigma.

    Scattered samples are interpolated linearly inside their convex hull and
    by nearest neighbour outside it.
    """
    from scipy.interpolate import LinearNDInterpolator, NearestNDInterpolator

    pts, vals = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            try:
                x, y, s = (float(v) for v in row[:3])
            except ValueError:
                continue  # header line
            pts.append((x, y))
            vals.append(s)
    pts = np.asarray(pts)
    vals = np.asarray(vals)
    if len(pts) < 3:
        raise ConductivityError("need at least 3 samples")
    if np.any(vals <= 0):
        raise ConductivityError("sampled conductivity must be positive")
    lin = LinearNDInterpolator(pts, vals)
    near = NearestNDInterpolator(pts, vals)

    def evaluate(x, y):
        out = lin(x, y)
        bad = ~np.isfinite(out)
        if np.any(bad):
            out = np.where(bad, near(x, y), out)
        return out

    return ConductivityField("sampled", "sampled-grid", evaluate)


@dataclass(frozen=True)
class StripInterpolation:
    """Piecewise separable approximation of sigma over y-parallel strips.

    Strip k covers x in [edges[k], edges[k+1]) and carries the branch
    ``(x + A[k]) / (chi[k] + A[k]) * f_k(y)`` where chi[k] is the strip
    midline and f_k interpolates J equidistant midline samples of sigma
    linearly in y (constant beyond the sampled range).
    """

    edges: np.ndarray       # (K+1,)
    chi: np.ndarray         # (K,)
    A: np.ndarray           # (K,)
    y_low: np.ndarray       # (K,) first midline sample ordinate
    y_step: np.ndarray      # (K,) midline sample spacing
    values: np.ndarray      # (K, J) sigma at the midline samples

    @property
    def K(self) -> int:
        return len(self.chi)

    @property
    def J(self) -> int:
        return self.values.shape[1]

    def strip_index(self, x):
        return np.clip(np.searchsorted(self.edges, x, side="right") - 1, 0, self.K - 1)

    def branch_ratio(self, x, k=None):
        x = np.asarray(x, dtype=float)
        if k is None:
            k = self.strip_index(x)
        return (x + self.A[k]) / (self.chi[k] + self.A[k])

    def f(self, k, y):
        """Midline interpolant of strip k at ordinates y, clamped at the ends."""
        t = (np.asarray(y, dtype=float) - self.y_low[k]) / self.y_step[k]
        t = np.clip(t, 0.0, self.J - 1.0)
        j0 = np.clip(t.astype(int), 0, self.J - 2)
        frac = t - j0
        return self.values[k, j0] * (1.0 - frac) + self.values[k, j0 + 1] * frac

    def evaluate(self, x, y):
        x = np.asarray(x, dtype=float)
        k = self.strip_index(x)
        return self.branch_ratio(x, k) * self.f(k, y)

    def __call__(self, x, y):
        return self.evaluate(x, y)


def _vertical_extent(domain: StarDomain, x: float) -> float:
    """Largest |y| with (x, y) inside the domain, by bisection from the top."""
    hi = float(np.max(domain.rho(np.linspace(-np.pi, np.pi, 721))))
    lo = 0.0
    if not bool(domain.contains(x, 0.0)):
        raise ConductivityError(f"midline x={x} lies outside the domain")
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if bool(domain.contains(x, mid)):
            lo = mid
        else:
            hi = mid
    return lo


def build_strip_interpolation(
    field: ConductivityField,
    domain: StarDomain,
    K: int,
    J: int,
    A=60.0,
) -> StripInterpolation:
    """Sample ``field`` into the piecewise separable strip form.

    Strips come from K+1 equidistant y-parallel lines spanning the domain's
    x-extent; each midline is sampled at J equidistant ordinates over its
    intersection with the domain.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if J < 2:
        raise ValueError("J must be >= 2")
    th = np.linspace(-np.pi, np.pi, 65537)
    xb = domain.rho(th) * np.cos(th)
    edges = np.linspace(float(xb.min()), float(xb.max()), K + 1)
    chi = 0.5 * (edges[:-1] + edges[1:])
    A = np.broadcast_to(np.asarray(A, dtype=float), (K,)).copy()
    if np.any(A <= 0):
        raise ValueError("offsets A must be positive")
    if np.any(edges[:-1][:, None] + A[:, None] <= 0) or np.any(edges[1:] + A <= 0):
        raise ValueError("x + A must stay positive on every strip")

    y_top = np.array([_vertical_extent(domain, c) for c in chi])
    y_low = -y_top
    y_step = 2.0 * y_top / (J - 1)
    ys = y_low[:, None] + y_step[:, None] * np.arange(J)
    vals = field.evaluate(np.broadcast_to(chi[:, None], (K, J)).copy(), ys)
    if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
        raise ConductivityError("sampled conductivity must be positive and finite on midlines")
    return StripInterpolation(edges=edges, chi=chi, A=A,
                              y_low=y_low, y_step=y_step, values=vals)


@dataclass(frozen=True)
class GeneratingSequence:
    """Pair values (F_m, G_m), m in {0, 1}, sampled on the radial grids.

    All pairs have the form (p, i/p) with p real positive, so the adjoint
    pairs are (-i*F_m, -i*G_m) and Im(conj(F_m)*G_m) = 1 exactly.
    With period c = 1 the two pairs coincide.
    """

    c: int
    mode: str
    F0: np.ndarray  # (Q, P+1) complex
    G0: np.ndarray
    F1: np.ndarray
    G1: np.ndarray
    grids: tuple[RadialGrid, ...]

    def pair(self, m: int):
        return (self.F0, self.G0) if m % 2 == 0 else (self.F1, self.G1)

    def adjoint(self, m: int):
        F, G = self.pair(m)
        return -1j * F, -1j * G

    def pair_products(self):
        """Im(conj(F_m) * G_m) for m = 0, 1; equals 1 at every sample."""
        return (np.imag(np.conj(self.F0) * self.G0),
                np.imag(np.conj(self.F1) * self.G1))


def _grid_arrays(grids: Sequence[RadialGrid]):
    z = np.vstack([g.z for g in grids])
    return z.real, z.imag


def generating_sequence(source, grids: Sequence[RadialGrid], mode: str) -> GeneratingSequence:
    """Sample a conductivity (or its strip form) into a generating sequence.

    Modes
    -----
    limiting_c1:
        F_0 = sqrt(sigma), G_0 = i/sqrt(sigma); the pair is its own
        successor (period 1).
    strip_c2:
        ``source`` must be a :class:`StripInterpolation`.  F_0 carries the
        separable branch sqrt(f_k(y) / branch_ratio), F_1 = sqrt(sigma_pw)
        (period 2).
    ystrip_c2:
        x-parallel strip limit: F_0 = sqrt(sigma), F_1 = 1/sqrt(sigma)
        (period 2).
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    grids = tuple(grids)
    x, y = _grid_arrays(grids)

    if mode == "strip_c2":
        if not isinstance(source, StripInterpolation):
            raise TypeError("strip_c2 requires a StripInterpolation source")
        k = source.strip_index(x)
        ratio = source.branch_ratio(x, k)
        f = source.f(k, y)
        sigma_pw = ratio * f
        _check_positive(sigma_pw, "sigma_pw")
        p0 = np.sqrt(f / ratio)
        p1 = np.sqrt(sigma_pw)
        return GeneratingSequence(c=2, mode=mode,
                                  F0=p0.astype(complex), G0=1j / p0,
                                  F1=p1.astype(complex), G1=1j / p1,
                                  grids=grids)

    sigma = source.evaluate(x, y) if isinstance(source, ConductivityField) else source(x, y)
    _check_positive(sigma, "sigma")
    p = np.sqrt(sigma)
    F0 = p.astype(complex)
    G0 = 1j / p
    if mode == "limiting_c1":
        return GeneratingSequence(c=1, mode=mode, F0=F0, G0=G0, F1=F0, G1=G0, grids=grids)
    # ystrip_c2
    return GeneratingSequence(c=2, mode=mode, F0=F0, G0=G0,
                              F1=(1.0 / p).astype(complex), G1=1j * p, grids=grids)


def _check_positive(values, label):
    if not np.all(np.isfinite(values)):
        raise ConductivityError(f"{label} is not finite at some grid samples")
    if np.any(values <= 0):
        bad = int(np.sum(values <= 0))
        raise ConductivityError(f"{label} is non-positive at {bad} grid samples")
