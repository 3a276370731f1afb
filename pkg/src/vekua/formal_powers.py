"""Bers integral recursion for formal powers along radial grids.

The antiderivative of an integrand W with respect to a generating pair
(F, G) of the form (p, i/p) is

    V(z) = F(z) * Re I[G* W] + G(z) * Re I[F* W],      F* = -iF, G* = -iG,

with I the cumulative path integral from the center.  Formal powers follow
the recursion Z^(n) = n * antiderivative(Z^(n-1) of the predecessor pair),
seeded at degree 0 by the pair combination whose value at the center equals
the coefficient a.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .conductivity import GeneratingSequence
from .geometry import RadialGrid

__all__ = [
    "QuadratureConfig",
    "FormalPowerTable",
    "fg_antiderivative",
    "build_formal_powers",
    "vekua_residual",
    "stencil_from_callable",
    "stencil_from_table",
    "asymptotics_check",
    "dump_table_csv",
]

_RULES = ("trapezoid", "corrected")


@dataclass(frozen=True)
class QuadratureConfig:
    """Path-quadrature settings for the Bers integrals.

    ``delta`` rescales every antiderivative; the analytically forced value is
    1 (the sigma=1 power oracle Z^(1) = z pins it), and it is exposed only as
    an experimentation knob.  ``rule`` selects the cumulative trapezoid
    ("trapezoid", second order) or its endpoint-corrected variant
    ("corrected", higher order on smooth integrands).
    """

    delta: float = 1.0
    rule: str = "trapezoid"

    def __post_init__(self):
        if self.rule not in _RULES:
            raise ValueError(f"unknown rule {self.rule!r}; expected one of {_RULES}")


def _cumulative_trapezoid(values, dz):
    panels = 0.5 * (values[..., :-1] + values[..., 1:]) * dz
    out = np.zeros(values.shape, dtype=complex)
    np.cumsum(panels, axis=-1, out=out[..., 1:])
    return out


def _cumulative_corrected(values, z, dz):
    # Euler-Maclaurin endpoint correction per panel; derivative along the
    # path by second-order differences.
    base = _cumulative_trapezoid(values, dz)
    deriv = np.gradient(values, axis=-1) / np.gradient(z, axis=-1)
    corr = (dz**2 / 12.0) * (deriv[..., 1:] - deriv[..., :-1])
    out = np.zeros(values.shape, dtype=complex)
    np.cumsum(corr, axis=-1, out=out[..., 1:])
    return base - out


def _antiderivative_batch(F, G, W, z, dz, config: QuadratureConfig):
    Fs = -1j * F
    Gs = -1j * G
    if config.rule == "corrected":
        i1 = _cumulative_corrected(Gs * W, z, dz)
        i2 = _cumulative_corrected(Fs * W, z, dz)
    else:
        i1 = _cumulative_trapezoid(Gs * W, dz)
        i2 = _cumulative_trapezoid(Fs * W, dz)
    return config.delta * (F * i1.real + G * i2.real)


def fg_antiderivative(grid: RadialGrid, pair, integrand,
                      config: QuadratureConfig | None = None):
    """(F, G)-antiderivative of ``integrand`` along one radial path.

    Parameters
    ----------
    grid:
        Radial path; the integral starts at the center, so the result is 0 at
        the first sample.
    pair:
        (F, G) values on the path, of the form (p, i/p).
    integrand:
        Complex values W on the path.

    Returns complex values V with V[0] = 0.
    """
    config = config or QuadratureConfig()
    F, G = (np.asarray(p, dtype=complex) for p in pair)
    W = np.asarray(integrand, dtype=complex)
    if W.shape[-1] < 2:
        raise ValueError("path must hold at least 2 points")
    z = grid.z[None, :]
    return _antiderivative_batch(F[None, :], G[None, :], W[None, :],
                                 z, np.diff(z, axis=-1), config)[0]


@dataclass(frozen=True)
class FormalPowerTable:
    """Formal powers Z^(n)(a, 0; z) per coefficient a and degree n = 0..N.

    ``boundary`` holds the outermost sample of the m = 0 chain per family and
    degree, shape (families, N+1, Q); ``interior`` (present when requested)
    the full radial profiles, shape (families, N+1, Q, P+1).  Degree-0 seeds
    take the value a at the center; ``seed_scale`` records the raw center
    pair values F_m(0).
    """

    N: int
    c: int
    config: QuadratureConfig
    grids: tuple[RadialGrid, ...]
    coefficients: tuple[complex, ...]
    boundary: np.ndarray
    seed_scale: tuple[float, float]
    interior: np.ndarray | None = None

    @property
    def Q(self) -> int:
        return len(self.grids)

    @property
    def trace_count(self) -> int:
        return 2 * self.N + 1

    @property
    def angles(self) -> np.ndarray:
        return np.array([g.theta for g in self.grids])

    def _family(self, coefficient) -> int:
        for i, a in enumerate(self.coefficients):
            if a == coefficient:
                return i
        raise KeyError(f"no family with coefficient {coefficient!r}")

    def boundary_values(self, coefficient, n: int) -> np.ndarray:
        return self.boundary[self._family(coefficient), n]

    def interior_values(self, coefficient, n: int) -> np.ndarray:
        if self.interior is None:
            raise ValueError("table was built without keep_interior=True")
        return self.interior[self._family(coefficient), n]


def build_formal_powers(
    sequence: GeneratingSequence,
    N: int,
    config: QuadratureConfig | None = None,
    keep_interior: bool = False,
    coefficients: Sequence[complex] = (1, 1j),
) -> FormalPowerTable:
    """Run the degree recursion for each coefficient family on all radii.

    With period c = 2 the recursion alternates the two pairs of the sequence;
    with c = 1 a single chain serves each family.  Construction is
    independent per radius (vectorized over the radius axis).
    """
    if N < 0:
        raise ValueError("N must be >= 0")
    config = config or QuadratureConfig()
    coefficients = tuple(complex(a) for a in coefficients)
    grids = sequence.grids
    z = np.vstack([g.z for g in grids])
    dz = np.diff(z, axis=-1)
    Q, nP = z.shape

    scale = (float(sequence.F0[0, 0].real), float(sequence.F1[0, 0].real))
    n_chains = 1 if sequence.c == 1 else 2
    # Seed lambda*F + mu*G with real lambda, mu and value a at the center;
    # for (p, i/p) pairs that means lambda = Re(a)/p(0), mu = Im(a)*p(0).
    chains = {}
    for m in range(n_chains):
        F, G = sequence.pair(m)
        for fam, a in enumerate(coefficients):
            chains[(m, fam)] = (a.real / scale[m]) * F + (a.imag * scale[m]) * G

    n_fam = len(coefficients)
    boundary = np.empty((n_fam, N + 1, Q), dtype=complex)
    interior = np.empty((n_fam, N + 1, Q, nP), dtype=complex) if keep_interior else None
    for fam in range(n_fam):
        boundary[fam, 0] = chains[(0, fam)][:, -1]
        if keep_interior:
            interior[fam, 0] = chains[(0, fam)]

    for n in range(1, N + 1):
        if sequence.c == 1:
            F, G = sequence.pair(0)
            chains = {(0, fam): n * _antiderivative_batch(F, G, chains[(0, fam)], z, dz, config)
                      for fam in range(n_fam)}
        else:
            new = {}
            for m in (0, 1):
                F, G = sequence.pair(m)
                for fam in range(n_fam):
                    new[(m, fam)] = n * _antiderivative_batch(
                        F, G, chains[(1 - m, fam)], z, dz, config)
            chains = new
        for fam in range(n_fam):
            boundary[fam, n] = chains[(0, fam)][:, -1]
            if keep_interior:
                interior[fam, n] = chains[(0, fam)]

    return FormalPowerTable(N=N, c=sequence.c, config=config, grids=grids,
                            coefficients=coefficients, boundary=boundary,
                            seed_scale=scale, interior=interior)


def vekua_residual(w_stencil, p_stencil, h: float) -> float:
    """|d_zbar W - (d_zbar p / p) conj(W)| by central differences.

    Stencil order: center, +x, -x, +y, -y.  The operators carry no 1/2
    factor: d_zbar = d_x + i d_y.
    """
    w = np.asarray(w_stencil, dtype=complex)
    p = np.asarray(p_stencil, dtype=complex)
    if w.shape != (5,) or p.shape != (5,):
        raise ValueError("stencils must hold 5 values: center, +x, -x, +y, -y")

    def dzbar(v):
        return (v[1] - v[2]) / (2 * h) + 1j * (v[3] - v[4]) / (2 * h)

    return float(np.abs(dzbar(w) - (dzbar(p) / p[0]) * np.conj(w[0])))


def stencil_from_callable(func, x0: float, y0: float, h: float):
    """5-point stencil of a callable f(x, y) around (x0, y0)."""
    pts = [(x0, y0), (x0 + h, y0), (x0 - h, y0), (x0, y0 + h), (x0, y0 - h)]
    return np.array([func(x, y) for x, y in pts], dtype=complex)


def stencil_from_table(table: FormalPowerTable, coefficient, n: int,
                       x0: float, y0: float, h: float):
    """5-point stencil of a stored power, bilinear in (angle, radius).

    Fails if any stencil point leaves the covered radii; callers must keep
    the stencil at interior points away from conductivity jumps.
    """
    values = table.interior_values(coefficient, n)
    angles = table.angles
    Q = len(angles)
    step = 2 * np.pi / Q

    def sample(x, y):
        th = np.mod(np.arctan2(y, x), 2 * np.pi)
        r = np.hypot(x, y)
        q0 = (int(np.searchsorted(angles, th, side="right")) - 1) % Q
        q1 = (q0 + 1) % Q
        gap = float(np.mod(angles[q1] - angles[q0], 2 * np.pi)) or step
        t = float(np.mod(th - angles[q0], 2 * np.pi)) / gap
        vals = []
        for q in (q0, q1):
            rgrid = table.grids[q].r
            if r > rgrid[-1] + 1e-12:
                raise ValueError(f"stencil point ({x}, {y}) outside stored radius")
            vals.append(np.interp(r, rgrid, values[q].real)
                        + 1j * np.interp(r, rgrid, values[q].imag))
        return (1 - t) * vals[0] + t * vals[1]

    pts = [(x0, y0), (x0 + h, y0), (x0 - h, y0), (x0, y0 + h), (x0, y0 - h)]
    return np.array([sample(x, y) for x, y in pts], dtype=complex)


def asymptotics_check(table: FormalPowerTable, n: int, coefficient,
                      radius_index: int = 0, r_max: float | None = None):
    """Ratio Z^(n)(a, 0; z)/(a z^n) along one radius, excluding the center.

    The ratio tends to 1 as r -> 0 (the powers inherit the local behaviour
    of a z^n at the center).
    """
    if n < 1:
        raise ValueError("asymptotics need n >= 1")
    grid = table.grids[radius_index]
    values = table.interior_values(coefficient, n)[radius_index]
    r = grid.r[1:]
    ratio = values[1:] / (complex(coefficient) * grid.z[1:] ** n)
    if r_max is not None:
        keep = r <= r_max
        r, ratio = r[keep], ratio[keep]
    return r, ratio


def dump_table_csv(table: FormalPowerTable, path) -> None:
    """Debug dump: columns q, m, a, n, p, Re Z, Im Z (m = 0 chain)."""
    labels = {1 + 0j: "1", 1j: "i"}
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["q", "m", "a", "n", "p", "re_z", "im_z"])
        for fam, a in enumerate(table.coefficients):
            label = labels.get(a, str(a))
            for n in range(table.N + 1):
                if table.interior is not None:
                    block = table.interior[fam, n]
                    for q in range(table.Q):
                        for p, v in enumerate(block[q]):
                            writer.writerow([q, 0, label, n, p, repr(v.real), repr(v.imag)])
                else:
                    for q, v in enumerate(table.boundary[fam, n]):
                        writer.writerow([q, 0, label, n, len(table.grids[q].r) - 1,
                                         repr(v.real), repr(v.imag)])
