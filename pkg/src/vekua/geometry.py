"""Star-shaped solution domains, radial integration grids, and boundary angle sets.

Domains are star-shaped about the origin and described by a polar boundary
radius rho(theta).  Radial grids hold the sample points along one radius on
which the formal powers are integrated; angle sets hold the directions of the
radii and, separately, the collocation directions of the boundary fit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

TWO_PI = 2.0 * np.pi

# Beak cap: the unit circle truncated by two line segments
#   y = -BEAK_SLOPE*x + BEAK_INTERCEPT   (upper)
#   y = +BEAK_SLOPE*x - BEAK_INTERCEPT   (lower)
# meeting at (BEAK_INTERCEPT/BEAK_SLOPE, 0) ~ (1.5, 0) and joining the circle
# at angles +-pi/10.
BEAK_HALF_ANGLE = np.pi / 10
BEAK_SLOPE = 0.5629
BEAK_INTERCEPT = 0.8443


def wrap_angle(theta):
    """Wrap angles into [-pi, pi)."""
    return np.mod(np.asarray(theta, dtype=float) + np.pi, TWO_PI) - np.pi


def _circular_distance(a, b):
    return np.abs(wrap_angle(np.asarray(a) - np.asarray(b)))


@dataclass(frozen=True)
class StarDomain:
    """Domain star-shaped about the origin with polar boundary radius ``rho``.

    Parameters
    ----------
    name:
        Identifier used in reports and CLI configs.
    rho:
        Vectorized map from angle (any real; 2*pi-periodic) to boundary
        radius > 0.
    corner_angles:
        Angles in [-pi, pi) where the boundary tangent is discontinuous while
        rho itself is continuous.
    """

    name: str
    rho: Callable[[np.ndarray], np.ndarray]
    corner_angles: tuple[float, ...] = ()

    def boundary_xy(self, theta):
        th = np.asarray(theta, dtype=float)
        r = self.rho(th)
        return r * np.cos(th), r * np.sin(th)

    def contains(self, x, y, tol: float = 1e-12):
        r = np.hypot(x, y)
        return r <= self.rho(np.arctan2(y, x)) + tol


def unit_disk() -> StarDomain:
    """Unit disk: rho(theta) = 1, smooth boundary."""

    def rho(theta):
        return np.ones_like(np.asarray(theta, dtype=float))

    return StarDomain(name="unit_disk", rho=rho)


def beaked_domain() -> StarDomain:
    """Unit circle capped by two line segments meeting at (1.5, 0).

    The boundary coincides with the unit circle for |theta| >= pi/10 and with
    the segments for |theta| < pi/10.  rho is continuous at +-pi/10 (to the
    four digits of the slope/intercept constants); the tangent jumps at
    -pi/10, 0, and pi/10.
    """

    def rho(theta):
        t = np.abs(wrap_angle(theta))
        # Points of y = -BEAK_SLOPE*x + BEAK_INTERCEPT satisfy
        # r*(sin t + BEAK_SLOPE*cos t) = BEAK_INTERCEPT; mirror-symmetric in t.
        seg = BEAK_INTERCEPT / (np.sin(t) + BEAK_SLOPE * np.cos(t))
        return np.where(t < BEAK_HALF_ANGLE, seg, 1.0)

    return StarDomain(
        name="beaked",
        rho=rho,
        corner_angles=(-BEAK_HALF_ANGLE, 0.0, BEAK_HALF_ANGLE),
    )


def star_domain_from_json(path) -> StarDomain:
    """Load a custom star domain from a JSON table of (theta, rho) knots.

    The file holds ``{"name": ..., "knots": [[theta, rho], ...],
    "corner_angles": [...]}``; rho is interpolated linearly and periodically
    between knots.
    """
    with open(path) as fh:
        data = json.load(fh)
    knots = np.asarray(data["knots"], dtype=float)
    if knots.ndim != 2 or knots.shape[1] != 2 or knots.shape[0] < 3:
        raise ValueError("knots must be an (n>=3, 2) table of (theta, rho)")
    th = wrap_angle(knots[:, 0])
    order = np.argsort(th)
    th, rv = th[order], knots[order, 1]
    if np.any(rv <= 0):
        raise ValueError("knot radii must be positive")
    # periodic extension for interpolation over the wrap point
    th_ext = np.concatenate([th, [th[0] + TWO_PI]])
    rv_ext = np.concatenate([rv, [rv[0]]])

    def rho(theta):
        t = np.mod(np.asarray(theta, dtype=float) - th[0], TWO_PI) + th[0]
        return np.interp(t, th_ext, rv_ext)

    corners = tuple(float(c) for c in data.get("corner_angles", ()))
    return StarDomain(name=data.get("name", "custom"), rho=rho, corner_angles=corners)


DOMAINS = {"unit_disk": unit_disk, "beaked": beaked_domain}


def make_domain(name: str) -> StarDomain:
    """Domain by registry name, or from a JSON knot table when given a path."""
    if name in DOMAINS:
        return DOMAINS[name]()
    if str(name).endswith(".json"):
        return star_domain_from_json(name)
    raise ValueError(
        f"unknown domain {name!r}; expected one of {sorted(DOMAINS)} or a .json knot table")


@dataclass(frozen=True)
class RadialGrid:
    """Sample points along one radius of a star domain.

    ``r`` holds P+1 radii with r[0] = 0 and r[P] on the boundary; ``z`` the
    complex coordinates r[p]*(cos theta + i sin theta).
    """

    theta: float
    r: np.ndarray
    z: np.ndarray

    @property
    def P(self) -> int:
        return len(self.r) - 1

    @property
    def boundary_radius(self) -> float:
        return float(self.r[-1])


def build_radial_grid(
    domain: StarDomain,
    theta: float,
    P: int,
    pinned_radii: Sequence[float] = (),
) -> RadialGrid:
    """Equidistant radial grid with optional samples pinned at exact radii.

    Each pinned radius replaces the nearest interior sample, so the point
    count stays P+1 and the grid stays strictly increasing.  Pins are used to
    place samples exactly on conductivity jumps (e.g. inclusion corners).
    """
    if P < 2:
        raise ValueError("P must be >= 2")
    rho = float(domain.rho(theta))
    r = rho * np.arange(P + 1) / P
    taken: dict[int, float] = {}
    for pin in pinned_radii:
        pin = float(pin)
        if not 0.0 < pin < rho:
            raise ValueError(f"pinned radius {pin} outside (0, {rho})")
        idx = int(np.clip(round(pin / (rho / P)), 1, P - 1))
        if idx in taken and taken[idx] != pin:
            raise ValueError(f"pinned radii collide at sample {idx}")
        taken[idx] = pin
        r[idx] = pin
    if np.any(np.diff(r) <= 0):
        raise ValueError("pinned radii break monotonicity of the grid")
    x = r * np.cos(theta)
    y = r * np.sin(theta)
    return RadialGrid(theta=float(theta), r=r, z=x + 1j * y)


@dataclass(frozen=True)
class AngleSet:
    """Sorted angles in [0, 2*pi), uniform except for pinned replacements."""

    angles: np.ndarray
    pinned: tuple[float, ...] = ()

    @property
    def Q(self) -> int:
        return len(self.angles)


def build_angle_set(Q: int, pinned: Sequence[float] = ()) -> AngleSet:
    """Uniform angles q*2*pi/Q with nearest-angle replacement by pins.

    Pinning keeps the count at Q while forcing exact angles (domain corners,
    inclusion diagonals).  Pins closer than half a step to each other are
    rejected, as are pins that would land on the same uniform sample.
    """
    if Q < 3:
        raise ValueError("Q must be >= 3")
    angles = TWO_PI * np.arange(Q) / Q
    pins = [float(np.mod(p, TWO_PI)) for p in pinned]
    step = TWO_PI / Q
    for i in range(len(pins)):
        for j in range(i + 1, len(pins)):
            if _circular_distance(pins[i], pins[j]) < 0.5 * step:
                raise ValueError(
                    f"pinned angles {pins[i]} and {pins[j]} closer than half a step"
                )
    taken: dict[int, float] = {}
    for p in pins:
        idx = int(np.argmin(_circular_distance(p, angles)))
        if idx in taken:
            raise ValueError(f"pinned angles collide at sample {idx}")
        taken[idx] = p
    out = angles.copy()
    for idx, p in taken.items():
        out[idx] = p
    out = np.sort(out)
    if np.any(np.diff(out) <= 0):
        raise ValueError("pinned angles break strict ordering")
    return AngleSet(angles=out, pinned=tuple(pins))


def arc_length_weights(domain: StarDomain, angles) -> np.ndarray:
    """Trapezoidal arc-length weights on the closed boundary polyline.

    Each weight is half the sum of the two chords adjacent to a boundary
    point; the weights sum to the perimeter of the inscribed polygon.
    """
    th = np.asarray(getattr(angles, "angles", angles), dtype=float)
    x, y = domain.boundary_xy(th)
    b = x + 1j * y
    chords = np.abs(np.roll(b, -1) - b)
    return 0.5 * (chords + np.roll(chords, 1))
