"""Magnetic field of the solved strip current on the surrounding interfaces.

Every patch of the cross-section carries its solved current along z.
The in-plane field (Bx, By) at an evaluation point is accumulated with
the field of a finite, centered line current per patch.  Within three
patch diagonals of a point, a patch is split 2x2 and re-accumulated so
the near field does not see the patch as a point source.

Interfaces are sampled a small standoff away from the material surface:
just outside a volume current the field is finite, but sampling exactly
on patch boundaries is numerically noisy.  The standoff (1 nm default)
is far below every modeled length scale.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import MU0
from .errors import ValidationError
from .strip import CurrentDistribution

INTERFACE_KINDS = (
    "top",
    "bottom",
    "side_left",
    "side_right",
    "substrate_left",
    "substrate_right",
)

SUBSTRATE_KINDS = ("substrate_left", "substrate_right")

NEAR_FIELD_DIAGONALS = 3.0
_POINT_CHUNK = 512


@dataclass(frozen=True)
class InterfaceSpec:
    """Where and how densely to sample |B|/I around the strip."""

    kind: str
    resolution: int
    standoff: float = 1e-9
    extent: float | None = None       # lateral reach, substrate kinds only
    stagger: float = 0.5              # fractional offset of samples inside each cell

    def __post_init__(self):
        if self.kind not in INTERFACE_KINDS:
            raise ValidationError(f"unknown interface kind {self.kind!r}")
        if self.standoff <= 0:
            raise ValidationError("standoff must be > 0")
        if self.resolution < 16:
            raise ValidationError("resolution must be at least 16")
        if self.kind in SUBSTRATE_KINDS and (self.extent is None or self.extent <= 0):
            raise ValidationError("substrate interfaces need a positive extent")
        if not 0.0 < self.stagger < 1.0:
            raise ValidationError("stagger must lie strictly between 0 and 1")


@dataclass(frozen=True)
class FieldProfile:
    """|B(x)|/I sampled along one interface."""

    spec: InterfaceSpec
    coordinates: np.ndarray = field(repr=False)
    field_over_current: np.ndarray = field(repr=False)
    reference_current: float = 1.0

    def __post_init__(self):
        if np.any(~np.isfinite(self.field_over_current)) or np.any(self.field_over_current < 0):
            raise ValidationError("field profile values must be finite and >= 0")


def _line_field(dx, dy, currents, half_length):
    """Bx, By of centered finite line currents at in-plane offsets (dx, dy)."""
    rho2 = dx * dx + dy * dy
    g = MU0 * currents * half_length / (2 * np.pi * rho2 * np.sqrt(rho2 + half_length**2))
    return -g * dy, g * dx


def biot_savart_at_points(dist: CurrentDistribution, points) -> np.ndarray:
    """In-plane field vectors (Bx, By) in tesla at the given (x, y) points.

    Points must lie strictly outside every patch.  Far from a patch the
    patch acts as a single line current at its center; inside
    NEAR_FIELD_DIAGONALS patch diagonals it is refined into 2x2
    quarter-patches carrying a quarter of the current each.
    """
    grid = dist.grid
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValidationError("points must have shape (n, 2)")
    xc = grid.x_centers
    yc = grid.y_centers
    currents = dist.patch_currents
    half_length = dist.strip_length / 2
    diag = np.hypot(grid.dx, grid.dy)
    near_radius = NEAR_FIELD_DIAGONALS * diag
    sub_dx = np.array([-0.25, -0.25, 0.25, 0.25]) * grid.dx
    sub_dy = np.array([-0.25, 0.25, -0.25, 0.25]) * grid.dy

    out = np.empty_like(pts)
    for start in range(0, pts.shape[0], _POINT_CHUNK):
        block = pts[start : start + _POINT_CHUNK]
        dx = block[:, 0:1] - xc[None, :]
        dy = block[:, 1:2] - yc[None, :]
        inside = (np.abs(dx) <= grid.dx / 2) & (np.abs(dy) <= grid.dy / 2)
        if np.any(inside):
            raise ValidationError("evaluation point inside a patch volume")
        bx, by = _line_field(dx, dy, currents[None, :], half_length)

        near_p, near_k = np.nonzero(dx * dx + dy * dy < near_radius**2)
        if near_p.size:
            ndx = dx[near_p, near_k]
            ndy = dy[near_p, near_k]
            base_x, base_y = _line_field(ndx, ndy, currents[near_k], half_length)
            fine_x = np.zeros_like(base_x)
            fine_y = np.zeros_like(base_y)
            for ox, oy in zip(sub_dx, sub_dy):
                fx, fy = _line_field(ndx - ox, ndy - oy, currents[near_k] / 4, half_length)
                fine_x += fx
                fine_y += fy
            np.add.at(bx, (near_p, near_k), fine_x - base_x)
            np.add.at(by, (near_p, near_k), fine_y - base_y)

        out[start : start + _POINT_CHUNK, 0] = bx.sum(axis=1)
        out[start : start + _POINT_CHUNK, 1] = by.sum(axis=1)
    return out


def _staggered(a: float, b: float, n: int, fraction: float) -> np.ndarray:
    step = (b - a) / n
    return a + (np.arange(n) + fraction) * step


def _staggered_log(inner: float, outer: float, n: int, fraction: float) -> np.ndarray:
    """Geometrically spaced distances from the wire edge, staggered in log space.

    The substrate-field integrand peaks at the wire edge and falls off
    with a power law, so log spacing keeps both the peak and the tail
    resolved at any lateral extent.
    """
    ratio = math.log(outer / inner) / n
    return inner * np.exp((np.arange(n) + fraction) * ratio)


def interface_points(spec: InterfaceSpec, W: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """(arc coordinates, xy points) for one interface of a W x b strip."""
    s = spec.standoff
    n = spec.resolution
    if spec.kind == "top":
        x = _staggered(0.0, W, n, spec.stagger)
        return x, np.column_stack([x, np.full(n, b + s)])
    if spec.kind == "bottom":
        x = _staggered(0.0, W, n, spec.stagger)
        return x, np.column_stack([x, np.full(n, -s)])
    if spec.kind == "side_left":
        y = _staggered(0.0, b, n, spec.stagger)
        return y, np.column_stack([np.full(n, -s), y])
    if spec.kind == "side_right":
        y = _staggered(0.0, b, n, spec.stagger)
        return y, np.column_stack([np.full(n, W + s), y])
    if spec.kind == "substrate_left":
        x = -_staggered_log(s, spec.extent, n, spec.stagger)[::-1]
        return x, np.column_stack([x, np.full(n, -s)])
    # substrate_right
    x = W + _staggered_log(s, spec.extent, n, spec.stagger)
    return x, np.column_stack([x, np.full(n, -s)])


def interface_profiles(dist: CurrentDistribution, specs) -> list[FieldProfile]:
    """Sample |B|/I on each requested interface of the solved strip."""
    grid = dist.grid
    profiles = []
    for spec in specs:
        coords, pts = interface_points(spec, grid.W, grid.b)
        B = biot_savart_at_points(dist, pts)
        magnitude = np.hypot(B[:, 0], B[:, 1]) / dist.total_current
        profiles.append(
            FieldProfile(
                spec=spec,
                coordinates=coords,
                field_over_current=magnitude,
                reference_current=dist.total_current,
            )
        )
    return profiles


def dump_profiles_csv(profiles, path) -> None:
    lines = ["interface,coord_m,B_over_I_T_per_A"]
    for profile in profiles:
        for c, v in zip(profile.coordinates, profile.field_over_current):
            lines.append(f"{profile.spec.kind},{c:.9e},{v:.9e}")
    with open(path, "w") as handle:
        handle.write("\n".join(lines) + "\n")
