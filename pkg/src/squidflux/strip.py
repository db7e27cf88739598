"""Static current distribution over the cross-section of a superconducting strip.

The strip is a long bar of width W and thickness b carrying a total
current of 1 A along z.  Its cross-section is tiled with rectangular
patches, each treated as a straight filament of finite length.  Current
splits among the filaments so that every one sees the same voltage
drop:

    (L + diag(L_kin)) I = c * 1,        sum(I) = 1 A

L collects partial inductances of parallel filaments and L_kin is the
kinetic inductance of the supercurrent in each patch, mu0 * lam^2 *
length / area, from London's equation.  With the normal-fluid channel
switched off (the default, appropriate for millikelvin operation) the
system is real, frequency independent, and symmetric positive definite.
The solution shows the familiar edge peaking of thin-film strips with a
decay scale of lam^2 / b near the edges.

A finite filament length is used instead of a two-dimensional
per-unit-length formulation to avoid the logarithmic gauge ambiguity of
2-D inductances; the distribution is insensitive to the chosen length
because only inductance differences matter once the total current is
fixed.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .constants import MU0
from .errors import NumericsError, ValidationError

# geometric mean distance of a rectangle from itself, as a fraction of
# the half perimeter of the patch; standard value for near-square patches
SELF_GMD_FACTOR = 0.2235

DEFAULT_PATCH_CAP = 20_000


@dataclass(frozen=True)
class CrossSectionGrid:
    """Uniform tiling of the W x b cross-section into nx * ny patches."""

    W: float
    b: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.W <= 0 or self.b <= 0:
            raise ValidationError("cross-section dimensions must be positive")
        if self.nx < 2 or self.ny < 2 or self.nx % 2 or self.ny % 2:
            raise ValidationError("nx and ny must be even and at least 2")

    @property
    def dx(self) -> float:
        return self.W / self.nx

    @property
    def dy(self) -> float:
        return self.b / self.ny

    @property
    def patch_area(self) -> float:
        return self.dx * self.dy

    @property
    def n_patches(self) -> int:
        return self.nx * self.ny

    @property
    def x_centers(self) -> np.ndarray:
        """Patch center x coordinates, flattened x-major (shape nx*ny)."""
        cols = (np.arange(self.nx) + 0.5) * self.dx
        return np.repeat(cols, self.ny)

    @property
    def y_centers(self) -> np.ndarray:
        rows = (np.arange(self.ny) + 0.5) * self.dy
        return np.tile(rows, self.nx)

    @property
    def column_centers(self) -> np.ndarray:
        return (np.arange(self.nx) + 0.5) * self.dx


@dataclass(frozen=True)
class SolverParams:
    """Filament length and material parameters for the strip solve."""

    strip_length: float
    lam: float
    normal_conductivity: float = 0.0

    def __post_init__(self):
        if self.strip_length <= 0:
            raise ValidationError("strip_length must be positive")
        if self.lam <= 0:
            raise ValidationError("penetration depth must be positive")
        if self.normal_conductivity < 0:
            raise ValidationError("normal_conductivity must be >= 0")

    def validate_for(self, grid: CrossSectionGrid) -> None:
        if self.strip_length < 100 * max(grid.W, grid.b):
            raise ValidationError("strip_length must be at least 100 * max(W, b)")


@dataclass(frozen=True)
class CurrentDistribution:
    """Solved patch currents, normalized to 1 A total."""

    grid: CrossSectionGrid
    patch_currents: np.ndarray = field(repr=False)
    strip_length: float = 0.0
    lam: float = 0.0

    @property
    def total_current(self) -> float:
        return float(self.patch_currents.sum())

    def current_map(self) -> np.ndarray:
        """Patch currents as an (nx, ny) array."""
        return self.patch_currents.reshape(self.grid.nx, self.grid.ny)

    def density_map(self) -> np.ndarray:
        """Volume current density J (A/m^2) as an (nx, ny) array."""
        return self.current_map() / self.grid.patch_area

    def density_at(self, x: float, y: float) -> float:
        """J at a point inside the cross-section (A/m^2)."""
        g = self.grid
        if not (0 <= x <= g.W and 0 <= y <= g.b):
            raise ValidationError("point outside the cross-section")
        i = min(int(x / g.dx), g.nx - 1)
        j = min(int(y / g.dy), g.ny - 1)
        return float(self.current_map()[i, j] / g.patch_area)

    def dump_density_csv(self, path) -> None:
        g = self.grid
        dens = self.density_map()
        lines = ["x_m,y_m,J_A_per_m2"]
        for i in range(g.nx):
            for j in range(g.ny):
                x = (i + 0.5) * g.dx
                y = (j + 0.5) * g.dy
                lines.append(f"{x:.9e},{y:.9e},{dens[i, j]:.9e}")
        with open(path, "w") as handle:
            handle.write("\n".join(lines) + "\n")


def _even_ceil(value: float) -> int:
    n = int(math.ceil(value - 1e-9))
    n = max(n, 1)
    return n + (n % 2)


def _even_floor(value: float) -> int:
    n = int(value)
    return n - (n % 2)


def discretize_cross_section(
    W: float,
    b: float,
    target_patch: float,
    cap: int = DEFAULT_PATCH_CAP,
) -> CrossSectionGrid:
    """Uniform grid with dx, dy <= target_patch, subject to nx*ny <= cap.

    Counts are even so the symmetry axes fall on patch boundaries, and
    never below 2.  When the cap bites, both counts shrink by a common
    factor so the patch aspect ratio is preserved.
    """
    if W <= 0 or b <= 0 or target_patch <= 0:
        raise ValidationError("W, b and target_patch must be positive")
    if cap < 4:
        raise ValidationError("patch cap too small: nx and ny must each be >= 2")
    nx = max(2, _even_ceil(W / target_patch))
    ny = max(2, _even_ceil(b / target_patch))
    if nx * ny > cap:
        scale = math.sqrt(cap / (nx * ny))
        nx = max(2, _even_floor(nx * scale))
        ny = max(2, _even_floor(ny * scale))
        while nx * ny > cap:
            if nx >= ny and nx > 2:
                nx -= 2
            elif ny > 2:
                ny -= 2
            else:
                raise ValidationError("patch cap too small: nx and ny must each be >= 2")
    return CrossSectionGrid(W=W, b=b, nx=nx, ny=ny)


def filament_mutual_inductance(d: float | np.ndarray, length: float):
    """Mutual partial inductance of two parallel filaments (H).

    Equal length, aligned ends, center-to-center distance d.  For
    d << length this tends to (mu0 length / 2 pi)(ln(2 length / d) - 1).
    """
    r = np.asarray(d, dtype=float) / length
    value = MU0 * length / (2 * np.pi) * (np.arcsinh(1.0 / r) - np.sqrt(1.0 + r * r) + r)
    if np.ndim(d) == 0:
        return float(value)
    return value


def partial_inductance_matrix(grid: CrossSectionGrid, params: SolverParams) -> np.ndarray:
    """Symmetric matrix of partial inductances between all patches (H).

    Off-diagonal entries use the filament (center-to-center)
    approximation; the diagonal uses the self geometric-mean-distance
    0.2235 (dx + dy) in the same closed form.
    """
    params.validate_for(grid)
    xc = grid.x_centers
    yc = grid.y_centers
    d = np.hypot(xc[:, None] - xc[None, :], yc[:, None] - yc[None, :])
    off_diagonal = ~np.eye(grid.n_patches, dtype=bool)
    if np.any(d[off_diagonal] == 0.0):
        raise NumericsError("coincident patch centers")
    np.fill_diagonal(d, SELF_GMD_FACTOR * (grid.dx + grid.dy))
    return filament_mutual_inductance(d, params.strip_length)


def kinetic_diagonal(grid: CrossSectionGrid, params: SolverParams) -> np.ndarray:
    """Internal kinetic inductance of each patch: mu0 lam^2 length / area (H)."""
    value = MU0 * params.lam**2 * params.strip_length / grid.patch_area
    return np.full(grid.n_patches, value)


def solve_current_distribution(grid: CrossSectionGrid, params: SolverParams) -> CurrentDistribution:
    """Solve (L + diag(L_kin)) I = c * 1 and rescale to 1 A total."""
    system = partial_inductance_matrix(grid, params)
    system[np.diag_indices_from(system)] += kinetic_diagonal(grid, params)
    try:
        factor = scipy.linalg.cho_factor(system, overwrite_a=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise NumericsError("inductance system is not positive definite") from exc
    currents = scipy.linalg.cho_solve(factor, np.ones(grid.n_patches), check_finite=False)
    total = currents.sum()
    if total <= 0:
        raise NumericsError("solved currents do not carry positive total current")
    currents /= total
    return CurrentDistribution(
        grid=grid,
        patch_currents=currents,
        strip_length=params.strip_length,
        lam=params.lam,
    )


def surface_current_density(dist: CurrentDistribution) -> tuple[np.ndarray, np.ndarray]:
    """Sheet current K(x) = sum_y J(x, y) dy per column (A/m).

    Returns (column centers, K); the rectangle rule over the columns
    recovers the total current exactly.
    """
    grid = dist.grid
    K = dist.current_map().sum(axis=1) / grid.dx
    return grid.column_centers, K
