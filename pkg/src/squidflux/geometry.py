"""Rectangular SQUID loop geometry and effective-width bookkeeping.

Loop dimensions X and Y are measured along the inner edge of the loop, W
is the nominal wire width and b the film thickness.  The center-line
perimeter is P = 2X + 2Y + 4W.  Shadow evaporation widens the two
vertical arms by ``shadow_offset`` (350 nm by default); the horizontal
arms keep the nominal width.
"""

from dataclasses import dataclass, replace

from .errors import ValidationError


@dataclass(frozen=True)
class SquidGeometry:
    """Loop geometry in SI units (meters)."""

    X: float
    Y: float
    W: float
    b: float
    lam: float
    shadow_offset: float = 350e-9

    def __post_init__(self):
        for name in ("X", "Y", "W", "b", "lam"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"geometry field {name} must be > 0")
        if self.shadow_offset < 0:
            raise ValidationError("shadow_offset must be >= 0")
        if not self.W > 2 * self.lam**2 / self.b:
            raise ValidationError(
                "W must exceed 2*lam^2/b so the edge parameter lam^2/(b*W) stays below 1/2"
            )
        if self.X < self.W or self.Y < self.W:
            raise ValidationError("X and Y must be at least W")

    @property
    def edge_parameter(self) -> float:
        """Dimensionless lam^2 / (b W) for the nominal width."""
        return self.lam**2 / (self.b * self.W)

    def with_width(self, W: float) -> "SquidGeometry":
        return replace(self, W=W)


@dataclass(frozen=True)
class ArmSegment:
    """One arm of the loop: center-line length (with corner share) and width."""

    length: float
    width: float

    def __post_init__(self):
        if self.length <= 0 or self.width <= 0:
            raise ValidationError("arm segment length and width must be > 0")


def perimeter(g: SquidGeometry) -> float:
    """Center-line perimeter 2X + 2Y + 4W in meters."""
    return 2 * g.X + 2 * g.Y + 4 * g.W


def arm_segments(g: SquidGeometry) -> list[ArmSegment]:
    """Split the loop into two horizontal and two vertical arms.

    The 4W of corner length is shared equally, so every arm picks up one
    extra W of center-line length.  Vertical arms carry the widened
    width W + shadow_offset; segment lengths always sum to perimeter(g).
    """
    horizontal = ArmSegment(length=g.X + g.W, width=g.W)
    vertical = ArmSegment(length=g.Y + g.W, width=g.W + g.shadow_offset)
    return [horizontal, horizontal, vertical, vertical]


def mean_width(g: SquidGeometry) -> float:
    """Length-weighted average arm width."""
    segs = arm_segments(g)
    total = sum(s.length for s in segs)
    return sum(s.length * s.width for s in segs) / total
