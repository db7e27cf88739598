"""Physical constants (SI units)."""

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicalConstants:
    """Fixed CODATA values used throughout the package."""

    mu0: float = 4e-7 * math.pi        # magnetic constant, H/m
    muB: float = 9.2740e-24            # Bohr magneton, J/T
    Phi0: float = 2.067834e-15         # flux quantum h/2e, Wb


CONSTANTS = PhysicalConstants()

MU0 = CONSTANTS.mu0
MU_B = CONSTANTS.muB
PHI0 = CONSTANTS.Phi0
