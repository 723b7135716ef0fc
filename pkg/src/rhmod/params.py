"""Problem parameters and side tags.

The scalar problem depends on the space/time parameters (x, t), the phase
strength mu multiplying the initial phase, and the surface genus (0 or 2 for
the sech/tanh data; the core accepts any even genus).  Boundary values on the
real axis are two-sided, so real evaluation points must carry an explicit
side tag.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class Side(enum.Enum):
    """Half-plane tag for evaluations of the scattering function family."""

    UPPER = "upper"
    LOWER = "lower"
    REAL_ABOVE = "real-axis-from-above"
    REAL_BELOW = "real-axis-from-below"


@dataclass(frozen=True)
class Tolerances:
    quad_tol: float = 1e-10        # absolute tolerance per contour integral
    tol_k: float = 1e-10           # max |K(alpha_j)| at convergence
    realness_tol: float = 1e-8     # allowed imaginary residue on W, Omega
    degeneracy_floor: float = 1e-8 # Newton denominator floor (relative)
    max_newton_iter: int = 50
    max_halvings: int = 10


@dataclass(frozen=True)
class ProblemParams:
    """Parameters (x, t, mu, genus) plus numerical tolerances.

    genus is the surface genus (0 or 2 in the NLS regime); the number of
    jump-constant pairs is genus // 2.
    """

    x: float
    t: float
    mu: float
    genus: int = 0
    tols: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.t < 0:
            raise ValueError(f"t must be nonnegative, got {self.t}")
        if self.genus < 0 or self.genus % 2 != 0:
            raise ValueError(f"genus must be a nonnegative even integer, got {self.genus}")

    @property
    def n_pairs(self) -> int:
        """Number of (W_j, Omega_j) pairs beyond the normalized W_0 = 0."""
        return self.genus // 2

    @property
    def z0(self) -> float:
        """The z*ln z singular point mu/2 pinned on the contour."""
        return 0.5 * self.mu

    def with_mu(self, mu: float) -> "ProblemParams":
        return ProblemParams(self.x, self.t, mu, self.genus, self.tols)

    def with_xt(self, x: float, t: float) -> "ProblemParams":
        return ProblemParams(x, t, self.mu, self.genus, self.tols)
