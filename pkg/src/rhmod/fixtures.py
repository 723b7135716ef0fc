"""Reference configurations used by the test suite, demos, and docs.

The parameter pair (x, t) = (1.0, 0.8) lies past the first break of the
sech/tanh data for every mu in [1, 3]; it was located by scripts/
find_fixture.py (genus-0 continuation in t until the sign conditions fail
near t ~ 0.3 at mu = 2, nucleation of the two extra branchpoints at the
failure spot, then a Newton march across the mu range).  The branchpoint
values below are converged to |K| < 1e-11 and serve as Newton seeds; the
genus-0 fixture at t = 0.1 is comfortably pre-break.
"""

import numpy as np

from .geometry import BranchpointSet
from .params import ProblemParams

X_FIX = 1.0
T_PRE_BREAK = 0.1
T_POST_BREAK = 0.8

# genus-2 branchpoints (alpha_0, alpha_2, alpha_4) at x=1, t=0.8, in contour
# order: alpha_0 continues the central arc, the complementary arc joins it to
# alpha_2 (the upper band end), and the tail leaves alpha_4 toward -mu/2
GENUS2_ALPHAS = {
    1.0: (0.5203550591315595 + 0.12684725648808867j,
          -0.2574446533140541 + 0.7515936625432766j,
          -0.5802627439592092 + 0.36151070119935313j),
    2.0: (1.0007734251445057 + 0.027200031404527404j,
          -0.3350497272794314 + 0.6526915934375991j,
          -1.015168344178319 + 0.13886334515994828j),
    3.0: (1.5000264820532314 + 0.005674433387975555j,
          -0.3636029136248127 + 0.5259606174074845j,
          -1.5010403991064267 + 0.037235450222750405j),
}


def genus0_seed(x: float, mu: float) -> complex:
    """The exact t = 0 branchpoint, a good Newton seed for small t."""
    return 0.5 * mu * np.tanh(x) + 1j / np.cosh(x)


def pre_break_params(mu: float = 2.0) -> ProblemParams:
    return ProblemParams(x=X_FIX, t=T_PRE_BREAK, mu=mu, genus=0)


def post_break_params(mu: float = 2.0) -> ProblemParams:
    return ProblemParams(x=X_FIX, t=T_POST_BREAK, mu=mu, genus=2)


def genus2_seed(mu: float = 2.0) -> BranchpointSet:
    key = min(GENUS2_ALPHAS, key=lambda k: abs(k - mu))
    return BranchpointSet(GENUS2_ALPHAS[key])
