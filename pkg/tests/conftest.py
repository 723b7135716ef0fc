import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from rhmod import fixtures
from rhmod.geometry import BranchpointSet, Radical, build_contour
from rhmod.modulation import newton_solve
from rhmod.params import ProblemParams
from rhmod.rhp_core import MomentCache, solve_rhp


@pytest.fixture(scope="session")
def g0_pre():
    """Solved genus-0 pre-break configuration (x=1, t=0.1, mu=2)."""
    p = fixtures.pre_break_params()
    rep = newton_solve(BranchpointSet((fixtures.genus0_seed(1.0, 2.0),)), p,
                       tol_K=1e-11, quad_tol=1e-12)
    sol = solve_rhp(rep.alphas, p, tol=1e-12)
    return rep, sol


@pytest.fixture(scope="session")
def g2_post():
    """Solved genus-2 post-break configuration (x=1, t=0.8, mu=2)."""
    p = fixtures.post_break_params()
    rep = newton_solve(fixtures.genus2_seed(2.0), p, tol_K=1e-11,
                       quad_tol=1e-12)
    sol = solve_rhp(rep.alphas, p, tol=1e-12)
    return rep, sol


def admissible_points(sol, n=6):
    """Points inside gamma_hat and outside all small loops, by construction:
    small offsets from the complementary-arc midpoints and near the central
    arc."""
    out = []
    cs = sol.cs
    cands = []
    for fam in (*cs.comp_arcs, *cs.main_arcs):
        for seg in fam.upper:
            mid = complex(seg.at(0.5))
            t = complex(seg.deriv(0.5))
            nhat = 1j * t / abs(t)
            dd = 0.5 * (cs.d_small + cs.d_hat)
            cands.extend([mid + dd * nhat, mid - dd * nhat,
                          np.conj(mid + dd * nhat)])
    for z in cands:
        try:
            ok = (cs.gamma_hat.winding(z) == 1
                  and all(L.winding(z) == 0
                          for L in (*cs.m_loops, *cs.c_loops)))
        except Exception:
            ok = False
        if ok:
            out.append(complex(z))
        if len(out) >= n:
            break
    return out
