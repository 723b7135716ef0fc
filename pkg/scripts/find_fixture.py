#!/usr/bin/env python3
"""Locate and vet the post-break genus-2 fixture used by the test suite.

Strategy: continue the known genus-2 solution at (x=1, t=0.45, mu=2) in t up
to the requested fixture time, then march mu across [1, 3] with warm-started
Newton re-solves, watching the band width |alpha_2 - alpha_4| and the
evolution denominators.  Prints frozen-fixture candidates on success.

Run from the repository root:  python scripts/find_fixture.py [t_fix]
"""

import sys
import time

import numpy as np

sys.path.insert(0, "src")

from rhmod.geometry import BranchpointSet
from rhmod.params import ProblemParams
from rhmod.modulation import newton_solve
from rhmod.errors import RhmodError

X_FIX = 1.0
# genus-2 solution at (x=1, t=0.45, mu=2), found by nucleation from the
# genus-0 sign-condition failure
ALPHAS_T045_MU2 = np.array([1.00575043 + 0.12004264j,
                            -1.03000741 + 0.58123695j,
                            -0.74590969 + 0.81568703j])


def march(uppers, make_params, values, label):
    cur = BranchpointSet(tuple(uppers))
    out = {}
    for v in values:
        p = make_params(v)
        try:
            rep = newton_solve(cur, p, tol_K=1e-11, quad_tol=1e-11)
        except (RhmodError, ValueError) as err:
            print(f"  {label}={v:.3f}: STOP ({type(err).__name__}: "
                  f"{str(err)[:70]})")
            return out, False
        cur = rep.alphas
        a = cur.as_array()
        band = abs(a[1] - a[2])
        print(f"  {label}={v:+.3f}: a0={a[0]:.5f} a2={a[1]:.5f} a4={a[2]:.5f} "
              f"band={band:.3f} res={rep.max_residual:.0e} it={rep.iterations}")
        out[round(float(v), 6)] = a.copy()
    return out, True


def main():
    t_fix = float(sys.argv[1]) if len(sys.argv) > 1 else 0.8
    t0 = time.time()
    print(f"== marching t: 0.45 -> {t_fix} at mu=2, x={X_FIX}")
    t_vals = np.round(np.arange(0.45, t_fix + 1e-9, 0.05), 6)
    path_t, ok = march(ALPHAS_T045_MU2,
                       lambda t: ProblemParams(x=X_FIX, t=float(t), mu=2.0, genus=2),
                       t_vals, "t")
    if not ok:
        print("t-march failed")
        return 1
    at_tfix = path_t[round(float(t_vals[-1]), 6)]

    print(f"== marching mu down: 2.0 -> 1.0 at t={t_fix}")
    mu_dn = np.round(np.arange(1.95, 0.999, -0.05), 6)
    down, ok_dn = march(at_tfix,
                        lambda m: ProblemParams(x=X_FIX, t=t_fix, mu=float(m), genus=2),
                        mu_dn, "mu")

    print(f"== marching mu up: 2.0 -> 3.0 at t={t_fix}")
    mu_up = np.round(np.arange(2.05, 3.001, 0.05), 6)
    up, ok_up = march(at_tfix,
                      lambda m: ProblemParams(x=X_FIX, t=t_fix, mu=float(m), genus=2),
                      mu_up, "mu")

    print(f"elapsed {time.time() - t0:.1f}s  down_ok={ok_dn} up_ok={ok_up}")
    if ok_dn and ok_up:
        a1 = down[1.0]
        a2 = path_t[round(float(t_vals[-1]), 6)]
        print("\nFROZEN FIXTURE CANDIDATE")
        print(f"X_FIX = {X_FIX}")
        print(f"T_FIX = {t_fix}")
        print("ALPHAS at mu=1.0:", [repr(v) for v in a1])
        print("ALPHAS at mu=2.0:", [repr(v) for v in a2])
        print("ALPHAS at mu=3.0:", [repr(v) for v in up[3.0]])
        return 0
    return 1


if __name__ == "__main__":
    raise SystemExit(main())
