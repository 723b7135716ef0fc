"""Damped Newton solution of the branchpoint system K(alpha_j) = 0.

Only the upper-half-plane representatives are unknowns; the conjugate
equations hold by Schwarz symmetry.  The Jacobian of the system is diagonal
at solutions, with

    dK(alpha_j)/dalpha_j = D/(2 pi i) oint f'/((zeta - alpha_j) R) dzeta,

so the update is one complex division per point.  Steps that leave the upper
half-plane, break the contour threading, or increase the residual are halved.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import ConvergenceError, NearBreakError, RhmodError
from .geometry import BranchpointSet, Radical, build_contour
from .params import ProblemParams
from .rhp_core import (MomentCache, determinant_D, eval_K, newton_denominator)


@dataclass
class SolveReport:
    alphas: BranchpointSet
    residuals: np.ndarray          # |K(alpha_j)| per upper j
    jacobian_diag: np.ndarray      # dK(alpha_j)/dalpha_j
    iterations: int
    converged: bool

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals)) if len(self.residuals) else 0.0


def _assemble(uppers: np.ndarray, p: ProblemParams, quad_tol: float,
              with_jacobian: bool = True):
    bps = BranchpointSet(tuple(uppers))
    cs = build_contour(bps, p.mu)
    rad = Radical(bps, p.z0)
    cache = MomentCache(cs, rad, p, tol=quad_tol)
    D = determinant_D(cache)
    Ks = np.array([eval_K(cache, a) for a in uppers])
    dens = None
    if with_jacobian:
        dens = np.array([newton_denominator(cache, a, D=D) for a in uppers])
    return cache, D, Ks, dens


def _residual_only(uppers: np.ndarray, p: ProblemParams, quad_tol: float) -> float:
    _, _, Ks, _ = _assemble(uppers, p, quad_tol, with_jacobian=False)
    return float(np.max(np.abs(Ks)))


def newton_solve(guess: BranchpointSet, p: ProblemParams,
                 tol_K: Optional[float] = None,
                 quad_tol: Optional[float] = None,
                 max_iter: Optional[int] = None) -> SolveReport:
    """Solve K(alpha_j, alphas, mu) = 0 by damped diagonal Newton.

    Contours are rebuilt each iterate.  A Jacobian entry below the degeneracy
    floor raises NearBreakError (the configuration is near a breaking curve);
    exhausting the iteration budget raises ConvergenceError.
    """
    tols = p.tols
    tol_K = tols.tol_k if tol_K is None else tol_K
    quad_tol = tols.quad_tol if quad_tol is None else quad_tol
    max_iter = tols.max_newton_iter if max_iter is None else max_iter
    uppers = guess.as_array()
    scale = max(np.max(np.abs(uppers)), 1.0)

    res_hist = []
    for it in range(max_iter):
        cache, D, Ks, dens = _assemble(uppers, p, quad_tol)
        res = float(np.max(np.abs(Ks)))
        res_hist.append(res)
        if res < tol_K:
            return SolveReport(BranchpointSet(tuple(uppers)),
                               np.abs(Ks), dens, it, True)
        floor = tols.degeneracy_floor * max(abs(D), 1e-30) * scale
        small = np.abs(dens) < floor
        if np.any(small):
            raise NearBreakError(
                f"Jacobian diagonal {np.abs(dens)[small].min():.2e} below the "
                f"degeneracy floor {floor:.2e}: near a breaking curve")
        step = -Ks / dens
        lam = 1.0
        accepted = False
        for _ in range(tols.max_halvings):
            trial = uppers + lam * step
            if not np.any(trial.imag <= 1e-3 * scale):
                try:
                    if _residual_only(trial, p, quad_tol) < res:
                        accepted = True
                        break
                except (RhmodError, ValueError):
                    pass
            lam *= 0.5
        if not accepted:
            raise ConvergenceError(
                f"Newton stalled at residual {res:.2e} after {it} iterations")
        uppers = uppers + lam * step
    raise ConvergenceError(
        f"Newton did not reach tol {tol_K:.1e} in {max_iter} iterations "
        f"(residual history {['%.1e' % r for r in res_hist[-5:]]})")


def seed_from_config(genus: int, seeds: Sequence[complex]) -> BranchpointSet:
    """Validate raw seed values for the requested genus."""
    need = genus + 1
    seeds = tuple(complex(s) for s in seeds)
    if len(seeds) != need:
        raise ValueError(f"genus {genus} requires exactly {need} upper seeds, "
                         f"got {len(seeds)}")
    for s in seeds:
        if not s.imag > 0:
            raise ValueError(f"seed {s} must have positive imaginary part")
    return BranchpointSet(seeds)


def grid_refine_seed(p: ProblemParams, box: Tuple[complex, complex],
                     n: int, quad_tol: float = 1e-8) -> BranchpointSet:
    """Coarse |K| minimization on an n x n grid (genus 0 only).

    The box is (lower-left, upper-right) in the upper half-plane; the best
    grid point is returned as a Newton seed.
    """
    if p.genus != 0:
        raise ValueError("grid seeding is implemented for genus 0 only")
    lo, hi = complex(box[0]), complex(box[1])
    if not (hi.real > lo.real and hi.imag > lo.imag):
        raise ValueError("degenerate search box")
    if not lo.imag > 0:
        raise ValueError("search box must lie in the upper half-plane")
    if n < 1:
        raise ValueError("grid size must be positive")
    if n == 1:
        return BranchpointSet((0.5 * (lo + hi),))
    xs = np.linspace(lo.real, hi.real, n)
    ys = np.linspace(lo.imag, hi.imag, n)
    best = None
    for y in ys:
        for x in xs:
            a = complex(x, y)
            try:
                _, _, Ks, _ = _assemble(np.array([a]), p, quad_tol,
                                        with_jacobian=False)
                val = abs(Ks[0])
            except (RhmodError, ValueError):
                continue
            if best is None or val < best[0]:
                best = (val, a)
    if best is None:
        raise ConvergenceError("no finite |K| point in the search box")
    return BranchpointSet((best[1],))
