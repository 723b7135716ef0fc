"""Assembly of h(z), K(z), K'(z), dK/dmu, D, and the jump constants.

Orientation folding
-------------------
The quadrature engine integrates counterclockwise (so that e.g.
oint dz/R = -2 pi i on a loop around all branch points).  The loop-integral
representation of h and the determinant formulas hold with the opposite
orientation: realized here by folding every cached loop integral with
ORIENT = -1.  With folded entries the formulas below are verbatim:

    h(z) = R(z)/(2 pi i) [ oint f/((zeta-z)R)
                           + sum_j W_j oint_{m_j} 1/((zeta-z)R)
                           + sum_j Omega_j oint_{c_j} 1/((zeta-z)R) ]
    h(z) = R(z) K(z) / D,

and continuation of h outside the admissible region (inside gamma_hat,
outside the small loops) picks up piecewise-constant offsets:

    outside gamma_hat:      h = H - f
    inside m_hat_j:         h = H + W_j
    inside c_hat_j:         h = H + side * Omega_j   (side=+1 west of the arc)

which reproduce the jump relations h+ + h- = 2 W_j on main arcs,
h+ - h- = 2 Omega_j on complementary arcs (+ = left of the orientation) and
the cancellation of the f-jump across the real axis off gamma.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import scattering
from .errors import NearBreakError, PlacementError, RealnessError
from .geometry import (BranchpointSet, ContourSystem, Loop, Radical,
                       build_contour)
from .params import ProblemParams, Side
from .quadrature import integrate_family, integrate_cauchy_batch

log = logging.getLogger("rhmod")

ORIENT = -1.0
TWO_PI_I = 2j * math.pi


class MomentCache:
    """Folded loop integrals for one (branchpoints, mu) configuration.

    Values are cached per (loop, weight, kernel); families are batched per
    loop so that R and the scattering weights are sampled once per panel.
    """

    def __init__(self, cs: ContourSystem, rad: Radical, p: ProblemParams,
                 tol: float = 1e-11,
                 weights: Optional[Dict[str, Union[str, Callable]]] = None):
        self.cs = cs
        self.rad = rad
        self.p = p
        self.tol = tol
        # test seam: remap the standard weights to synthetic ones
        self.weights = {"one": "one", "f": "f", "f_prime": "f_prime",
                        "f_mu": "f_mu", "neg_zeta": "neg_zeta",
                        "neg_2zeta_sq": "neg_2zeta_sq"}
        if weights:
            self.weights.update(weights)
        self._vals: Dict = {}
        self._evaluators: Dict = {}

    def _loop(self, loop_sel) -> Loop:
        return self.cs.loop(*loop_sel)

    def get_many(self, reqs: Sequence[Tuple]) -> np.ndarray:
        """reqs: list of (loop_sel, weight_name, kernel); returns folded values."""
        missing: Dict = {}
        for sel, wname, kern in reqs:
            key = (sel, wname, kern)
            if key not in self._vals:
                missing.setdefault(sel, []).append((wname, kern))
        for sel, items in missing.items():
            uniq = list(dict.fromkeys(items))
            fam = [(self.weights[w], k) for w, k in uniq]
            vals = integrate_family(self._loop(sel), self.rad, self.p, fam,
                                    tol=self.tol)
            for (wname, kern), v in zip(uniq, vals):
                self._vals[(sel, wname, kern)] = ORIENT * complex(v)
        return np.array([self._vals[(sel, w, k)] for sel, w, k in reqs],
                        dtype=complex)

    def get(self, loop_sel, weight, kernel) -> complex:
        return complex(self.get_many([(loop_sel, weight, kernel)])[0])

    def _evaluator(self, loop_sel):
        if loop_sel not in self._evaluators:
            from .quadrature import LoopEvaluator
            pilot = [(self.weights["one"], ("pow", 0)),
                     (self.weights["f"], ("pow", 0))] if loop_sel == ("hat", 0) \
                else [(self.weights["one"], ("pow", 0))]
            for a in self.cs.bps.upper:
                w = self.weights["f"] if loop_sel == ("hat", 0) else self.weights["one"]
                pilot.append((w, ("cauchy", complex(a))))
            self._evaluators[loop_sel] = LoopEvaluator(
                self._loop(loop_sel), self.rad, self.p, pilot,
                tol=max(self.tol, 1e-11))
        return self._evaluators[loop_sel]

    def cauchy_batch(self, loop_sel, weight, zs, squared=False,
                     tol=None) -> np.ndarray:
        """Folded Cauchy-kernel batch on shared panels (adaptive fallback)."""
        tol = self.tol if tol is None else tol
        zs = np.atleast_1d(np.asarray(zs, dtype=complex))
        kind = "cauchy2" if squared else "cauchy"
        items = [(self.weights[weight], (kind, complex(z))) for z in zs]
        return ORIENT * self._evaluator(loop_sel).eval_batch(items, tol=tol)


# ---------------------------------------------------------------------------
# moment matrix, constants, determinant
# ---------------------------------------------------------------------------

def _small_selectors(N: int) -> List[Tuple[str, int]]:
    return [("m", j) for j in range(1, N + 1)] + [("c", j) for j in range(1, N + 1)]


def moment_matrix(cache: MomentCache) -> np.ndarray:
    """A[row, n] = oint_row zeta^n / R over m_1..m_N, c_1..c_N; n = 0..2N-1."""
    N = cache.cs.n_pairs
    sels = _small_selectors(N)
    reqs = [(sel, "one", ("pow", n)) for sel in sels for n in range(2 * N)]
    vals = cache.get_many(reqs).reshape(len(sels), 2 * N)
    return vals


def f_moments(cache: MomentCache, weight: str = "f", nmax: Optional[int] = None) -> np.ndarray:
    N = cache.cs.n_pairs
    n_count = 2 * N if nmax is None else nmax
    reqs = [(("hat", 0), weight, ("pow", n)) for n in range(n_count)]
    return cache.get_many(reqs)


def determinant_D(cache: MomentCache) -> complex:
    N = cache.cs.n_pairs
    if N == 0:
        return 1.0 + 0j
    return complex(np.linalg.det(moment_matrix(cache)))


def solve_constants(cache: MomentCache, weight: str = "f",
                    realness_tol: float = 1e-8,
                    enforce_real: bool = True) -> Tuple[np.ndarray, np.ndarray]:
    """Solve the moment system for (W_1..W_N, Omega_1..Omega_N).

    The system is sum_n-rows: F_n + sum Omega_j C_jn + sum W_j M_jn = 0 for
    n = 0..2N-1.  The constants are real; imaginary residue below
    realness_tol is truncated (and logged), above it raises RealnessError.
    """
    N = cache.cs.n_pairs
    if N == 0:
        return np.zeros(0), np.zeros(0)
    A = moment_matrix(cache)          # rows m..c, cols n
    F = f_moments(cache, weight)
    M = A.T                           # system matrix: rows n, cols (W.., Omega..)
    try:
        u = np.linalg.solve(M, -F)
    except np.linalg.LinAlgError as err:
        raise NearBreakError(f"singular moment system: {err}") from err
    im = float(np.max(np.abs(u.imag))) if len(u) else 0.0
    if enforce_real and im > realness_tol * max(1.0, float(np.max(np.abs(u)))):
        raise RealnessError(f"jump constants carry imaginary residue {im:.2e}")
    if im > 0:
        log.debug("truncating imaginary residue %.2e on jump constants", im)
    W = u[:N].real.copy()
    Om = u[N:].real.copy()
    return W, Om


# ---------------------------------------------------------------------------
# K and friends
# ---------------------------------------------------------------------------

def _k_determinant(cache: MomentCache, last_col: np.ndarray,
                   f_row_weight: str) -> complex:
    """Determinant with moment rows, an arbitrary last column, and an f-row."""
    N = cache.cs.n_pairs
    if N == 0:
        return complex(last_col[-1]) / TWO_PI_I
    A = moment_matrix(cache)
    F = f_moments(cache, f_row_weight)
    M = np.zeros((2 * N + 1, 2 * N + 1), dtype=complex)
    M[:2 * N, :2 * N] = A
    M[2 * N, :2 * N] = F
    M[:, 2 * N] = last_col
    return complex(np.linalg.det(M)) / TWO_PI_I


def _cauchy_column(cache: MomentCache, z: complex, f_row_weight: str,
                   squared: bool = False) -> np.ndarray:
    N = cache.cs.n_pairs
    kern = ("cauchy2", z) if squared else ("cauchy", z)
    reqs = [(sel, "one", kern) for sel in _small_selectors(N)]
    reqs.append((("hat", 0), f_row_weight, kern))
    return cache.get_many(reqs)


def eval_K(cache: MomentCache, z: complex, f_row_weight: str = "f") -> complex:
    """K(z): determinant form; genus 0 degenerates to the single integral."""
    col = _cauchy_column(cache, complex(z), f_row_weight)
    return _k_determinant(cache, col, f_row_weight)


def eval_K_prime(cache: MomentCache, z: complex, f_row_weight: str = "f") -> complex:
    """K'(z): the Cauchy column replaced by its (zeta-z)^-2 counterpart."""
    col = _cauchy_column(cache, complex(z), f_row_weight, squared=True)
    return _k_determinant(cache, col, f_row_weight)


def eval_dK_dmu(cache: MomentCache, z: complex) -> complex:
    """dK/dmu at fixed branchpoints: the f-row replaced by the f_mu-row."""
    col = _cauchy_column(cache, complex(z), "f_mu")
    return _k_determinant(cache, col, "f_mu")


def solve_constants_mu(cache: MomentCache,
                       realness_tol: float = 1e-8) -> Tuple[np.ndarray, np.ndarray]:
    """(dW_j/dmu, dOmega_j/dmu): same moment matrix, -f_mu moments on the right."""
    N = cache.cs.n_pairs
    if N == 0:
        return np.zeros(0), np.zeros(0)
    A = moment_matrix(cache)
    Fmu = f_moments(cache, "f_mu")
    try:
        u = np.linalg.solve(A.T, -Fmu)
    except np.linalg.LinAlgError as err:
        raise NearBreakError(f"singular moment system: {err}") from err
    im = float(np.max(np.abs(u.imag)))
    if im > realness_tol * max(1.0, float(np.max(np.abs(u)))):
        raise RealnessError(f"d(W,Omega)/dmu carry imaginary residue {im:.2e}")
    return u[:N].real.copy(), u[N:].real.copy()


def newton_denominator(cache: MomentCache, alpha_j: complex,
                       D: Optional[complex] = None) -> complex:
    """dK(alpha_j)/dalpha_j = D/(2 pi i) oint f'/((zeta-alpha_j) R) dzeta."""
    if D is None:
        D = determinant_D(cache)
    J = cache.get(("hat", 0), "f_prime", ("cauchy", complex(alpha_j)))
    return D * J / TWO_PI_I


# ---------------------------------------------------------------------------
# the solution object and h evaluation
# ---------------------------------------------------------------------------

@dataclass
class RhpSolution:
    """Solved scalar problem at one (x, t, mu): constants plus evaluators."""

    bps: BranchpointSet
    params: ProblemParams
    cs: ContourSystem
    rad: Radical
    cache: MomentCache
    W: np.ndarray
    Omega: np.ndarray
    D: complex

    @property
    def W_full(self) -> np.ndarray:
        """(W_0, W_1, ..., W_N) with the normalization W_0 = 0."""
        return np.concatenate([[0.0], self.W])

    def h(self, z, tag: Optional[Side] = None) -> complex:
        return complex(eval_h(self, np.asarray([z], dtype=complex), tag)[0])

    def K(self, z) -> complex:
        return eval_K(self.cache, z)


def solve_rhp(bps: BranchpointSet, p: ProblemParams,
              cs: Optional[ContourSystem] = None,
              rad: Optional[Radical] = None,
              tol: Optional[float] = None,
              weights: Optional[Dict] = None) -> RhpSolution:
    """Build contours, solve the jump constants, return the evaluator."""
    if cs is None:
        cs = build_contour(bps, p.mu)
    if rad is None:
        rad = Radical(bps, p.z0)
    cache = MomentCache(cs, rad, p, tol=tol if tol is not None else p.tols.quad_tol,
                        weights=weights)
    W, Om = solve_constants(cache, realness_tol=p.tols.realness_tol)
    D = determinant_D(cache)
    return RhpSolution(bps, p, cs, rad, cache, W, Om, D)


def _f_on(z: np.ndarray, p: ProblemParams, tag: Optional[Side],
          weight_fn: Optional[Callable] = None) -> np.ndarray:
    if weight_fn is not None:
        return weight_fn(z, p)
    out = np.empty(z.shape, dtype=complex)
    real = z.imag == 0.0
    if np.any(~real):
        out[~real] = scattering.f_values(z[~real], p)
    if np.any(real):
        if tag is None:
            raise PlacementError("h continuation at real z requires a side tag")
        side_conj = tag in (Side.LOWER, Side.REAL_BELOW)
        zr = np.conj(z[real]) if side_conj else z[real]
        vals = scattering.f_values(zr, p)
        out[real] = np.conj(vals) if side_conj else vals
    return out


def eval_h(sol: RhpSolution, zs, tag: Optional[Side] = None,
           f_weight: str = "f", tol: Optional[float] = None) -> np.ndarray:
    """h(z) anywhere off the arcs and loop paths (vectorized).

    Inside gamma_hat and outside the small loops this is the plain loop
    formula; elsewhere the winding-number offsets described in the module
    docstring continue it analytically.
    """
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    cache, cs = sol.cache, sol.cs
    N = cs.n_pairs
    bracket = cache.cauchy_batch(("hat", 0), f_weight, zs, tol=tol)
    for j in range(1, N + 1):
        Wj, Oj = sol.W[j - 1], sol.Omega[j - 1]
        if Wj != 0.0:
            bracket = bracket + Wj * cache.cauchy_batch(("m", j), "one", zs, tol=tol)
        if Oj != 0.0:
            bracket = bracket + Oj * cache.cauchy_batch(("c", j), "one", zs, tol=tol)
    H = sol.rad(zs) * bracket / TWO_PI_I
    return H + _h_offsets(sol, zs, tag, f_weight)


def _h_offsets(sol: RhpSolution, zs: np.ndarray, tag: Optional[Side],
               f_weight: str = "f") -> np.ndarray:
    cs, p = sol.cs, sol.params
    out = np.zeros(zs.shape, dtype=complex)
    wind_hat = np.array([cs.gamma_hat.winding(z) for z in zs])
    outside = wind_hat == 0
    if np.any(outside):
        resolved = sol.cache.weights[f_weight]
        if resolved == "f":
            out[outside] -= _f_on(zs[outside], p, tag)
        else:
            from .quadrature import _weight_fn
            out[outside] -= _weight_fn(resolved)(zs[outside], p)
    for j in range(1, cs.n_pairs + 1):
        wm = np.array([cs.m_loops[j - 1].winding(z) for z in zs])
        out += wm * sol.W[j - 1]
        wc = np.array([cs.c_loops[j - 1].winding(z) for z in zs])
        if np.any(wc != 0):
            out += wc * _comp_side(cs, j, zs) * sol.Omega[j - 1]
    return out


def _comp_side(cs: ContourSystem, j: int, zs: np.ndarray) -> np.ndarray:
    """+1 on the left (west) of the oriented complementary arc, -1 right.

    Polyline arcs classify against their nearest sub-segment; points below
    the axis use the conjugate component.
    """
    from .geometry import seg_point_distance
    fam = cs.comp_arcs[j - 1]
    out = np.empty(zs.shape)
    for i, z in enumerate(zs):
        segs = fam.upper if z.imag >= 0 else fam.lower
        seg = min(segs, key=lambda s: seg_point_distance(s, z))
        t = seg.b - seg.a
        w = z - seg.a
        out[i] = 1.0 if (t.real * w.imag - t.imag * w.real) > 0 else -1.0
    return out


def eval_h_prime(sol: RhpSolution, zs, tag: Optional[Side] = None,
                 tol: Optional[float] = None) -> np.ndarray:
    """h'(z), analytic formula: R'/R * (h - offsets) + R * bracket' / 2 pi i."""
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    cache, cs = sol.cache, sol.cs
    bracket = cache.cauchy_batch(("hat", 0), "f", zs, tol=tol)
    bracket2 = cache.cauchy_batch(("hat", 0), "f", zs, squared=True, tol=tol)
    for j in range(1, cs.n_pairs + 1):
        Wj, Oj = sol.W[j - 1], sol.Omega[j - 1]
        if Wj != 0.0:
            bracket = bracket + Wj * cache.cauchy_batch(("m", j), "one", zs, tol=tol)
            bracket2 = bracket2 + Wj * cache.cauchy_batch(("m", j), "one", zs, squared=True, tol=tol)
        if Oj != 0.0:
            bracket = bracket + Oj * cache.cauchy_batch(("c", j), "one", zs, tol=tol)
            bracket2 = bracket2 + Oj * cache.cauchy_batch(("c", j), "one", zs, squared=True, tol=tol)
    R = sol.rad(zs)
    Hp = (R * sol.rad.dlog(zs) * bracket + R * bracket2) / TWO_PI_I
    wind_hat = np.array([cs.gamma_hat.winding(z) for z in zs])
    outside = wind_hat == 0
    if np.any(outside):
        zo = zs[outside]
        fp = np.empty(zo.shape, dtype=complex)
        real = zo.imag == 0.0
        if np.any(~real):
            fp[~real] = scattering.f_prime_values(zo[~real], sol.params)
        if np.any(real):
            if tag is None:
                raise PlacementError("h' at real z requires a side tag")
            side_conj = tag in (Side.LOWER, Side.REAL_BELOW)
            zr = np.conj(zo[real]) if side_conj else zo[real]
            v = scattering.f_prime_values(zr, sol.params)
            fp[real] = np.conj(v) if side_conj else v
        Hp[outside] -= fp
    return Hp


def eval_h_and_hprime(sol: RhpSolution, zs, tag: Optional[Side] = None,
                      tol: Optional[float] = None
                      ) -> Tuple[np.ndarray, np.ndarray]:
    """(h, h') in one pass; shares the winding classification."""
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    cache, cs = sol.cache, sol.cs
    bracket = cache.cauchy_batch(("hat", 0), "f", zs, tol=tol)
    bracket2 = cache.cauchy_batch(("hat", 0), "f", zs, squared=True, tol=tol)
    for j in range(1, cs.n_pairs + 1):
        Wj, Oj = sol.W[j - 1], sol.Omega[j - 1]
        if Wj != 0.0:
            bracket = bracket + Wj * cache.cauchy_batch(("m", j), "one", zs, tol=tol)
            bracket2 = bracket2 + Wj * cache.cauchy_batch(("m", j), "one", zs,
                                                          squared=True, tol=tol)
        if Oj != 0.0:
            bracket = bracket + Oj * cache.cauchy_batch(("c", j), "one", zs, tol=tol)
            bracket2 = bracket2 + Oj * cache.cauchy_batch(("c", j), "one", zs,
                                                          squared=True, tol=tol)
    R = sol.rad(zs)
    H = R * bracket / TWO_PI_I
    Hp = (R * sol.rad.dlog(zs) * bracket + R * bracket2) / TWO_PI_I
    offs = _h_offsets(sol, zs, tag)
    H = H + offs
    wind_hat = np.array([cs.gamma_hat.winding(z) for z in zs])
    outside = wind_hat == 0
    if np.any(outside):
        zo = zs[outside]
        fp = np.empty(zo.shape, dtype=complex)
        real = zo.imag == 0.0
        if np.any(~real):
            fp[~real] = scattering.f_prime_values(zo[~real], sol.params)
        if np.any(real):
            if tag is None:
                raise PlacementError("h' at real z requires a side tag")
            side_conj = tag in (Side.LOWER, Side.REAL_BELOW)
            zr = np.conj(zo[real]) if side_conj else zo[real]
            v = scattering.f_prime_values(zr, sol.params)
            fp[real] = np.conj(v) if side_conj else v
        Hp[outside] -= fp
    return H, Hp


def eval_dh_dmu(sol: RhpSolution, zs) -> np.ndarray:
    """dh/dmu at frozen branchpoints, z inside gamma_hat."""
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    for z in zs:
        if sol.cs.gamma_hat.winding(z) != 1:
            raise PlacementError(f"dh/dmu requires z inside gamma_hat, got {z}")
    bracket = sol.cache.cauchy_batch(("hat", 0), "f_mu", zs)
    return sol.rad(zs) * bracket / TWO_PI_I
