"""Sign conditions on the extended contour and genus detection.

The validity conditions for the constructed h are: Im h = 0 on main arcs,
Im h < 0 on both sides of them, Im h >= 0 on complementary arcs and on the
semi-infinite tails, and h'/R nonvanishing along the extended contour.

Two facts shape the implementation.  First, the main arcs are rigid: they
are the Im h = 0 level lines joining their endpoints, and the straight
chords used for quadrature only approximate them, so the side checks are
made along traced level lines (the level set is invariant under the branch
flip between chord and traced cut placement).  Second, complementary arcs
and tails are freely deformable within the analyticity domain of f, so
their condition is existential: a deterministic family of candidate routes
is scanned and the best route is reported.

The far tails never need quadrature: on the pushed rays (-inf, -mu/2) the
boundary value is Im h(z + i0) = -Im f(z + i0) = (pi/2)(|z| - mu/2) >= 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConvergenceError, NearBreakError, RhmodError
from .geometry import (BranchpointSet, Line, Path, Radical, build_contour,
                       extend_gamma_inf, seg_point_distance,
                       segment_intersections, winding_number)
from .modulation import SolveReport, newton_solve
from .params import ProblemParams, Side
from .rhp_core import (RhpSolution, eval_h, eval_h_and_hprime, solve_rhp)
from .scattering import eval_T


@dataclass
class ArcCheck:
    label: str
    max_im_on_arc: float          # |Im h| along the traced arc
    max_im_sides: float           # max Im h over both offset sides (< 0 required)
    n_samples: int
    traced: bool = True


@dataclass
class CompCheck:
    label: str
    min_im: float                 # best route: >= -tol required
    n_samples: int
    route_bulge: float = 0.0      # sagitta (relative) of the best route


@dataclass
class SignReport:
    main_arc_checks: List[ArcCheck] = field(default_factory=list)
    comp_arc_checks: List[CompCheck] = field(default_factory=list)
    tail_check: Optional[CompCheck] = None
    far_tail_min: float = 0.0
    hprime_over_R_min: float = float("inf")
    margin: float = 0.0           # most positive main-side maximum
    passed: bool = False
    comp_tol: float = 1e-8
    hpr_floor: float = 1e-6
    notes: List[str] = field(default_factory=list)


# ---------------------------------------------------------------------------
# level-line tracing
# ---------------------------------------------------------------------------

def _im_and_grad(sol: RhpSolution, z: complex, tol: float):
    h, hp = eval_h_and_hprime(sol, np.array([z]), tol=tol)
    return float(h[0].imag), complex(hp[0])


def _trace_once(sol: RhpSolution, za: complex, zb: complex, nudge: complex,
                nsteps: int, tol: float) -> List[complex]:
    tol = max(tol, 1e-7)   # the level line only needs modest field accuracy
    L = abs(zb - za)
    ds = L / nsteps
    z = za + nudge
    for _ in range(4):
        v, hp = _im_and_grad(sol, z, tol)
        if abs(hp) < 1e-12:
            break
        g = 1j * np.conj(hp)              # gradient of Im h as a complex vector
        z = z - v * g / abs(g) ** 2
        if abs(v) < 1e-10:
            break
    prev_t = (zb - za) / L
    pts = [za, z]
    for step in range(6 * nsteps):
        v, hp = _im_and_grad(sol, z, tol)
        if abs(hp) < 1e-12:
            raise ConvergenceError("level-line tracing hit a critical point")
        g = 1j * np.conj(hp)
        t = 1j * g / abs(g)
        # keep direction continuity; bias the very first step toward zb
        ref = prev_t
        if (t.real * ref.real + t.imag * ref.imag) < 0:
            t = -t
        prev_t = t
        z_pred = z + ds * t
        for _ in range(3):
            v2, hp2 = _im_and_grad(sol, z_pred, tol)
            g2 = 1j * np.conj(hp2)
            z_pred = z_pred - v2 * g2 / abs(g2) ** 2
            if abs(v2) < 1e-10:
                break
        z = z_pred
        if z.imag <= 0.0:
            break          # gamma^inf pieces live in the closed upper half-plane
        pts.append(z)
        if abs(z - zb) < 1.6 * ds:
            pts.append(zb)
            return pts
        if abs(z - za) > 4.0 * L + 10 * ds:
            break
    raise ConvergenceError(f"level line from {za:.4f} did not reach {zb:.4f}")


def trace_level_arc(sol: RhpSolution, za: complex, zb: complex,
                    nsteps: int = 36, tol: float = 1e-9) -> List[complex]:
    """Polyline along the Im h = 0 level line from za to zb.

    Both endpoints are level points (branchpoints, z0, or real-axis points
    with Im h = 0).  Marches a predictor-corrector from a point nudged off
    za, retrying a fan of nudge directions (the level set through a
    branchpoint has several branches); raises ConvergenceError when no
    branch reaches zb.
    """
    L = abs(zb - za)
    e_chord = (zb - za) / L
    last = None
    for ang in (0.0, 0.5, -0.5, 1.0, -1.0, 1.5, -1.5):
        nudge = 0.06 * L * e_chord * np.exp(1j * ang)
        if (za + nudge).imag * (za.imag if za.imag != 0 else 1.0) < 0:
            continue
        try:
            return _trace_once(sol, za, zb, nudge, nsteps, tol)
        except (ConvergenceError, RhmodError, ValueError) as err:
            last = err
    raise ConvergenceError(f"level line {za:.4f} -> {zb:.4f}: {last}")


def _node_side_samples(pts: Sequence[complex], lo: float = 0.06,
                       hi: float = 0.94):
    """Traced nodes and their normals, restricted to the interior span.

    Sampling at the corrected nodes themselves avoids the sag of the
    interpolating polyline off the curved level line.
    """
    pts = np.asarray(pts, dtype=complex)
    seg = np.diff(pts)
    lens = np.abs(seg)
    s_cum = np.concatenate([[0.0], np.cumsum(lens)])
    total = s_cum[-1]
    mask = (s_cum >= lo * total) & (s_cum <= hi * total)
    idx = np.where(mask)[0]
    idx = idx[(idx > 0) & (idx < len(pts) - 1)]
    z = pts[idx]
    t = pts[np.minimum(idx + 1, len(pts) - 1)] - pts[np.maximum(idx - 1, 0)]
    n = 1j * t / np.abs(t)
    return z, n


def _polyline_side_samples(pts: Sequence[complex], m: int, lo=0.06, hi=0.94):
    """m points along a polyline with unit normals, away from the ends."""
    pts = np.asarray(pts, dtype=complex)
    seg = np.diff(pts)
    lens = np.abs(seg)
    s_cum = np.concatenate([[0.0], np.cumsum(lens)])
    total = s_cum[-1]
    targets = np.linspace(lo, hi, m) * total
    z_out = np.empty(m, dtype=complex)
    n_out = np.empty(m, dtype=complex)
    k = 0
    for i, s in enumerate(targets):
        while k < len(lens) - 1 and s_cum[k + 1] < s:
            k += 1
        frac = (s - s_cum[k]) / lens[k]
        z_out[i] = pts[k] + frac * seg[k]
        t = seg[k] / lens[k]
        n_out[i] = 1j * t
    return z_out, n_out


# ---------------------------------------------------------------------------
# route families for deformable pieces
# ---------------------------------------------------------------------------

def _bulged_route(za: complex, zb: complex, sagitta: float,
                  npts: int = 24) -> np.ndarray:
    """Circular bulge from za to zb; sagitta is relative to |zb - za|.

    Endpoints themselves are excluded (they are branchpoints where both
    Im h and R vanish).
    """
    u = np.linspace(0.02, 0.98, npts)
    base = za + (zb - za) * u
    n = 1j * (zb - za) / abs(zb - za)
    return base + sagitta * abs(zb - za) * np.sin(np.pi * u) * n


def _route_blocked(pts: np.ndarray, sol: RhpSolution) -> bool:
    """A route is inadmissible if it crosses an R-cut or the [0, iT] cut."""
    cuts = list(sol.rad.cut_segments())
    T = eval_T(sol.params.mu)
    if T.imag > 1e-12:
        cuts.append(Line(0j, T))
        cuts.append(Line(-T, 0j))
    if np.any(np.imag(pts) < 0.0):
        return True
    for a, b in zip(pts[:-1], pts[1:]):
        seg = Line(complex(a), complex(b))
        for cut in cuts:
            if segment_intersections(seg, cut, eps=1e-9):
                return True
    return False


def _clear_mask(sol: RhpSolution, zs: np.ndarray) -> np.ndarray:
    keep = np.ones(len(zs), bool)
    for i, z in enumerate(zs):
        for loop in sol.cs.all_loops():
            if any(seg_point_distance(s, z) < 0.3 * sol.cs.d_small
                   for s in loop.all_segments()):
                keep[i] = False
                break
    return keep


def _best_route_min(sol: RhpSolution, za: complex, zb: complex,
                    bulges: Sequence[float], tol: float,
                    lift: float = 0.0, lens=None) -> Tuple[float, float, int, float]:
    # Note: bulged fallback routes are not lens-corrected; they stay away
    # from the narrow lenses except near shared endpoints.
    """(best min Im h, bulge used, samples, min |h'/R| on the best route)."""
    best = (-np.inf, 0.0, 0, np.inf)
    for s in bulges:
        pts = _bulged_route(za, zb, s)
        if lift > 0.0:
            pts = np.array([p if p.imag >= lift else complex(p.real, lift)
                            for p in pts])
        if _route_blocked(pts, sol):
            continue
        keep = _clear_mask(sol, pts)
        if np.count_nonzero(keep) < len(pts) // 2:
            continue
        h, hp = eval_h_and_hprime(sol, pts[keep], tol=tol)
        vmin = float(np.min(h.imag))
        hpr = float(np.min(np.abs(hp / sol.rad(pts[keep]))))
        if vmin > best[0]:
            best = (vmin, s, int(np.count_nonzero(keep)), hpr)
        if vmin >= -1e-10:
            break
    return best


# ---------------------------------------------------------------------------
# the sign report
# ---------------------------------------------------------------------------

_BULGES = (0.0, 0.2, -0.2, 0.4, -0.4, 0.7, -0.7, 1.0, -1.0)


class _LensCorrector:
    """Sign correction for Im h between the straight cuts and the true bands.

    Our realization places the cuts of R on straight chords (bent polyline
    for the central pair); the true main arcs are the traced level lines.
    In each lens between a cut and its traced arc the constructed h is the
    reflection 2 W_j - h_true, so Im h flips sign there.  Membership is the
    winding number of the closed curve (traced arc + reversed cut); samples
    too close to a lens boundary come back NaN and are skipped.
    """

    def __init__(self):
        self.lenses: List[Path] = []

    def add(self, traced_pts: Sequence[complex], cut_segs: Sequence[Line]):
        """cut_segs: the upper-half cut pieces in arc orientation; the
        conjugate lens is added automatically."""
        chain = [Line(a, b) for a, b in zip(traced_pts[:-1], traced_pts[1:])
                 if abs(b - a) > 1e-14]
        back = [s.reversed() for s in reversed(cut_segs)]
        loop = chain + back
        self.lenses.append(Path(tuple(loop), "lens", closed=True))
        self.lenses.append(Path(tuple(sg.conj_reversed()
                                      for sg in reversed(loop)),
                                "lens~", closed=True))

    def corrected_im(self, bases, zs: np.ndarray, h: np.ndarray) -> np.ndarray:
        out = np.empty(len(zs))
        for i, (z, v) in enumerate(zip(zs, h)):
            sgn = 1.0
            try:
                for lens in self.lenses:
                    if winding_number(lens, z) != 0:
                        sgn = -sgn
                out[i] = sgn * v.imag
            except RhmodError:
                out[i] = np.nan
        return out


def check_signs(sol: RhpSolution, m_per_arc: int = 64,
                comp_tol: float = 1e-8, hpr_floor: float = 1e-6,
                offsets: Tuple[float, float] = (1e-3, 1e-2),
                eval_tol: float = 1e-9) -> SignReport:
    """Sample the sign conditions on gamma^inf for a solved configuration."""
    cs = sol.cs
    if cs.upper_tail is None:
        cs = extend_gamma_inf(cs)
    p = sol.params
    rep = SignReport(comp_tol=comp_tol, hpr_floor=hpr_floor)
    hpr_min = np.inf
    lens = _LensCorrector()

    # ---- main arcs: trace the level line, sample both offset sides
    main_specs = [("main_0", complex(p.z0), complex(sol.bps.upper[0]), 0)]
    up = sol.bps.upper
    for j in range(1, cs.n_pairs + 1):
        main_specs.append((f"main_{j}", complex(up[2 * j - 1]),
                           complex(up[2 * j]), j))
    traced_arcs = {}
    for label, za, zb, j in main_specs:
        try:
            pts = trace_level_arc(sol, za, zb, tol=eval_tol)
            traced = True
            # upper-half cut piece: central arc keeps only [z0, alpha_0]
            cut_up = cs.main_arcs[j].upper[1:] if j == 0 else cs.main_arcs[j].upper
            lens.add(pts, list(cut_up))
        except (RhmodError, ValueError):
            pts = [za, zb]
            traced = False
            rep.notes.append(f"{label}: level-line tracing failed, chord used")
        traced_arcs[label] = (pts, traced, abs(zb - za))

    for label, za, zb, j in main_specs:
        pts, traced, arclen = traced_arcs[label]
        if traced:
            z, n = _node_side_samples(pts)
        else:
            z, n = _polyline_side_samples(pts, max(8, m_per_arc // 2))
        worst_side = -np.inf
        worst_on = 0.0
        count = 0
        for eps in offsets:
            for sgn in (+1.0, -1.0):
                zs = z + sgn * eps * arclen * n
                keep = _clear_mask(sol, zs) & (zs.imag != 0.0)
                if not np.any(keep):
                    continue
                try:
                    h, hp = eval_h_and_hprime(sol, zs[keep], tol=eval_tol)
                    vims = lens.corrected_im(z[keep], zs[keep], h)
                except (RhmodError, ValueError):
                    continue
                if np.any(np.isfinite(vims)):
                    worst_side = max(worst_side, float(np.nanmax(vims)))
                count += int(np.sum(keep))
                if eps == offsets[-1]:
                    hpr_min = min(hpr_min, float(np.min(
                        np.abs(hp / sol.rad(zs[keep])))))
        if traced:
            keep = _clear_mask(sol, z) & (z.imag != 0.0)
            if np.any(keep):
                h = eval_h(sol, z[keep], tol=eval_tol)
                worst_on = float(np.max(np.abs(h.imag)))
        rep.main_arc_checks.append(ArcCheck(label, worst_on, worst_side,
                                            count, traced))

    # ---- complementary arcs and the compact pushed tail: deformable, so
    # trace the Im h = 0 boundary line between the endpoints and sample it
    # nudged to its nonnegative side; fall back to a bulged-route family
    comp_specs = [(f"comp_{j}", complex(up[2 * j - 2]), complex(up[2 * j - 1]))
                  for j in range(1, cs.n_pairs + 1)]
    tail_spec = ("tail_compact", complex(up[-1]), complex(-0.5 * p.mu, 0.0))
    for label, za, zb in (*comp_specs, tail_spec):
        check = None
        try:
            pts = trace_level_arc(sol, za, zb, nsteps=48, tol=eval_tol)
            z, n = _node_side_samples(pts, lo=0.02, hi=0.98)
            best = None
            for sgn in (+1.0, -1.0):
                zs = z + sgn * 1e-3 * cs.scale * n
                keep = _clear_mask(sol, zs) & (zs.imag != 0.0)
                if not np.any(keep):
                    continue
                h, hp = eval_h_and_hprime(sol, zs[keep], tol=eval_tol)
                vims = lens.corrected_im(z[keep], zs[keep], h)
                if not np.any(np.isfinite(vims)):
                    continue
                vmin = float(np.nanmin(vims))
                hpr = float(np.min(np.abs(hp / sol.rad(zs[keep]))))
                if best is None or vmin > best[0]:
                    best = (vmin, float(np.sum(keep)), hpr)
            if best is not None:
                check = CompCheck(label, best[0], int(best[1]), 0.0)
                hpr_min = min(hpr_min, best[2])
        except (RhmodError, ValueError):
            rep.notes.append(f"{label}: level-line tracing failed, "
                             f"bulge family used")
        if check is None:
            tau = eval_T(p.mu).imag
            lift = 0.0
            if tau > 0 and (za.real > 0) != (zb.real > 0):
                lift = tau + 0.1 * cs.scale
            vmin, bulge, count, hpr = _best_route_min(sol, za, zb, _BULGES,
                                                      eval_tol, lift=lift,
                                                      lens=lens)
            check = CompCheck(label, vmin, count, bulge)
            hpr_min = min(hpr_min, hpr)
        if label == "tail_compact":
            rep.tail_check = check
        else:
            rep.comp_arc_checks.append(check)

    # ---- far tails on the axis, closed form
    xs = -0.5 * p.mu - np.linspace(0.0, 10.0, 64) * cs.scale
    rep.far_tail_min = float(np.min(0.5 * np.pi * (np.abs(xs) - 0.5 * p.mu)))

    rep.hprime_over_R_min = float(hpr_min)
    rep.margin = max(c.max_im_sides for c in rep.main_arc_checks)
    rep.passed = (
        all(c.max_im_sides < -1e-9 for c in rep.main_arc_checks)
        and all(c.min_im >= -comp_tol for c in rep.comp_arc_checks)
        and rep.tail_check.min_im >= -comp_tol
        and rep.far_tail_min >= -comp_tol
        and rep.hprime_over_R_min > hpr_floor
    )
    return rep


def sign_report_json_obj(rep: SignReport) -> Dict:
    return {
        "passed": rep.passed,
        "margin": rep.margin,
        "hprime_over_R_min": rep.hprime_over_R_min,
        "far_tail_min": rep.far_tail_min,
        "main_arcs": [{"label": c.label, "max_im_on_arc": c.max_im_on_arc,
                       "max_im_sides": c.max_im_sides, "n": c.n_samples,
                       "traced": c.traced}
                      for c in rep.main_arc_checks],
        "comp_arcs": [{"label": c.label, "min_im": c.min_im, "n": c.n_samples,
                       "route_bulge": c.route_bulge}
                      for c in rep.comp_arc_checks],
        "tail": {"min_im": rep.tail_check.min_im, "n": rep.tail_check.n_samples,
                 "route": rep.tail_check.route_bulge} if rep.tail_check else None,
        "notes": rep.notes,
    }


def detect_genus(p: ProblemParams, seeds: Dict[int, BranchpointSet],
                 candidates: Tuple[int, ...] = (0, 2)
                 ) -> Tuple[Optional[int], Dict[int, SolveReport], Dict[int, SignReport]]:
    """Try candidate genera in order; return the first that solves and passes.

    Returns (genus or None, solve reports, sign reports); None means
    indeterminate (near a breaking curve).
    """
    solve_reports: Dict[int, SolveReport] = {}
    sign_reports: Dict[int, SignReport] = {}
    for g in candidates:
        if g not in seeds:
            continue
        pg = ProblemParams(p.x, p.t, p.mu, g, p.tols)
        try:
            rep = newton_solve(seeds[g], pg)
        except (ConvergenceError, NearBreakError, RhmodError, ValueError):
            continue
        solve_reports[g] = rep
        sol = solve_rhp(rep.alphas, pg)
        sign = check_signs(sol)
        sign_reports[g] = sign
        if sign.passed:
            return g, solve_reports, sign_reports
    return None, solve_reports, sign_reports


def sign_persistence_interval(bps: BranchpointSet, p: ProblemParams,
                              dmu_max: float = 0.2, levels: int = 4
                              ) -> Tuple[float, float]:
    """Bisection for a mu-interval around p.mu on which signs keep passing."""
    def passes(mu):
        try:
            pv = p.with_mu(mu)
            rep = newton_solve(bps, pv)
            return check_signs(solve_rhp(rep.alphas, pv)).passed
        except (RhmodError, ValueError):
            return False
    if not passes(p.mu):
        return (0.0, 0.0)
    out = []
    for sgn in (-1.0, +1.0):
        lo, hi = 0.0, dmu_max
        for _ in range(levels):
            mid = 0.5 * (lo + hi)
            if passes(p.mu + sgn * mid):
                lo = mid
            else:
                hi = mid
        out.append(lo)
    return (out[0], out[1])
