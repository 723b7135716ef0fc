"""Branchpoints, the radical R, and the contour/loop system.

Conventions fixed here and relied on everywhere else:

  * BranchpointSet stores only the upper-half-plane representatives
    (alpha_0, alpha_2, ..., alpha_{4N}) in contour order; conjugates are
    implied.  genus = 2N.
  * The contour gamma runs from conj(alpha_{4N}) through z0 = mu/2 up to
    alpha_{4N}.  The central main arc is the bent polyline
    conj(alpha_0) -> z0 -> alpha_0; all other arcs are straight chords.
  * R(z)^2 = prod (z - alpha_i) over all 4N+2 points, branch fixed by
    R(z) ~ -z^(2N+1) on the positive real axis, cuts along the main arcs.
    Each conjugate cut pair contributes a two-point chord radical; the bent
    central cut is the vertical-chord radical sign-flipped inside the
    triangle (conj(alpha_0), z0, alpha_0).
  * All loops are closed counterclockwise paths.  gamma_hat is a single
    curve pinched at z0 (it passes through z0 twice); the small loops come
    in conjugate component pairs.  Loops around complementary arcs cross
    two main-arc cuts; the per-segment `sigma` factor tracks the analytic
    continuation of 1/R along them (sigma = -1 on the strand aligned with
    the arc orientation, which is the convention the jump relations of the
    core module assume).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import ContourError, PlacementError
from .scattering import eval_T

_TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# branchpoints
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BranchpointSet:
    """Ordered upper-half-plane branchpoints (alpha_0, alpha_2, ..., alpha_{4N})."""

    upper: Tuple[complex, ...]

    def __post_init__(self):
        up = tuple(complex(a) for a in self.upper)
        object.__setattr__(self, "upper", up)
        if len(up) % 2 == 0:
            raise ValueError("need an odd number 2N+1 of upper branchpoints")
        for a in up:
            if not a.imag > 0:
                raise ValueError(f"branchpoint {a} not in the open upper half-plane")
        for i in range(len(up)):
            for k in range(i + 1, len(up)):
                if up[i] == up[k]:
                    raise ValueError("branchpoints must be distinct")

    @property
    def n_pairs(self) -> int:
        return (len(self.upper) - 1) // 2

    @property
    def genus(self) -> int:
        return 2 * self.n_pairs

    def all_points(self) -> List[complex]:
        """All 4N+2 points, even indices upper, odd their conjugates."""
        out = []
        for a in self.upper:
            out.append(a)
            out.append(a.conjugate())
        return out

    def conjugated(self) -> "BranchpointSet":
        return BranchpointSet(tuple(a.conjugate() for a in self.upper))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.upper, dtype=complex)


# ---------------------------------------------------------------------------
# path primitives
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Line:
    a: complex
    b: complex
    sigma: int = 1
    grade: Optional[str] = None  # 'a' or 'b': endpoint needing z0 grading

    def at(self, u):
        return self.a + (self.b - self.a) * np.asarray(u)

    def deriv(self, u):
        return np.full(np.shape(u), self.b - self.a, dtype=complex)

    @property
    def length(self) -> float:
        return abs(self.b - self.a)

    def conj_reversed(self) -> "Line":
        return Line(np.conj(self.b), np.conj(self.a), self.sigma,
                    {"a": "b", "b": "a"}.get(self.grade))

    def reversed(self) -> "Line":
        return Line(self.b, self.a, self.sigma,
                    {"a": "b", "b": "a"}.get(self.grade))


@dataclass(frozen=True)
class Arc:
    center: complex
    radius: float
    th0: float
    th1: float
    sigma: int = 1
    grade: Optional[str] = None

    def at(self, u):
        th = self.th0 + (self.th1 - self.th0) * np.asarray(u)
        return self.center + self.radius * np.exp(1j * th)

    def deriv(self, u):
        th = self.th0 + (self.th1 - self.th0) * np.asarray(u)
        return 1j * (self.th1 - self.th0) * self.radius * np.exp(1j * th)

    @property
    def a(self) -> complex:
        return self.center + self.radius * np.exp(1j * self.th0)

    @property
    def b(self) -> complex:
        return self.center + self.radius * np.exp(1j * self.th1)

    @property
    def length(self) -> float:
        return abs(self.th1 - self.th0) * self.radius

    def conj_reversed(self) -> "Arc":
        return Arc(np.conj(self.center), self.radius, -self.th1, -self.th0,
                   self.sigma, {"a": "b", "b": "a"}.get(self.grade))

    def reversed(self) -> "Arc":
        return Arc(self.center, self.radius, self.th1, self.th0, self.sigma,
                   {"a": "b", "b": "a"}.get(self.grade))


Segment = object  # Line | Arc


@dataclass(frozen=True)
class Path:
    """A chain of segments; `closed` paths are loops."""

    segments: Tuple[Segment, ...]
    name: str = ""
    closed: bool = False

    def conj_reversed(self) -> "Path":
        return Path(tuple(s.conj_reversed() for s in reversed(self.segments)),
                    self.name + "~", self.closed)

    def reversed(self) -> "Path":
        return Path(tuple(s.reversed() for s in reversed(self.segments)),
                    self.name + "[rev]", self.closed)

    def with_sigma(self, sigmas: Sequence[int]) -> "Path":
        segs = tuple(replace(s, sigma=int(sg)) for s, sg in zip(self.segments, sigmas))
        return Path(segs, self.name, self.closed)

    def sample(self, per_seg: int = 16) -> np.ndarray:
        u = np.linspace(0.0, 1.0, per_seg)
        return np.concatenate([np.atleast_1d(s.at(u)) for s in self.segments])

    @property
    def start(self) -> complex:
        return complex(self.segments[0].at(0.0))

    @property
    def end(self) -> complex:
        return complex(self.segments[-1].at(1.0))

    def to_json_obj(self):
        out = []
        for s in self.segments:
            kind = "line" if isinstance(s, Line) else "arc"
            samples = np.atleast_1d(s.at(np.linspace(0, 1, 9)))
            out.append({
                "kind": kind,
                "endpoints": [[float(np.real(s.at(0.0))), float(np.imag(s.at(0.0)))],
                              [float(np.real(s.at(1.0))), float(np.imag(s.at(1.0)))]],
                "samples": [[float(v.real), float(v.imag)] for v in samples],
            })
        return out


@dataclass(frozen=True)
class Loop:
    """A cycle made of one or more closed components (conjugate pairs)."""

    components: Tuple[Path, ...]
    name: str = ""

    def all_segments(self):
        for comp in self.components:
            yield from comp.segments

    def winding(self, z) -> int:
        return sum(winding_number(c, z) for c in self.components)


# ---------------------------------------------------------------------------
# elementary geometry helpers
# ---------------------------------------------------------------------------

def _cross(p: complex, q: complex) -> float:
    return p.real * q.imag - p.imag * q.real


def winding_number(path: Path, z: complex) -> int:
    """Winding of a closed path around z (angle-increment summation)."""
    z = complex(z)
    total = 0.0
    for s in path.segments:
        if isinstance(s, Line):
            pts = [s.a, s.b]
        else:
            n = max(4, int(abs(s.th1 - s.th0) / (math.pi / 4)) + 1)
            pts = list(np.atleast_1d(s.at(np.linspace(0, 1, n + 1))))
        for a, b in zip(pts[:-1], pts[1:]):
            da, db = a - z, b - z
            if da == 0 or db == 0:
                raise PlacementError(f"winding query point {z} lies on the path")
            total += math.atan2(_cross(da, db),
                                da.real * db.real + da.imag * db.imag)
    w = total / _TWO_PI
    if abs(w - round(w)) > 0.05:
        raise PlacementError(f"point {z} too close to path '{path.name}' for a "
                             f"reliable winding number (got {w:.3f})")
    return int(round(w))


def seg_point_distance(s: Segment, z: complex) -> float:
    if isinstance(s, Line):
        d = s.b - s.a
        L2 = abs(d) ** 2
        if L2 == 0.0:
            return abs(z - s.a)
        t = max(0.0, min(1.0, ((z - s.a) * np.conj(d)).real / L2))
        return abs(z - (s.a + t * d))
    u = np.linspace(0.0, 1.0, 33)
    return float(np.min(np.abs(np.atleast_1d(s.at(u)) - z)))


def _line_line_intersections(p: Line, q: Line, eps: float) -> List[Tuple[float, complex]]:
    """Interior intersections of two line segments; returns (t_on_p, point)."""
    d1, d2 = p.b - p.a, q.b - q.a
    den = _cross(d1, d2)
    if abs(den) < 1e-14 * (abs(d1) * abs(d2) + 1e-300):
        return []
    w = q.a - p.a
    t = _cross(w, d2) / den
    s = _cross(w, d1) / den
    if eps < t < 1.0 - eps and eps < s < 1.0 - eps:
        return [(t, p.a + t * d1)]
    return []


def _arc_line_intersections(arc: Arc, q: Line, eps: float) -> List[Tuple[float, complex]]:
    """Interior intersections of a circular arc with a line segment; (u_on_arc, pt)."""
    d = q.b - q.a
    f = q.a - arc.center
    A = abs(d) ** 2
    B = 2.0 * (f * np.conj(d)).real
    C = abs(f) ** 2 - arc.radius ** 2
    disc = B * B - 4 * A * C
    if disc <= 0 or A == 0.0:
        return []
    out = []
    for s in ((-B - math.sqrt(disc)) / (2 * A), (-B + math.sqrt(disc)) / (2 * A)):
        if eps < s < 1.0 - eps:
            pt = q.a + s * d
            th = math.atan2((pt - arc.center).imag, (pt - arc.center).real)
            lo, hi = arc.th0, arc.th1
            span = hi - lo
            if span == 0.0:
                continue
            u = (th - lo) / span
            for shift in (-_TWO_PI, 0.0, _TWO_PI):
                uu = (th + shift - lo) / span
                if eps < uu < 1.0 - eps:
                    out.append((uu, pt))
                    break
    return out


def segment_intersections(s: Segment, cut: Line, eps: float = 1e-9) -> List[Tuple[float, complex]]:
    if isinstance(s, Line):
        return _line_line_intersections(s, cut, eps)
    return _arc_line_intersections(s, cut, eps)


def _in_triangle(z, v0: complex, v1: complex, v2: complex):
    z = np.asarray(z, dtype=complex)
    def cr(p, q):
        return p.real * np.imag(q) - p.imag * np.real(q)
    s1 = cr(v1 - v0, z - v0)
    s2 = cr(v2 - v1, z - v1)
    s3 = cr(v0 - v2, z - v2)
    return ((s1 > 0) & (s2 > 0) & (s3 > 0)) | ((s1 < 0) & (s2 < 0) & (s3 < 0))


# ---------------------------------------------------------------------------
# the radical
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Radical:
    """Single-valued branch of sqrt(prod (z - alpha_i)) off the main-arc cuts."""

    bps: BranchpointSet
    z0: float

    def _pairs(self) -> List[Tuple[complex, complex, bool]]:
        """Cut pairs (a, b, central?) in the branch factorization."""
        up = self.bps.upper
        out = [(up[0].conjugate(), up[0], True)]
        for j in range(1, self.bps.n_pairs + 1):
            a, b = up[2 * j - 1], up[2 * j]
            out.append((a, b, False))
            out.append((b.conjugate(), a.conjugate(), False))
        return out

    @staticmethod
    def _chord(z, a: complex, b: complex):
        w = (2.0 * z - (a + b)) / (b - a)
        return 0.5 * (b - a) * np.sqrt(w - 1.0) * np.sqrt(w + 1.0)

    def eval(self, z):
        """R(z); normalized R ~ -z^(2N+1) as z -> +inf along the real axis."""
        z = np.asarray(z, dtype=complex)
        out = -np.ones_like(z)
        for a, b, central in self._pairs():
            fac = self._chord(z, a, b)
            if central:
                flip = _in_triangle(z, a, complex(self.z0), b)
                fac = np.where(flip, -fac, fac)
            out = out * fac
        return out

    def __call__(self, z):
        return self.eval(z)

    def dlog(self, z):
        """R'(z)/R(z) = sum_i 1/(2 (z - alpha_i))."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for a in self.bps.all_points():
            out = out + 0.5 / (z - a)
        return out

    def cut_segments(self) -> List[Line]:
        """The cut arcs: bent central polyline plus straight chords."""
        up = self.bps.upper
        segs = [Line(up[0].conjugate(), complex(self.z0)),
                Line(complex(self.z0), up[0])]
        for j in range(1, self.bps.n_pairs + 1):
            a, b = up[2 * j - 1], up[2 * j]
            segs.append(Line(a, b))
            segs.append(Line(b.conjugate(), a.conjugate()))
        return segs


# ---------------------------------------------------------------------------
# contour system
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ArcFamily:
    """One main or complementary arc (conjugate pair lumped), j >= 0."""

    kind: str                    # 'main' | 'comp'
    j: int
    upper: Tuple[Line, ...]      # segments in contour orientation
    lower: Tuple[Line, ...]


@dataclass(frozen=True)
class ContourSystem:
    bps: BranchpointSet
    mu: float
    gamma: Path                          # oriented lower endpoint -> upper endpoint
    main_arcs: Tuple[ArcFamily, ...]     # j = 0..N
    comp_arcs: Tuple[ArcFamily, ...]     # j = 1..N
    gamma_hat: Loop                      # single pinched component
    m_loops: Tuple[Loop, ...]            # j = 1..N, conjugate component pairs
    c_loops: Tuple[Loop, ...]            # j = 1..N, sigma-tracked
    d_small: float
    d_hat: float
    scale: float
    upper_tail: Optional[Path] = None    # compact pushed piece alpha_{4N} -> -mu/2
    lower_tail: Optional[Path] = None

    @property
    def z0(self) -> float:
        return 0.5 * self.mu

    @property
    def n_pairs(self) -> int:
        return self.bps.n_pairs

    def all_loops(self) -> List[Loop]:
        return [self.gamma_hat, *self.m_loops, *self.c_loops]

    def loop(self, kind: str, j: int = 0) -> Loop:
        if kind in ("gamma_hat", "hat", "g"):
            return self.gamma_hat
        if kind in ("m", "main"):
            return self.m_loops[j - 1]
        if kind in ("c", "comp"):
            return self.c_loops[j - 1]
        raise KeyError(kind)

    def to_json(self) -> str:
        obj = {
            "mu": self.mu,
            "genus": self.bps.genus,
            "alphas_upper": [[a.real, a.imag] for a in self.bps.upper],
            "gamma": self.gamma.to_json_obj(),
            "gamma_hat": [c.to_json_obj() for c in self.gamma_hat.components],
            "m_loops": [[c.to_json_obj() for c in L.components] for L in self.m_loops],
            "c_loops": [[c.to_json_obj() for c in L.components] for L in self.c_loops],
        }
        if self.upper_tail is not None:
            obj["upper_tail"] = self.upper_tail.to_json_obj()
            obj["lower_tail"] = self.lower_tail.to_json_obj()
        return json.dumps(obj, indent=1)


def _east_normal(a: complex, b: complex) -> complex:
    t = (b - a) / abs(b - a)
    return -1j * t


def _open_strand(vertices: Sequence[complex], d: float, side: int) -> List[Segment]:
    """Offset strand along an open polyline, from v0-offset to vK-offset.

    Outside corners get radius-d arc joins, inside corners are trimmed.
    """
    ts = [(b - a) / abs(b - a) for a, b in zip(vertices[:-1], vertices[1:])]
    ns = [side * (-1j) * t for t in ts]
    segs: List[Segment] = []
    cur = vertices[0] + d * ns[0]
    for k in range(1, len(vertices) - 1):
        v = vertices[k]
        delta = math.atan2(_cross(ts[k - 1], ts[k]),
                           ts[k - 1].real * ts[k].real + ts[k - 1].imag * ts[k].imag)
        outside = (side == +1 and delta > 0) or (side == -1 and delta < 0)
        if outside and abs(delta) > 1e-12:
            end_k = v + d * ns[k - 1]
            if abs(end_k - cur) > 1e-14:
                segs.append(Line(cur, end_k))
            th0 = math.atan2(ns[k - 1].imag, ns[k - 1].real)
            segs.append(Arc(v, d, th0, th0 + delta))
            cur = v + d * ns[k]
            continue
        p1, p2 = vertices[k - 1] + d * ns[k - 1], v + d * ns[k - 1]
        q1, q2 = v + d * ns[k], vertices[k + 1] + d * ns[k]
        d1, d2 = p2 - p1, q2 - q1
        den = _cross(d1, d2)
        if abs(den) < 1e-12 * abs(d1) * abs(d2):
            if abs(p2 - cur) > 1e-14:
                segs.append(Line(cur, p2))
            cur = p2
            continue
        w = q1 - p1
        t = _cross(w, d2) / den
        X = p1 + t * d1
        if abs(X - cur) > 1e-14:
            segs.append(Line(cur, X))
        cur = X
    tail_end = vertices[-1] + d * ns[-1]
    if abs(tail_end - cur) > 1e-14:
        segs.append(Line(cur, tail_end))
    return segs


def _polyline_loop(vertices: Sequence[complex], d: float, name: str) -> Path:
    """CCW loop at clearance d around an open polyline (semicircle end caps)."""
    t_last = vertices[-1] - vertices[-2]
    t_last = t_last / abs(t_last)
    t_first = vertices[1] - vertices[0]
    t_first = t_first / abs(t_first)
    th_e_last = math.atan2((-1j * t_last).imag, (-1j * t_last).real)
    th_e_first = math.atan2((-1j * t_first).imag, (-1j * t_first).real)
    east = _open_strand(vertices, d, +1)
    west = _open_strand(vertices, d, -1)
    segs = (tuple(east)
            + (Arc(vertices[-1], d, th_e_last, th_e_last + math.pi),)
            + tuple(s.reversed() for s in reversed(west))
            + (Arc(vertices[0], d, th_e_first + math.pi, th_e_first + _TWO_PI),))
    return Path(segs, name, closed=True)


def _strand(vertices: Sequence[complex], d: float, side: int) -> List[Segment]:
    """Offset strand along the z0-rooted chain, tapered to pass through z0.

    The departure angle from z0 is clamped so that both strands stay in the
    open upper half-plane.
    """
    z0 = vertices[0]
    t0 = (vertices[1] - vertices[0])
    t0 = t0 / abs(t0)
    th_t = math.atan2(t0.imag, t0.real)
    if side == +1:
        th = th_t - min(0.25 * math.pi, 0.5 * th_t)
    else:
        th = th_t + min(0.25 * math.pi, 0.5 * (math.pi - th_t))
    entry = z0 + d * math.sqrt(2.0) * complex(math.cos(th), math.sin(th))
    segs = _open_strand(vertices, d, side)
    first = segs[0]
    segs[0] = Line(entry, first.b)
    return [Line(z0, entry, grade="a")] + segs


def _pinched_gamma_hat(upper_vertices: Sequence[complex], d: float) -> Loop:
    """Single ccw loop around the whole contour, pinched (twice) at z0.

    upper_vertices = [z0, alpha_0, alpha_2, ..., alpha_{4N}].
    """
    far = upper_vertices[-1]
    t = (upper_vertices[-1] - upper_vertices[-2])
    t = t / abs(t)
    n_east = -1j * t
    th_e = math.atan2(n_east.imag, n_east.real)

    east = _strand(upper_vertices, d, +1)
    west = _strand(upper_vertices, d, -1)
    cap = Arc(far, d, th_e, th_e + math.pi)
    segs = tuple(east) + (cap,) + tuple(s.reversed() for s in reversed(west))
    upper_half = Path(segs, "gamma_hat_upper")
    lower_half = upper_half.conj_reversed()
    return Loop((Path(upper_half.segments + lower_half.segments,
                      "gamma_hat", closed=True),), "gamma_hat")


def _assign_sigma(path: Path, cuts: Sequence[Line], sigma0: int,
                  eps: float = 1e-9) -> Tuple[Path, int]:
    """Split segments at R-cut crossings and assign alternating sigma.

    Returns the new path and the number of crossings found.
    """
    sigma = sigma0
    new_segs: List[Segment] = []
    n_cross = 0
    for s in path.segments:
        hits = []
        for cut in cuts:
            hits.extend(u for u, _ in segment_intersections(s, cut, eps))
        hits.sort()
        if not hits:
            new_segs.append(replace(s, sigma=sigma))
            continue
        u_prev = 0.0
        for u in hits:
            new_segs.append(_sub_segment(s, u_prev, u, sigma))
            sigma = -sigma
            n_cross += 1
            u_prev = u
        new_segs.append(_sub_segment(s, u_prev, 1.0, sigma))
    return Path(tuple(new_segs), path.name, path.closed), n_cross


def _sub_segment(s: Segment, u0: float, u1: float, sigma: int) -> Segment:
    if isinstance(s, Line):
        return Line(complex(s.at(u0)), complex(s.at(u1)), sigma, s.grade
                    if (u0 == 0.0 and s.grade == "a") or (u1 == 1.0 and s.grade == "b")
                    else None)
    th0 = s.th0 + (s.th1 - s.th0) * u0
    th1 = s.th0 + (s.th1 - s.th0) * u1
    return Arc(s.center, s.radius, th0, th1, sigma, None)


def min_pair_gap(bps: BranchpointSet, z0: float) -> float:
    pts = bps.all_points()
    gaps = [abs(a - z0) for a in pts]
    for i in range(len(pts)):
        for k in range(i + 1, len(pts)):
            gaps.append(abs(pts[i] - pts[k]))
    return min(gaps)


def build_contour(bps: BranchpointSet, mu: float, *,
                  d_small_factor: float = 0.25,
                  d_hat_factor: float = 0.45,
                  validate: bool = True) -> ContourSystem:
    """Construct the contour gamma, its arcs, and all loop contours.

    Deterministic in its inputs.  With the default clearance factors a fixed
    shrink ladder is tried before giving up; explicit factors are honored
    exactly.  Raises ContourError when the points cannot be threaded by this
    path family (self-intersection, cut collisions).
    """
    defaults = (d_small_factor == 0.25 and d_hat_factor == 0.45)
    ladder = (1.0, 0.7, 0.5, 0.35) if (defaults and validate) else (1.0,)
    last_err = None
    for shrink in ladder:
        try:
            return _build_once(bps, mu,
                               d_small_factor * shrink, d_hat_factor * shrink,
                               validate)
        except ContourError as err:
            last_err = err
    raise last_err


def _build_once(bps: BranchpointSet, mu: float,
                d_small_factor: float, d_hat_factor: float,
                validate: bool) -> ContourSystem:
    z0 = 0.5 * mu
    up = bps.upper
    N = bps.n_pairs
    gap = min_pair_gap(bps, z0)
    # the pinch taper at z0 must clear the chord cuts, not just their endpoints
    for j in range(1, N + 1):
        gap = min(gap, seg_point_distance(Line(up[2 * j - 1], up[2 * j]), complex(z0)))
    d_small = d_small_factor * gap
    d_hat = d_hat_factor * gap
    scale = max(max(abs(a - b) for a in bps.all_points() for b in [complex(z0)]), gap)

    # complementary arcs detour over the [0, iT] cut of f when their chord
    # would collide with it (mu < 2 only); main arcs stay straight chords
    # because they coincide with the cuts of R
    tau = eval_T(mu).imag
    comp_verts: List[List[complex]] = []
    for j in range(1, N + 1):
        Ac, Bc = up[2 * j - 2], up[2 * j - 1]
        verts = [complex(Ac), complex(Bc)]
        if tau > 0 and (Ac.real > 0) != (Bc.real > 0):
            y_c = Ac.imag + (Bc.imag - Ac.imag) * (0.0 - Ac.real) / (Bc.real - Ac.real)
            clear = 1.6 * d_hat + 0.05 * scale
            if y_c < tau + clear:
                verts = [complex(Ac), 1j * (tau + clear), complex(Bc)]
        comp_verts.append(verts)

    # gamma: conj chain ascending, central bend through z0, upper chain
    upper_vertices = [complex(z0), complex(up[0])]
    for j in range(1, N + 1):
        upper_vertices.extend(comp_verts[j - 1][1:])       # waypoint(s) + alpha_{4j-2}
        upper_vertices.append(complex(up[2 * j]))          # alpha_{4j}
    gamma_segs: List[Segment] = []
    lower_vertices = [v.conjugate() for v in reversed(upper_vertices)]
    for a, b in zip(lower_vertices[:-1], lower_vertices[1:]):
        gamma_segs.append(Line(a, b))
    for a, b in zip(upper_vertices[:-1], upper_vertices[1:]):
        gamma_segs.append(Line(a, b))
    gamma = Path(tuple(gamma_segs), "gamma")

    # arc families
    main_arcs = [ArcFamily("main", 0,
                           (Line(up[0].conjugate(), complex(z0)), Line(complex(z0), up[0])),
                           ())]
    comp_arcs = []
    for j in range(1, N + 1):
        A, B = up[2 * j - 1], up[2 * j]
        main_arcs.append(ArcFamily("main", j,
                                   (Line(A, B),),
                                   (Line(B.conjugate(), A.conjugate()),)))
        verts = comp_verts[j - 1]
        upper_segs = tuple(Line(a, b) for a, b in zip(verts[:-1], verts[1:]))
        lower_segs = tuple(Line(b.conjugate(), a.conjugate())
                           for a, b in zip(reversed(verts[1:]), reversed(verts[:-1])))
        comp_arcs.append(ArcFamily("comp", j, upper_segs, lower_segs))

    rad_cuts = Radical(bps, z0).cut_segments()

    gamma_hat = _pinched_gamma_hat(upper_vertices, d_hat)

    m_loops = []
    c_loops = []
    for j in range(1, N + 1):
        A, B = up[2 * j - 1], up[2 * j]
        up_loop = _polyline_loop([complex(A), complex(B)], d_small, f"m_hat_{j}_up")
        m_loops.append(Loop((up_loop, up_loop.conj_reversed()), f"m_hat_{j}"))
        verts = comp_verts[j - 1]
        raw = _polyline_loop(verts, d_small, f"c_hat_{j}_up")
        tracked, ncross = _assign_sigma(raw, rad_cuts, sigma0=-1)
        if ncross % 2 != 0:
            raise ContourError(f"c_hat_{j}: odd number of cut crossings ({ncross})")
        if validate and ncross != 2:
            raise ContourError(f"c_hat_{j}: expected 2 cut crossings, found {ncross}")
        # normalize: sigma must be -1 on the east (arc-aligned) strand in a
        # spot not separated from the arc by any cut
        sig_at = None
        for a, b in zip(verts[:-1], verts[1:]):
            n_e = _east_normal(a, b)
            for s_frac in (0.5, 0.35, 0.65, 0.25, 0.75, 0.45, 0.55):
                q = a + (b - a) * s_frac
                foot = q + d_small * n_e
                conn = Line(q, foot)
                if any(segment_intersections(conn, cut, eps=1e-9) for cut in rad_cuts):
                    continue
                best = np.inf
                for s in tracked.segments:
                    dist = seg_point_distance(s, foot)
                    if dist < best:
                        best, sig_at = dist, s.sigma
                if best < 1e-9 * d_small + 1e-12:
                    break
                sig_at = None
            if sig_at is not None:
                break
        if sig_at is None:
            raise ContourError(f"c_hat_{j}: could not normalize the branch "
                               f"tracking against the arc")
        if sig_at != -1:
            tracked = tracked.with_sigma([-s.sigma for s in tracked.segments])
        c_loops.append(Loop((tracked, tracked.conj_reversed()), f"c_hat_{j}"))

    cs = ContourSystem(bps=bps, mu=mu, gamma=gamma,
                       main_arcs=tuple(main_arcs), comp_arcs=tuple(comp_arcs),
                       gamma_hat=gamma_hat, m_loops=tuple(m_loops),
                       c_loops=tuple(c_loops),
                       d_small=d_small, d_hat=d_hat, scale=scale)
    if validate:
        _validate_system(cs)
    return cs


def _validate_system(cs: ContourSystem):
    # gamma must not self-intersect
    segs = cs.gamma.segments
    for i in range(len(segs)):
        for k in range(i + 1, len(segs)):
            if segment_intersections(segs[i], segs[k], eps=1e-9):
                raise ContourError("gamma self-intersects: cannot thread the "
                                   "branchpoints with this path family")
    # gamma_hat / m_loops must not cross any R-cut
    rad_cuts = Radical(cs.bps, cs.z0).cut_segments()
    for loop in (cs.gamma_hat, *cs.m_loops):
        for s in loop.all_segments():
            for cut in rad_cuts:
                if segment_intersections(s, cut, eps=1e-7):
                    raise ContourError(f"loop '{loop.name}' crosses a branch cut of R")
    # gamma_hat meets the real axis only at z0
    for comp in cs.gamma_hat.components:
        for s in comp.segments:
            pts = np.atleast_1d(s.at(np.linspace(0, 1, 17)))
            im = np.imag(pts)
            crossings = np.where(np.sign(im[:-1]) * np.sign(im[1:]) < 0)[0]
            for idx in crossings:
                raise ContourError("gamma_hat crosses the real axis away from z0")
    # the f-cut segment [0, i tau] (mu < 2) must stay clear of gamma_hat and
    # of every arc of gamma itself
    T = eval_T(cs.mu)
    if T.imag > 1e-12:
        cut = Line(0.0 + 0j, T)
        for s in cs.gamma_hat.all_segments():
            if segment_intersections(s, cut, eps=1e-9):
                raise ContourError("gamma_hat collides with the branch cut [0, iT] of f")
        for fam in (*cs.main_arcs, *cs.comp_arcs):
            for s in (*fam.upper, *fam.lower):
                if segment_intersections(s, cut, eps=1e-9):
                    raise ContourError(f"{fam.kind} arc {fam.j} crosses the "
                                       f"branch cut [0, iT] of f")
        probe = 0.5j * T.imag
        if min(seg_point_distance(s, probe) for s in cs.gamma_hat.all_segments()) \
                > 1e-12 and cs.gamma_hat.winding(probe) != 0:
            raise ContourError("the branch cut [0, iT] of f lies inside gamma_hat")
    # branchpoints inside gamma_hat, arcs inside their small loops
    for a in cs.bps.upper:
        if cs.gamma_hat.winding(a) != 1:
            raise ContourError(f"gamma_hat does not enclose branchpoint {a}")
    for fam, loops in ((cs.main_arcs[1:], cs.m_loops), (cs.comp_arcs, cs.c_loops)):
        for arc, loop in zip(fam, loops):
            for seg in arc.upper:
                if loop.winding(complex(seg.at(0.5))) != 1:
                    raise ContourError(f"loop '{loop.name}' does not enclose its arc")


def extend_gamma_inf(cs: ContourSystem) -> ContourSystem:
    """Append the compact pushed tail pieces alpha_{4N} -> -mu/2 (+ mirror).

    The far tails continue along the real axis to -inf just above/below the
    axis and are handled in closed form by the sign checks (Omega = 0 there).
    """
    far = complex(cs.bps.upper[-1])
    T = eval_T(cs.mu)
    tau = T.imag
    y_t = max(max(a.imag for a in cs.bps.upper) + 2.5 * cs.d_hat,
              tau + 0.25 * cs.scale)
    xe = -0.5 * cs.mu
    wp = [far, complex(far.real, y_t), complex(xe, y_t), complex(xe, 0.0)]
    segs = tuple(Line(a, b) for a, b in zip(wp[:-1], wp[1:]) if a != b)
    upper_tail = Path(segs, "tail_upper")
    if tau > 0 and y_t <= tau:
        raise ContourError("tail cannot clear the [0, iT] cut of f")
    return replace(cs, upper_tail=upper_tail, lower_tail=upper_tail.conj_reversed())


def hausdorff_distance(p1: Path, p2: Path, per_seg: int = 64) -> float:
    s1, s2 = p1.sample(per_seg), p2.sample(per_seg)
    d12 = np.abs(s1[:, None] - s2[None, :]).min(axis=1).max()
    d21 = np.abs(s1[:, None] - s2[None, :]).min(axis=0).max()
    return float(max(d12, d21))
