import math

import numpy as np
import numpy.polynomial.polynomial as npoly
import pytest

from rhmod.errors import PlacementError, QuadratureError
from rhmod.geometry import Arc, BranchpointSet, Line, Loop, Path, Radical, build_contour
from rhmod.params import ProblemParams
from rhmod.quadrature import (WG15, WGK, XGK, IntegralSpec, integrate,
                              integrate_family, integrate_specs)

BPS_G0 = BranchpointSet((0.3 + 1.1j,))
BPS_G2 = BranchpointSet((0.55 + 0.85j, 0.8 + 0.72j, 1.05 + 0.9j))
P0 = ProblemParams(x=-1.0, t=0.2, mu=2.0, genus=0)
P2 = ProblemParams(x=-1.0, t=0.5, mu=2.0, genus=2)


def series_coeffs(alphas, nmax):
    """1/R = -z^-(2N+1) sum_k c_k z^-k: coefficients of prod (1-a/z)^(-1/2)."""
    c = np.zeros(nmax + 1, dtype=complex)
    c[0] = 1.0
    for a in alphas:
        f = np.zeros(nmax + 1, dtype=complex)
        f[0] = 1.0
        coef = 1.0
        for k in range(1, nmax + 1):
            coef = coef * (0.5 + (k - 1)) / k
            f[k] = coef * a ** k
        c = npoly.polymul(c, f)[:nmax + 1]
    return c


def hat_power_oracle(bps, n):
    """oint_gammahat zeta^n / R dzeta by the residue at infinity (ccw)."""
    deg = len(bps.all_points()) // 2    # R ~ -z^deg, deg = 2N+1
    c = series_coeffs(bps.all_points(), n + 2)
    k = n - (deg - 1)                   # index with z^(n-deg-k) = z^-1
    if k < 0:
        return 0.0 + 0j
    return 2j * np.pi * (-c[k])


def cheb_arc_integral(g, a, b, m=4000):
    th = (np.arange(m) + 0.5) * np.pi / m
    s = 0.5 * (1 - np.cos(th))
    zs = a + (b - a) * s
    w = np.pi / m * 0.5 * np.sin(th) * (b - a)
    return np.sum(g(zs) * w)


def test_rule_weights_and_exactness():
    assert abs(WGK.sum() - 2.0) < 1e-13
    assert abs(WG15.sum() - 2.0) < 1e-13
    for deg in range(0, 23):
        exact = 2.0 / (deg + 1) if deg % 2 == 0 else 0.0
        assert abs((XGK ** deg) @ WGK - exact) < 1e-13
        if deg <= 13:
            assert abs((XGK ** deg) @ WG15 - exact) < 1e-13


# ---------------------------------------------------------------------------
# residue / series oracles  (weight one)
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("bps,p", [(BPS_G0, P0), (BPS_G2, P2)])
def test_hat_powers_match_series_oracle(bps, p):
    cs = build_contour(bps, p.mu)
    rad = Radical(bps, p.z0)
    ns = list(range(0, 6))
    vals = integrate_family(cs.gamma_hat, rad, p,
                            [("one", ("pow", n)) for n in ns], tol=1e-12)
    for n, v in zip(ns, vals):
        want = hat_power_oracle(bps, n)
        assert abs(v - want) <= 1e-9 * max(1.0, abs(want))


def test_genus0_basic_residues():
    cs = build_contour(BPS_G0, 2.0)
    rad = Radical(BPS_G0, 1.0)
    vals = integrate_family(cs.gamma_hat, rad, P0,
                            [("one", ("pow", 0)), ("one", ("pow", 1))],
                            tol=1e-12)
    assert abs(vals[0] - (-2j * np.pi)) < 1e-9
    assert abs(vals[1] - (-2j * np.pi * 0.3)) < 1e-9


def test_cauchy_kernels_closed_forms():
    cs = build_contour(BPS_G0, 2.0)
    rad = Radical(BPS_G0, 1.0)
    z = 0.75 + 0.5j
    # inside gamma_hat, integrand analytic outside: zero
    v = integrate(IntegralSpec(("hat", 0), ("cauchy", z), "one"), cs, rad, P0,
                  tol=1e-12)
    assert abs(v) < 1e-10
    # synthetic circle around a point away from all cuts: plain residues
    zr = 1.6 + 0.9j
    circ = Loop((Path((Arc(zr, 0.1, 0.0, 2 * np.pi),), "c", closed=True),), "c")
    v1, v2 = integrate_family(circ, rad, P0,
                              [("one", ("cauchy", zr)), ("one", ("cauchy2", zr))],
                              tol=1e-12)
    assert abs(v1 - 2j * np.pi / rad(zr)) < 1e-9
    assert abs(v2 - (-2j * np.pi * rad.dlog(zr) / rad(zr))) < 1e-9
    # circle enclosing nothing
    far = Loop((Path((Arc(5 + 5j, 0.2, 0.0, 2 * np.pi),), "f", closed=True),), "f")
    v0 = integrate_family(far, rad, P0, [("one", ("cauchy", z))], tol=1e-12)[0]
    assert abs(v0) < 1e-12


def test_small_loops_match_collapse_oracle():
    cs = build_contour(BPS_G2, 2.0)
    rad = Radical(BPS_G2, 1.0)
    A, B = BPS_G2.upper[1], BPS_G2.upper[2]

    def R_west(zs):
        w = (2 * zs - (A + B)) / (B - A)
        crp = 0.5 * (B - A) * 1j * np.sqrt((1 - w) * (1 + w))
        out = -np.ones_like(zs)
        for (aa, bb, central) in rad._pairs():
            if aa == A and bb == B:
                fac = crp
            else:
                ww = (2.0 * zs - (aa + bb)) / (bb - aa)
                fac = 0.5 * (bb - aa) * np.sqrt(ww - 1.0) * np.sqrt(ww + 1.0)
            out = out * fac
        return out

    vm = integrate_family(cs.m_loops[0], rad, P2,
                          [("one", ("pow", n)) for n in range(3)], tol=1e-12)
    vc = integrate_family(cs.c_loops[0], rad, P2,
                          [("one", ("pow", n)) for n in range(3)], tol=1e-12)
    Ac, Bc = BPS_G2.upper[0], BPS_G2.upper[1]
    for n in range(3):
        up = -2 * cheb_arc_integral(lambda zz: zz ** n / R_west(zz), A, B)
        want = up - np.conj(up)
        assert abs(vm[n] - want) < 1e-9 * max(1.0, abs(want))
        up = -2 * cheb_arc_integral(lambda zz: zz ** n / rad(zz), Ac, Bc)
        want = up - np.conj(up)
        assert abs(vc[n] - want) < 1e-9 * max(1.0, abs(want))


# ---------------------------------------------------------------------------
# invariances
# ---------------------------------------------------------------------------

def test_deformation_invariance():
    rad = Radical(BPS_G2, 1.0)
    base = None
    for fac in (1.0, 1.05, 1.3, 1.5):
        cs = build_contour(BPS_G2, 2.0, d_small_factor=0.25 * fac,
                           d_hat_factor=0.45 * fac)
        items = [("f", ("pow", 0)), ("one", ("pow", 0))]
        vals = [integrate_family(cs.gamma_hat, rad, P2, [items[0]], tol=1e-12)[0],
                integrate_family(cs.c_loops[0], rad, P2, [items[1]], tol=1e-12)[0],
                integrate_family(cs.m_loops[0], rad, P2, [items[1]], tol=1e-12)[0]]
        if base is None:
            base = vals
        else:
            for v, b in zip(vals, base):
                assert abs(v - b) <= 1e-9 * max(1.0, abs(b))


def test_orientation_reversal_negates():
    cs = build_contour(BPS_G0, 2.0)
    rad = Radical(BPS_G0, 1.0)
    fwd = integrate_family(cs.gamma_hat, rad, P0, [("one", ("pow", 0))],
                           tol=1e-12)[0]
    rev = Loop(tuple(c.reversed() for c in cs.gamma_hat.components), "rev")
    bwd = integrate_family(rev, rad, P0, [("one", ("pow", 0))], tol=1e-12)[0]
    assert abs(fwd + bwd) < 1e-12


def test_zero_weight_gives_zero():
    cs = build_contour(BPS_G0, 2.0)
    rad = Radical(BPS_G0, 1.0)
    zero = lambda z, p: np.zeros_like(z)
    vals = integrate_family(cs.gamma_hat, rad, P0,
                            [(zero, ("pow", 0)), (zero, ("cauchy", 0.7 + 0.5j))],
                            tol=1e-12)
    assert np.max(np.abs(vals)) == 0.0


def test_pinched_f_weight_converges():
    cs = build_contour(BPS_G0, 2.0)
    rad = Radical(BPS_G0, 1.0)
    coarse = integrate_family(cs.gamma_hat, rad, P0, [("f", ("pow", 0))],
                              tol=1e-8)[0]
    fine = integrate_family(cs.gamma_hat, rad, P0, [("f", ("pow", 0))],
                            tol=1e-13)[0]
    assert abs(coarse - fine) < 1e-8


def test_tolerance_monotonicity():
    cs = build_contour(BPS_G0, 2.0)
    rad = Radical(BPS_G0, 1.0)
    want = hat_power_oracle(BPS_G0, 2)
    prev = np.inf
    for tol in (1e-6, 1e-8, 1e-10, 1e-12):
        got = integrate_family(cs.gamma_hat, rad, P0, [("one", ("pow", 2))],
                               tol=tol)[0]
        dev = abs(got - want)
        assert dev <= prev + 1e-15
        prev = dev


# ---------------------------------------------------------------------------
# batching and placement
# ---------------------------------------------------------------------------

def test_batch_matches_individual():
    cs = build_contour(BPS_G2, 2.0)
    rad = Radical(BPS_G2, 1.0)
    specs = [IntegralSpec(("hat", 0), ("pow", 0), "one"),
             IntegralSpec(("m", 1), ("pow", 1), "one"),
             IntegralSpec(("c", 1), ("pow", 0), "one"),
             IntegralSpec(("hat", 0), ("pow", 1), "f")]
    batch = integrate_specs(specs, cs, rad, P2, tol=1e-12)
    for spec, v in zip(specs, batch):
        single = integrate(spec, cs, rad, P2, tol=1e-12)
        assert abs(v - single) < 1e-13 * max(1.0, abs(single))


def test_empty_batch():
    cs = build_contour(BPS_G0, 2.0)
    rad = Radical(BPS_G0, 1.0)
    assert integrate_specs([], cs, rad, P0) == []


def test_cauchy_placement_enforced():
    cs = build_contour(BPS_G2, 2.0)
    rad = Radical(BPS_G2, 1.0)
    with pytest.raises(PlacementError):
        integrate(IntegralSpec(("hat", 0), ("cauchy", 10 + 10j), "one"),
                  cs, rad, P2)
    mid = complex(cs.main_arcs[1].upper[0].at(0.5))
    with pytest.raises(PlacementError):
        # inside m_hat_1, so not admissible for a gamma_hat cauchy spec
        integrate(IntegralSpec(("hat", 0), ("cauchy", mid), "one"),
                  cs, rad, P2)


def test_nonconvergence_reported():
    cs = build_contour(BPS_G0, 2.0)
    rad = Radical(BPS_G0, 1.0)
    with pytest.raises(QuadratureError) as exc:
        integrate_family(cs.gamma_hat, rad, P0, [("f", ("pow", 0))],
                         tol=1e-13, max_panels=40, max_rounds=3)
    assert exc.value.worst_panel is not None
    assert exc.value.error_estimate > 1e-13
