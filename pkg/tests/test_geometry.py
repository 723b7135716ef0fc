import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rhmod.errors import ContourError
from rhmod.geometry import (BranchpointSet, Radical, build_contour,
                            extend_gamma_inf, hausdorff_distance,
                            seg_point_distance)

BPS_G0 = BranchpointSet((1j,))
BPS_G2 = BranchpointSet((0.55 + 0.85j, 0.8 + 0.72j, 1.05 + 0.9j))


def test_branchpoint_validation():
    with pytest.raises(ValueError):
        BranchpointSet((1j, 2j))            # even count
    with pytest.raises(ValueError):
        BranchpointSet((1.0 + 0j,))         # on the axis
    with pytest.raises(ValueError):
        BranchpointSet((1j, 1j, 2j))        # duplicates
    assert BPS_G2.genus == 2 and BPS_G2.n_pairs == 1
    assert len(BPS_G2.all_points()) == 6


# ---------------------------------------------------------------------------
# radical
# ---------------------------------------------------------------------------

def test_radical_genus0_value():
    rad = Radical(BPS_G0, 1.0)
    assert abs(rad(3.0 + 0j) - (-np.sqrt(10.0))) < 1e-14


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_radical_square_identity(re, im):
    z = complex(re, im)
    rad = Radical(BPS_G2, 1.0)
    if any(seg_point_distance(s, z) < 0.05 for s in rad.cut_segments()):
        return
    prod = np.prod([z - a for a in BPS_G2.all_points()])
    R = complex(rad(z))
    assert abs(R * R - prod) <= 1e-12 * max(abs(prod), 1.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(0.2, 3))
def test_radical_schwarz(re, im):
    z = complex(re, im)
    rad = Radical(BPS_G2, 1.0)
    if any(seg_point_distance(s, z) < 0.05 or
           seg_point_distance(s, np.conj(z)) < 0.05
           for s in rad.cut_segments()):
        return
    assert abs(rad(np.conj(z)) - np.conj(rad(z))) < 1e-12


@pytest.mark.parametrize("bps,n", [(BPS_G0, 1), (BPS_G2, 3)])
def test_radical_normalization(bps, n):
    rad = Radical(bps, 1.0)
    for X in (1e3, 1e6):
        ratio = complex(rad(X + 0j)) / (-X ** n)
        assert abs(ratio - 1.0) < 5e-3 * (1e3 / X) + 1e-9


def test_radical_continuous_across_chord_but_jumps_on_bent_cut():
    # central pair cut runs along conj(a0) -> z0 -> a0; the vertical chord
    # between the same endpoints is not a cut thanks to the triangle flip
    bps = BranchpointSet((0.5 + 1.0j, 0.9 + 0.75j, 1.3 + 1.1j))
    rad = Radical(bps, 1.0)
    l, r = rad(0.5 - 1e-9 + 0.3j), rad(0.5 + 1e-9 + 0.3j)
    assert abs(l - r) < 1e-6
    mid = 0.5 * (1.0 + (0.5 + 1.0j))
    n = 1j * ((0.5 + 1.0j) - 1.0)
    n /= abs(n)
    jump = abs(rad(mid + 1e-9 * n) - rad(mid - 1e-9 * n))
    assert jump > abs(rad(mid + 1e-9 * n))  # sign flip across the cut


# ---------------------------------------------------------------------------
# contour construction
# ---------------------------------------------------------------------------

def test_genus0_minimal_contour():
    cs = build_contour(BPS_G0, 2.0)
    assert len(cs.gamma.segments) == 2
    assert cs.gamma.start == -1j and cs.gamma.end == 1j
    assert complex(cs.gamma.segments[0].at(1.0)) == 1.0 + 0j  # through z0
    assert len(cs.gamma_hat.components) == 1
    assert cs.m_loops == () and cs.c_loops == ()


def _set_dist(A, B):
    return float(np.max(np.min(np.abs(A[:, None] - B[None, :]), axis=1)))


def test_conjugation_symmetry_of_gamma():
    cs = build_contour(BPS_G2, 2.0)
    pts = cs.gamma.sample(32)
    assert _set_dist(pts, np.conj(pts)) < 1e-12


@pytest.mark.parametrize("mu", [1.0, 1.5, 2.0, 2.5, 3.0])
def test_windings(mu):
    cs = build_contour(BPS_G2, mu)
    for a in BPS_G2.upper:
        assert cs.gamma_hat.winding(a) == 1
        assert cs.gamma_hat.winding(np.conj(a)) == 1
    assert cs.gamma_hat.winding(10 + 10j) == 0
    for fam, loop in ((cs.main_arcs[1], cs.m_loops[0]),
                      (cs.comp_arcs[0], cs.c_loops[0])):
        for seg in fam.upper:
            assert loop.winding(complex(seg.at(0.5))) == 1


def test_sigma_tracking_closure():
    cs = build_contour(BPS_G2, 2.0)
    segs = list(cs.c_loops[0].components[0].segments)
    flips = sum(1 for a, b in zip(segs[:-1], segs[1:]) if a.sigma != b.sigma)
    assert flips % 2 == 0
    assert segs[0].sigma == segs[-1].sigma


def test_gamma_hat_touches_axis_only_at_z0():
    cs = build_contour(BPS_G2, 2.0)
    for comp in cs.gamma_hat.components:
        for s in comp.segments:
            pts = np.atleast_1d(s.at(np.linspace(0, 1, 33)))
            on_axis = pts[np.abs(pts.imag) < 1e-14]
            for z in on_axis:
                assert abs(z - cs.z0) < 1e-12


def test_hausdorff_under_mu_perturbation():
    cs1 = build_contour(BPS_G2, 2.0)
    cs2 = build_contour(BPS_G2, 2.001)
    assert hausdorff_distance(cs1.gamma, cs2.gamma) < 5e-3


def test_self_intersecting_seeds_rejected():
    bad = BranchpointSet((0.3 + 0.5j, 1.4 + 1.2j, 0.35 + 0.52j))
    with pytest.raises(ContourError):
        build_contour(bad, 2.0)


def test_left_halfplane_cut_collision_reported():
    # a contour from z0 > 0 to Re alpha < 0 cannot clear the [0, iT] cut of
    # f with this path family when mu < 2
    with pytest.raises(ContourError):
        build_contour(BranchpointSet((-0.4 + 0.3j,)), 1.0)


def test_extend_gamma_inf():
    cs = extend_gamma_inf(build_contour(BPS_G2, 2.0))
    assert cs.upper_tail is not None
    assert cs.upper_tail.start == BPS_G2.upper[-1]
    assert cs.upper_tail.end == complex(-1.0, 0.0)
    # conjugate symmetry of the tails
    lo = cs.lower_tail.sample(8)
    up = cs.upper_tail.sample(8)
    assert _set_dist(np.conj(up), lo) < 1e-12


def test_genus0_tail_structure():
    cs = extend_gamma_inf(build_contour(BPS_G0, 2.0))
    assert len(cs.main_arcs) == 1 and len(cs.comp_arcs) == 0
    assert cs.upper_tail.end == complex(-1.0, 0.0)


def test_contour_json_dump():
    import json
    cs = build_contour(BPS_G2, 2.0)
    obj = json.loads(cs.to_json())
    assert obj["genus"] == 2
    seg = obj["gamma"][0]
    assert set(seg) == {"kind", "endpoints", "samples"}
    assert seg["kind"] in ("line", "arc")


def test_comp_arc_waypoint_inserted_at_low_mu():
    # branchpoints straddling the imaginary axis force the detour over iT
    bps = BranchpointSet((0.52 + 0.13j, -0.26 + 0.75j, -0.58 + 0.36j))
    cs = build_contour(bps, 1.0)
    assert len(cs.comp_arcs[0].upper) == 2  # chord split by one waypoint
    w = cs.comp_arcs[0].upper[0].b
    from rhmod.scattering import eval_T
    assert w.real == 0.0 and w.imag > eval_T(1.0).imag
