import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rhmod.errors import CutContactError, SingularPointError
from rhmod.params import ProblemParams, Side
from rhmod.scattering import (eval_T, eval_f, eval_f_mu, eval_f_prime,
                              im_f_real_axis)

P = ProblemParams(x=0.7, t=0.4, mu=2.0, genus=0)


def params(mu, x=0.7, t=0.4):
    return ProblemParams(x=x, t=t, mu=mu, genus=0)


# ---------------------------------------------------------------------------
# T
# ---------------------------------------------------------------------------

def test_T_values():
    assert eval_T(2.0) == 0.0
    assert abs(eval_T(2.0 * np.sqrt(2.0)) - 1.0) < 1e-15
    assert abs(eval_T(1.0) - 0.5j * np.sqrt(3.0)) < 1e-15


@given(st.floats(0.05, 6.0))
def test_T_branch(mu):
    T = eval_T(mu)
    assert T.imag >= 0.0
    if mu >= 2.0:
        assert T.imag == 0.0 and T.real >= 0.0
    else:
        assert T.real == 0.0 and T.imag > 0.0


# ---------------------------------------------------------------------------
# f on the real axis
# ---------------------------------------------------------------------------

def test_im_f_piecewise_values():
    assert abs(im_f_real_axis(0.0, 2.0) - np.pi / 2) < 1e-15
    assert im_f_real_axis(1.0, 2.0) == 0.0
    assert abs(im_f_real_axis(-3.0, 2.0) + np.pi) < 1e-15


def test_im_f_at_3_is_pi():
    # the -xz - 2tz^2 part is real on the real axis and drops from Im f
    v = eval_f(3.0 + 0j, Side.REAL_ABOVE, P)
    assert abs(v.imag - np.pi) < 1e-13


def test_im_f_zero_at_half_mu_limit():
    v = eval_f(P.z0 + 1e-13 + 0j, Side.REAL_ABOVE, P)
    assert abs(v.imag) < 1e-11


@pytest.mark.parametrize("mu", [1.3, 2.0])
def test_real_axis_matches_piecewise(mu):
    p = params(mu)
    xs = np.linspace(-3.0, 3.0, 101)
    for x in xs:
        if abs(x) < 1e-9 or abs(x - mu / 2) < 1e-9:
            continue
        v = eval_f(complex(x), Side.REAL_ABOVE, p)
        assert abs(v.imag - im_f_real_axis(x, mu)) < 1e-12


def test_real_axis_matches_piecewise_outside_gap_mu_gt_2():
    mu = 2.7
    p = params(mu)
    T = eval_T(mu).real
    for x in np.concatenate([np.linspace(-3, -T - 0.05, 40),
                             np.linspace(T + 0.05, 3, 40)]):
        if abs(x - mu / 2) < 1e-9:
            continue
        v = eval_f(complex(x), Side.REAL_ABOVE, p)
        assert abs(v.imag - im_f_real_axis(x, mu)) < 1e-12


def test_gap_boundary_value_constant_for_mu_gt_2():
    # inside (-T, T) the boundary value is the constant (pi/2)(mu/2 - T)
    mu = 2.7
    p = params(mu)
    T = eval_T(mu).real
    want = 0.5 * np.pi * (0.5 * mu - T)
    for x in np.linspace(-T + 0.05, T - 0.05, 15):
        v = eval_f(complex(x), Side.REAL_ABOVE, p)
        assert abs(v.imag - want) < 1e-12


# ---------------------------------------------------------------------------
# Schwarz symmetry
# ---------------------------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(st.floats(0.3, 4.0), st.floats(-2.0, 2.0), st.floats(0.1, 2.0))
def test_schwarz_symmetry(mu, re, im):
    z = complex(re, im)
    if abs(z.real) < 0.05:
        z += 0.1
    p = params(mu)
    assert abs(eval_f(np.conj(z), Side.LOWER, p)
               - np.conj(eval_f(z, Side.UPPER, p))) < 1e-13
    assert abs(eval_f_prime(np.conj(z), Side.LOWER, p)
               - np.conj(eval_f_prime(z, Side.UPPER, p))) < 1e-13
    assert abs(eval_f_mu(np.conj(z), Side.LOWER, mu)
               - np.conj(eval_f_mu(z, Side.UPPER, mu))) < 1e-13


def test_real_below_is_conjugate_of_above():
    v_up = eval_f(0.4 + 0j, Side.REAL_ABOVE, P)
    v_dn = eval_f(0.4 + 0j, Side.REAL_BELOW, P)
    assert abs(v_dn - np.conj(v_up)) < 1e-15


# ---------------------------------------------------------------------------
# derivatives vs finite differences
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("z", [0.8 + 0.9j, -0.5 + 1.3j, 1.2 - 0.7j])
def test_f_prime_fd(z):
    p = params(1.7, x=0.3, t=0.15)
    tag = Side.UPPER if z.imag > 0 else Side.LOWER
    errs = []
    for d in (1e-4, 1e-5):
        fd = (eval_f(z + d, tag, p) - eval_f(z - d, tag, p)) / (2 * d)
        errs.append(abs(fd - eval_f_prime(z, tag, p)))
    assert errs[0] < 5e-8
    assert errs[1] < 5e-10


def test_f_prime_frozen_value():
    # independent 50-digit evaluation of the closed form at z=i, mu=2, x=t=0:
    # -i pi/2 - log(mu/2 - z) + log(z^2 - mu^2/4 + 1)/2 with the upper-plane
    # branch log(z - T) + log(z + T) = 2 log(i) = i pi at T = 0
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 50
    i = mp.mpc(0, 1)
    want = -i * mp.pi / 2 - mp.log(1 - i) + 2 * mp.log(i) / 2
    got = eval_f_prime(1j, Side.UPPER, params(2.0, x=0.0, t=0.0))
    assert abs(got - complex(want)) < 1e-14


def test_im_f_prime_on_inner_segment():
    # Im f'(x + i0) = -pi/2 on 0 < x < mu/2 (this is the mu <= 2 display)
    p = params(2.0)
    for x in (0.2, 0.6, 0.9):
        v = eval_f_prime(complex(x), Side.REAL_ABOVE, p)
        assert abs(v.imag + np.pi / 2) < 1e-13


@pytest.mark.parametrize("mu", [1.5, 2.3])
def test_f_mu_fd(mu):
    z = 1 + 1j
    errs = []
    for d in (1e-4, 1e-5):
        fd = (eval_f(z, Side.UPPER, params(mu + d, x=0.3, t=0.15))
              - eval_f(z, Side.UPPER, params(mu - d, x=0.3, t=0.15))) / (2 * d)
        errs.append(abs(fd - eval_f_mu(z, Side.UPPER, mu)))
    assert errs[0] < 5e-8
    assert errs[1] < 5e-10


def test_f_mu_limit_at_2():
    # closed-form limit (derivative-consistent constant (log 2)/2; the FD
    # oracle above pins it against the printed display's full log 2)
    z = 2j
    want = (0.25j * np.pi + 0.5 * np.log(1 - z) + 0.5 * np.log(2.0)
            + 1 / (2 * z) - 0.5)
    got = eval_f_mu(z, Side.UPPER, 2.0)
    assert abs(got - want) < 1e-13


def test_mu_continuity_across_2():
    # even-power series property: no discontinuity through mu = 2, probed by
    # second differences of a fixed-z sample
    z = 1 + 1j
    p0 = params(2.0, x=0.3, t=0.15)
    mus = np.linspace(2 - 1e-3, 2 + 1e-3, 201)
    vals = np.array([eval_f(z, Side.UPPER, p0.with_mu(m)) for m in mus])
    second = np.abs(vals[2:] - 2 * vals[1:-1] + vals[:-2])
    assert second.max() < 1e-8


def test_series_direct_seam_agreement():
    # both evaluation paths exist just outside the switch radius
    from rhmod.scattering import DELTA_T, _f_upper, _f_mu_upper
    for sgn in (+1, -1):
        mu = 2.0 + sgn * 4.2 * DELTA_T ** 2 / 4.0  # |T| slightly above DELTA_T
        assert abs(eval_T(mu)) > DELTA_T
        p = params(mu)
        z = np.array([1 + 1j, -0.7 + 0.4j, 0.3 + 2j])
        direct = _f_upper(z, p)
        import rhmod.scattering as sc
        old = sc.DELTA_T
        try:
            sc.DELTA_T = 10 * abs(eval_T(mu))
            series = _f_upper(z, p)
        finally:
            sc.DELTA_T = old
        assert np.max(np.abs(direct - series)) < 1e-10


# ---------------------------------------------------------------------------
# error contracts
# ---------------------------------------------------------------------------

def test_untagged_real_rejected():
    with pytest.raises(CutContactError):
        eval_f(0.3 + 0j, Side.UPPER, P)


def test_singularity_rejected():
    with pytest.raises(SingularPointError):
        eval_f(complex(P.z0), Side.REAL_ABOVE, P)


def test_vertical_cut_rejected():
    mu = 1.2
    tau = eval_T(mu).imag
    with pytest.raises(CutContactError):
        eval_f(0.5j * tau, Side.UPPER, params(mu))


def test_wrong_tag_rejected():
    with pytest.raises(CutContactError):
        eval_f(1 + 1j, Side.LOWER, P)
