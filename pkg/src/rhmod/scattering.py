"""Scattering function family f, f', f_mu with exact branch-cut semantics.

For Im z >= 0 the function is

    f(z) = (mu/2 - z)[i pi/2 + log(mu/2 - z)]
         + (z+T)/2 log(z+T) + (z-T)/2 log(z-T) - T atanh(2T/mu)
         - x z - 2 t z^2 + (mu/2) log 2,

with T = sqrt(mu^2/4 - 1), Im T >= 0, and the lower half-plane defined by
Schwarz reflection f(z) = conj(f(conj z)).  Each logarithm carries its own
cut, normalized so that boundary values on the real axis are the limits from
above:

  * log(mu/2 - z): cut on z in [mu/2, +inf), principal in w = mu/2 - z with
    arg = -pi on the ray (limit from Im z = 0+).
  * log(z + T): cut z in (-inf, -T] (mu >= 2) resp. [-i tau, 0] then
    (-inf, 0] (mu < 2, T = i tau); for Im z >= 0 the argument never leaves
    the closed upper half plane of w, so the principal branch applies.
  * log(z - T): cut z in [T, +inf) (mu >= 2) resp. [i tau, 0] then [0, +inf)
    (mu < 2); west of the vertical cut segment the argument continues past
    pi, which shows up as a +2 pi adjustment where Re z < 0 and Im(z-T) < 0.

Within |T| < DELTA_T the T-paired terms are evaluated by their even-power
series in T (they are analytic in T^2, hence in mu across mu = 2); the direct
formula loses about |T|^-1 digits there.

All evaluations on the real axis must carry an explicit Side tag; the values
from below are the complex conjugates of the values from above.
"""

from __future__ import annotations

import numpy as np

from .errors import CutContactError, SingularPointError
from .params import ProblemParams, Side

# Switch radius for the even-power series in T; |T| < 1e-3 means
# |mu - 2| < ~5e-7.  Series truncated at T^10.
DELTA_T = 1e-3
_LN2 = float(np.log(2.0))


def eval_T(mu: float) -> complex:
    """T(mu) = sqrt(mu^2/4 - 1) with Im T >= 0 (real for mu >= 2)."""
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu}")
    rad = 0.25 * mu * mu - 1.0
    if rad >= 0.0:
        return complex(np.sqrt(rad), 0.0)
    return complex(0.0, np.sqrt(-rad))


# ---------------------------------------------------------------------------
# branch-resolved logarithms for Im z >= 0, boundary values from above
# ---------------------------------------------------------------------------

def _log_mu_half_minus_z(z, mu):
    """log(mu/2 - z), cut z in [mu/2, inf); arg -> -pi on the cut from above."""
    w = 0.5 * mu - z
    theta = np.angle(w)
    # the limit Im z -> 0+ approaches the negative w-axis from below
    theta = np.where((w.imag == 0.0) & (w.real < 0.0), -np.pi, theta)
    return np.log(np.abs(w)) + 1j * theta


def _log_plus(z, mu, T):
    """log(z + T); for Im z >= 0 the principal branch is correct."""
    w = z + T
    # on the negative real w-axis np.angle may give -pi for imag=-0.0
    theta = np.angle(w)
    theta = np.where((w.imag == 0.0) & (w.real < 0.0), np.pi, theta)
    return np.log(np.abs(w)) + 1j * theta


def _log_minus(z, mu, T):
    """log(z - T) with the cut through 0; +2 pi west of the vertical segment."""
    w = z - T
    theta = np.angle(w)
    theta = np.where((w.imag == 0.0) & (w.real < 0.0), np.pi, theta)
    if T.imag > 0.0:
        theta = np.where((np.real(z) < 0.0) & (w.imag < 0.0), theta + 2.0 * np.pi, theta)
    return np.log(np.abs(w)) + 1j * theta


def _log_z_above(z):
    """Limit branch of log z as T -> 0: principal, arg = +pi on (-inf, 0)."""
    theta = np.angle(z)
    theta = np.where((np.imag(z) == 0.0) & (np.real(z) < 0.0), np.pi, theta)
    return np.log(np.abs(z)) + 1j * theta


def _atanh(w):
    """atanh(w) = [log(1+w) - log(1-w)] / 2, principal cuts."""
    return 0.5 * (np.log(1.0 + w) - np.log(1.0 - w))


# ---------------------------------------------------------------------------
# upper-half-plane evaluations (vectorized, no validation)
# ---------------------------------------------------------------------------

def _f_upper(z, p: ProblemParams):
    """f on Im z >= 0 (boundary values from above)."""
    mu = p.mu
    z = np.asarray(z, dtype=complex)
    T = eval_T(mu)
    term1 = (0.5 * mu - z) * (0.5j * np.pi + _log_mu_half_minus_z(z, mu))
    if abs(T) >= DELTA_T:
        lp = _log_plus(z, mu, T)
        lm = _log_minus(z, mu, T)
        tpart = 0.5 * (z + T) * lp + 0.5 * (z - T) * lm - T * _atanh(2.0 * T / mu)
    else:
        # even series: z log z + sum_m T^{2m} [ z^{1-2m}/(2m(2m-1)) - (2/mu)^{2m-1}/(2m-1) ]
        tpart = z * _log_z_above(z)
        T2 = T * T
        Tp = T2
        for m in range(1, 6):
            k = 2 * m
            tpart = tpart + Tp * (z ** (1 - k) / (k * (k - 1))
                                  - (2.0 / mu) ** (k - 1) / (k - 1))
            Tp = Tp * T2
    return term1 + tpart - p.x * z - 2.0 * p.t * z * z + 0.5 * mu * _LN2


def _f_prime_upper(z, p: ProblemParams):
    """f'(z) = -i pi/2 - log(mu/2 - z) + [log(z+T) + log(z-T)]/2 - x - 4 t z."""
    mu = p.mu
    z = np.asarray(z, dtype=complex)
    T = eval_T(mu)
    return (-0.5j * np.pi - _log_mu_half_minus_z(z, mu)
            + 0.5 * (_log_plus(z, mu, T) + _log_minus(z, mu, T))
            - p.x - 4.0 * p.t * z)


def _f_mu_upper(z, mu: float):
    """mu-derivative of f on Im z >= 0.

    Note: d/dmu of the (mu/2) log 2 term is (log 2)/2.  The removable 0/0 at
    T = 0 is handled by the same even series as f.
    """
    z = np.asarray(z, dtype=complex)
    T = eval_T(mu)
    head = 0.25j * np.pi + 0.5 * _log_mu_half_minus_z(z, mu) + 0.5 * _LN2
    if abs(T) >= DELTA_T:
        br = (_log_plus(z, mu, T) - _log_minus(z, mu, T)
              - 2.0 * _atanh(2.0 * T / mu))
        return head + mu / (8.0 * T) * br
    tail = np.zeros_like(z)
    T2 = T * T
    Tp = 1.0 + 0j
    for k in range(0, 5):
        n = 2 * k + 1
        tail = tail + (mu / (4.0 * n)) * Tp * (z ** (-n) - (2.0 / mu) ** n)
        Tp = Tp * T2
    return head + tail


# ---------------------------------------------------------------------------
# mixed half-plane array evaluation (internal; Im z == 0 treated from above)
# ---------------------------------------------------------------------------

def _schwarz_pair(upper_fn, z, *args):
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape, dtype=complex)
    lo = z.imag < 0.0
    hi = ~lo
    if np.any(hi):
        out[hi] = upper_fn(z[hi], *args)
    if np.any(lo):
        out[lo] = np.conj(upper_fn(np.conj(z[lo]), *args))
    return out


def f_values(z, p: ProblemParams):
    """Vectorized f over any z off the cuts (Schwarz reflected below axis)."""
    return _schwarz_pair(_f_upper, z, p)


def f_prime_values(z, p: ProblemParams):
    return _schwarz_pair(_f_prime_upper, z, p)


def f_mu_values(z, mu: float):
    return _schwarz_pair(_f_mu_upper, z, mu)


# ---------------------------------------------------------------------------
# tagged scalar API
# ---------------------------------------------------------------------------

def _validate(z: complex, tag: Side, mu: float):
    z = complex(z)
    if tag is None:
        raise CutContactError("evaluation requires a half-plane tag")
    if z.imag > 0 and tag is not Side.UPPER:
        raise CutContactError(f"Im z > 0 requires Side.UPPER, got {tag}")
    if z.imag < 0 and tag is not Side.LOWER:
        raise CutContactError(f"Im z < 0 requires Side.LOWER, got {tag}")
    if z.imag == 0 and tag not in (Side.REAL_ABOVE, Side.REAL_BELOW):
        raise CutContactError("real z requires an explicit real-axis side tag")
    if z == 0.5 * mu:
        raise SingularPointError("z = mu/2 is the z*log z singular point of f")
    T = eval_T(mu)
    if z == T or z == -T:
        raise CutContactError("z is a branch point of f (z = +-T)")
    if T.imag > 0 and z.real == 0.0 and abs(z.imag) < T.imag and z.imag != 0.0:
        raise CutContactError("z lies on the vertical branch cut [0, T] or its mirror")
    return z


def eval_f(z: complex, tag: Side, p: ProblemParams) -> complex:
    """f(z) on the tagged side; Schwarz reflection below the axis."""
    z = _validate(z, tag, p.mu)
    if tag in (Side.UPPER, Side.REAL_ABOVE):
        return complex(_f_upper(np.asarray([z]), p)[0])
    return complex(np.conj(_f_upper(np.asarray([np.conj(z)]), p)[0]))


def eval_f_prime(z: complex, tag: Side, p: ProblemParams) -> complex:
    z = _validate(z, tag, p.mu)
    if tag in (Side.UPPER, Side.REAL_ABOVE):
        return complex(_f_prime_upper(np.asarray([z]), p)[0])
    return complex(np.conj(_f_prime_upper(np.asarray([np.conj(z)]), p)[0]))


def eval_f_mu(z: complex, tag: Side, mu: float) -> complex:
    z = _validate(z, tag, mu)
    if tag in (Side.UPPER, Side.REAL_ABOVE):
        return complex(_f_mu_upper(np.asarray([z]), mu)[0])
    return complex(np.conj(_f_mu_upper(np.asarray([np.conj(z)]), mu)[0]))


def im_f_real_axis(z, mu: float):
    """Piecewise-linear Im f(z + i0) on the real axis.

    Equals (pi/2)(mu/2 - |z|) left of mu/2 and (pi/2)(z - mu/2) to the right.
    For mu > 2 the formula is the relevant one on |z| > T (in particular on
    the pushed semi-infinite arcs |z| > mu/2); on the gap (-T, T) the actual
    boundary value is the constant (pi/2)(mu/2 - T).
    """
    z = np.asarray(z, dtype=float)
    out = np.where(z < 0.5 * mu,
                   0.5 * np.pi * (0.5 * mu - np.abs(z)),
                   0.5 * np.pi * (z - 0.5 * mu))
    if out.ndim == 0:
        return float(out)
    return out
