"""Real parabolic cylinder functions and the gamma family in double precision.

D_nu(z) for real order |nu| <= 6 and z >= 0 is assembled from three pieces:

* ``z <= MACLAURIN_MAX``: the Maclaurin (confluent hypergeometric) series of
  Weber's equation, started from the closed-form values D_nu(0), D_nu'(0);
* ``z >= ASYMPTOTIC_MIN``: the large-z asymptotic series, truncated at its
  smallest term;
* in between: Taylor continuation of Weber's equation
  ``y'' = (z^2/4 - nu - 1/2) y`` started at ``ASYMPTOTIC_MIN`` and run towards
  smaller z.  D_nu is the growing solution in that direction, so the
  continuation is stable.

The switchover constants were chosen with ``scripts/pcf_switchover.py`` and are
pinned by ``tests/test_specfun.py``.
"""
from __future__ import annotations

import cmath
import math

from .errors import DomainError, PoleError

__all__ = [
    "ASYMPTOTIC_MIN",
    "MACLAURIN_MAX",
    "NU_MAX",
    "arg_gamma",
    "gamma_real",
    "log_gamma_complex",
    "pcf_d",
    "pcf_d_pair",
    "pcf_d_prime",
]

NU_MAX = 6.0
MACLAURIN_MAX = 1.0
ASYMPTOTIC_MIN = 12.0
_TAYLOR_STEP = 1.0
_EPS = 2.0**-53


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0 and x == math.floor(x)


def gamma_real(x: float) -> float:
    """Gamma function of a real argument (reflection handled by libm)."""
    x = float(x)
    if _is_nonpositive_integer(x):
        raise PoleError(f"gamma has a pole at x = {x:g}")
    return math.gamma(x)


def _rgamma(x: float) -> float:
    """1/Gamma(x), zero at the poles."""
    if _is_nonpositive_integer(x):
        return 0.0
    if abs(x) < 1e-300:
        return x  # 1/Gamma(x) = x + O(x^2); Gamma itself overflows here
    return 1.0 / math.gamma(x)


# Lanczos approximation, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _lanczos_log_gamma(z: complex) -> complex:
    # valid for Re z >= 1/2
    z = z - 1.0
    acc = complex(_LANCZOS_COEF[0])
    for k, c in enumerate(_LANCZOS_COEF[1:], start=1):
        acc += c / (z + k)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(acc)


def log_gamma_complex(z: complex) -> complex:
    """Principal branch of log Gamma(z).

    The branch is the analytic continuation of the real log-gamma from the
    positive axis, cut along the negative real axis.  For Re z < 1/2 the
    argument is shifted right with ``log G(z) = log G(z+m) - sum log(z+k)``,
    which keeps the imaginary part continuous off the cut.
    """
    z = complex(z)
    if z.imag == 0.0 and _is_nonpositive_integer(z.real):
        raise PoleError(f"log-gamma has a pole at z = {z.real:g}")
    if z.real >= 0.5:
        return _lanczos_log_gamma(z)
    m = math.ceil(0.5 - z.real)
    shift = 0j
    for k in range(m):
        shift += cmath.log(z + k)
    return _lanczos_log_gamma(z + m) - shift


def arg_gamma(z: complex) -> float:
    """Continuous argument of Gamma(z), i.e. Im log Gamma(z)."""
    return log_gamma_complex(z).imag


# --- parabolic cylinder function -------------------------------------------


def _check_domain(nu: float, z: float) -> None:
    if not (math.isfinite(nu) and math.isfinite(z)):
        raise DomainError("nu and z must be finite")
    if z < 0:
        raise DomainError(f"pcf_d needs z >= 0, got z = {z:g}")
    if abs(nu) > NU_MAX:
        raise DomainError(f"pcf_d is validated for |nu| <= {NU_MAX:g}, got nu = {nu:g}")


def _weber_taylor(nu: float, z0: float, y0: float, dy0: float, h: float) -> tuple[float, float]:
    """Advance (y, y') of y'' = (z^2/4 - nu - 1/2) y from z0 to z0 + h."""
    # y(z0 + t) = sum c_k t^k with
    # (k+2)(k+1) c_{k+2} = (z0^2/4 - nu - 1/2) c_k + (z0/2) c_{k-1} + c_{k-2}/4
    a = z0 * z0 / 4.0 - nu - 0.5
    b = z0 / 2.0
    c = [y0, dy0]
    y = y0 + dy0 * h
    dy = dy0
    quiet = 0
    for k in range(400):
        ckm1 = c[k - 1] if k >= 1 else 0.0
        ckm2 = c[k - 2] if k >= 2 else 0.0
        ck2 = (a * c[k] + b * ckm1 + 0.25 * ckm2) / ((k + 2) * (k + 1))
        c.append(ck2)
        dterm = (k + 2) * ck2 * h ** (k + 1)
        term = dterm * h / (k + 2)
        y += term
        dy += dterm
        # three consecutive negligible terms: the recurrence can skip a zero
        if abs(term) <= 1e-3 * _EPS * abs(y) and abs(dterm) <= 1e-3 * _EPS * (abs(dy) + abs(y)):
            quiet += 1
            if quiet == 3:
                return y, dy
        else:
            quiet = 0
    raise RuntimeError("Taylor continuation of Weber's equation did not converge")


def _maclaurin(nu: float, z: float) -> tuple[float, float]:
    # D_nu(0) = 2^{nu/2} sqrt(pi) / Gamma((1 - nu)/2)
    # D_nu'(0) = -2^{(nu+1)/2} sqrt(pi) / Gamma(-nu/2)
    sp = math.sqrt(math.pi)
    d0 = 2.0 ** (nu / 2.0) * sp * _rgamma((1.0 - nu) / 2.0)
    dp0 = -(2.0 ** ((nu + 1.0) / 2.0)) * sp * _rgamma(-nu / 2.0)
    if z == 0.0:
        return d0, dp0
    return _weber_taylor(nu, 0.0, d0, dp0, z)


def _asymptotic(nu: float, z: float) -> tuple[float, float]:
    # D_nu(z) ~ e^{-z^2/4} z^nu sum_s (-1)^s (-nu)_{2s} / (s! (2 z^2)^s)
    inv = 1.0 / (2.0 * z * z)
    term = 1.0
    total = 1.0
    dtotal = 0.0  # d/dz of the series
    s = 0
    prev = math.inf
    while True:
        nxt = -term * (2 * s - nu) * (2 * s + 1 - nu) * inv / (s + 1)
        if abs(nxt) >= abs(term) and s > 0:
            break  # past the smallest term
        s += 1
        term = nxt
        total += term
        dtotal += term * (-2.0 * s / z)
        if abs(term) <= _EPS * 1e-2 * abs(total):
            break
        if abs(term) >= prev:
            break
        prev = abs(term)
        if s > 500:
            break
    pref = math.exp(-z * z / 4.0) * z**nu
    d = pref * total
    dp = pref * ((nu / z - z / 2.0) * total + dtotal)
    return d, dp


def pcf_d_pair(nu: float, z: float) -> tuple[float, float]:
    """Return ``(D_nu(z), D_nu'(z))`` for real ``|nu| <= 6`` and ``z >= 0``."""
    nu = float(nu)
    z = float(z)
    _check_domain(nu, z)
    if z <= MACLAURIN_MAX:
        return _maclaurin(nu, z)
    if z >= ASYMPTOTIC_MIN:
        return _asymptotic(nu, z)
    zc = ASYMPTOTIC_MIN
    y, dy = _asymptotic(nu, zc)
    while zc - z > 1e-15:
        h = -min(_TAYLOR_STEP, zc - z)
        y, dy = _weber_taylor(nu, zc, y, dy, h)
        zc += h
    return y, dy


def pcf_d(nu: float, z: float) -> float:
    """Parabolic cylinder function D_nu(z) (Whittaker's notation).

    >>> round(pcf_d(0.0, 2.0), 12)
    0.367879441171
    """
    return pcf_d_pair(nu, z)[0]


def pcf_d_prime(nu: float, z: float) -> float:
    """Derivative D_nu'(z).

    Satisfies the recurrence ``D_nu'(z) = (z/2) D_nu(z) - D_{nu+1}(z)``; the
    value returned comes from the same evaluation path as ``pcf_d`` so that
    orders up to |nu| = 6 stay inside the validated range.
    """
    return pcf_d_pair(nu, z)[1]
