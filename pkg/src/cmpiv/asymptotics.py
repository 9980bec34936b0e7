"""Singular asymptotics of q(x; kappa) as x -> -infinity and its pole lattice.

Everything here is a function of the phase

    theta(x) = x^2/sqrt(3) - b ln(2 sqrt(3) x^2) + psi,

with ``b`` and ``psi`` taken from the connection constants.  Poles of the
leading term sit where ``2 cos theta + 1 = 0``, i.e. ``theta = 2 n pi +- 2 pi/3``.

The phase phi used in the steepest-descent construction is ``-theta`` (the
exponent nu_0 = -i b turns ``i nu_0 ln(.)`` into ``b ln(.)``), so the pole
equations written in phi and the ones below coincide; only the theta form is
implemented.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

from .connection import ConnectionData, Params, connection_constants
from .errors import NonConvergence
from .marker import POLE

__all__ = [
    "POLE",
    "Branch",
    "PhaseData",
    "phase_c",
    "phase_from_params",
    "pole_expansion",
    "pole_implicit",
    "predicted_poles",
    "q_asymptotic",
    "q_asymptotic_reciprocal",
    "theta",
    "theta_prime",
]

SQRT3 = math.sqrt(3.0)
POLE_PREFACTOR = math.sqrt(2.0 * math.pi) * 3.0**0.25
MARKER_TOL = 1e-12


class Branch(str, Enum):
    PLUS = "plus"
    MINUS = "minus"

    @property
    def sign(self) -> int:
        return 1 if self is Branch.PLUS else -1


@dataclass(frozen=True)
class PhaseData:
    b: float
    psi: float

    def __post_init__(self):
        if not (math.isfinite(self.b) and math.isfinite(self.psi)):
            raise ValueError("phase constants must be finite")

    @classmethod
    def from_connection(cls, data: ConnectionData) -> PhaseData:
        if data.b is None or data.psi is None:
            raise ValueError(f"no phase data outside the singular regime ({data.regime.value})")
        return cls(b=data.b, psi=data.psi)


def phase_from_params(params: Params) -> PhaseData:
    return PhaseData.from_connection(connection_constants(params))


def theta(x: float, phase: PhaseData) -> float:
    return x * x / SQRT3 - phase.b * math.log(2.0 * SQRT3 * x * x) + phase.psi


def theta_prime(x: float, phase: PhaseData) -> float:
    return 2.0 * x / SQRT3 - 2.0 * phase.b / x


def q_asymptotic(x: float, phase: PhaseData):
    """Leading singular asymptotics -2x/3 + 2x / (2 cos theta + 1).

    Evaluated as (4x/3)(1 - cos theta)/(2 cos theta + 1), the same expression
    without the cancellation near cos theta = 1.  Returns ``POLE`` when the
    denominator vanishes to 1e-12.
    """
    c = math.cos(theta(x, phase))
    den = 2.0 * c + 1.0
    if abs(den) < MARKER_TOL:
        return POLE
    return 4.0 * x / 3.0 * (1.0 - c) / den


def q_asymptotic_reciprocal(x: float, phase: PhaseData):
    """Leading term of x/q: (3/4)(2 cos theta + 1)/(1 - cos theta).

    Finite at the poles of q (where it vanishes); ``POLE`` where cos theta = 1.
    """
    c = math.cos(theta(x, phase))
    if abs(1.0 - c) < MARKER_TOL:
        return POLE
    return 0.75 * (2.0 * c + 1.0) / (1.0 - c)


def q_asymptotic_reciprocal_prime(x: float, phase: PhaseData) -> float:
    """d/dx of ``q_asymptotic_reciprocal``."""
    t = theta(x, phase)
    c = math.cos(t)
    # d/dc [(2c+1)/(1-c)] = 3/(1-c)^2
    return -0.75 * 3.0 / (1.0 - c) ** 2 * math.sin(t) * theta_prime(x, phase)


def phase_c(phi: float) -> complex:
    """c = -i sqrt(6) e^{i phi} / (2 + e^{i phi}) (only used for cross-checks)."""
    e = cmath.exp(1j * phi)
    return -1j * math.sqrt(6.0) * e / (2.0 + e)


def _target(n: int, branch: Branch) -> float:
    return 2.0 * math.pi * n + branch.sign * 2.0 * math.pi / 3.0


def _solve_theta(target: float, phase: PhaseData, x0: float, n_scale: float, maxiter: int = 50) -> float:
    """Safeguarded Newton for theta(x) = target on the negative axis."""
    tol = 1e-12 * max(1.0, abs(target))
    f = lambda x: theta(x, phase) - target  # noqa: E731
    # bracket around the b = 0 guess; theta increases as x decreases for large |x|
    lo, hi = x0 * (1.0 + 1.0 / n_scale), x0 * max(1.0 - 1.0 / n_scale, 1e-3)
    for _ in range(60):
        if f(lo) > 0 > f(hi):
            break
        lo, hi = lo * 1.5 - 0.5, hi * 0.5
        if hi > -1e-8:
            hi = -1e-8  # keep the log finite
    else:
        raise NonConvergence(f"no real negative root of theta = {target:g}")
    x = x0 if lo < x0 < hi else 0.5 * (lo + hi)
    for _ in range(maxiter):
        fx = f(x)
        if abs(fx) <= tol:
            return x
        if fx > 0:
            lo = x
        else:
            hi = x
        d = theta_prime(x, phase)
        xn = x - fx / d if d != 0 else math.nan
        if not (lo < xn < hi):
            xn = 0.5 * (lo + hi)  # bisection fallback
        if xn == x:
            return x
        x = xn
    raise NonConvergence(f"theta = {target:g} not solved in {maxiter} iterations")


def pole_implicit(n: int, branch: Branch | str, phase: PhaseData) -> float:
    """Root of theta(x) = 2 n pi +- 2 pi/3 on the negative axis (n >= 1)."""
    branch = Branch(branch)
    if n < 1:
        raise ValueError("pole index must be >= 1")
    target = _target(n, branch)
    x0 = -math.sqrt(SQRT3 * target)
    return _solve_theta(target, phase, x0, float(n))


def pole_expansion(n: int, branch: Branch | str, phase: PhaseData) -> float:
    """Large-n expansion of the pole location a_n^{+-} (three terms)."""
    branch = Branch(branch)
    if n < 1:
        raise ValueError("pole index must be >= 1")
    b, psi = phase.b, phase.psi
    rn = math.sqrt(n)
    bracket = (
        rn
        + b * math.log(n) / (4.0 * math.pi * rn)
        + (b * math.log(12.0 * math.pi) - psi + branch.sign * 2.0 * math.pi / 3.0) / (4.0 * math.pi * rn)
    )
    return -POLE_PREFACTOR * bracket


def predicted_poles(phase: PhaseData, x_lo: float, x_hi: float) -> list[tuple[int, Branch, float]]:
    """All roots of 2 cos theta + 1 = 0 in [x_lo, x_hi] (x_hi < 0), labelled (n, branch).

    Only the part of the axis where theta is monotone is searched; for b > 0
    that excludes |x| < (sqrt(3) b)^{1/2}.
    """
    if not x_lo < x_hi < 0:
        raise ValueError("need x_lo < x_hi < 0")
    edge = -math.sqrt(SQRT3 * max(phase.b, 0.0))
    hi = min(x_hi, edge - 1e-9) if phase.b > 0 else x_hi
    if hi <= x_lo:
        return []
    t_min, t_max = theta(hi, phase), theta(x_lo, phase)
    out = []
    n_lo = math.floor((t_min - 2.0 * math.pi / 3.0) / (2.0 * math.pi)) - 1
    n_hi = math.ceil((t_max + 2.0 * math.pi / 3.0) / (2.0 * math.pi)) + 1
    for n in range(n_lo, n_hi + 1):
        for br in (Branch.MINUS, Branch.PLUS):
            tgt = _target(n, br)
            if not t_min <= tgt <= t_max:
                continue
            x = _bisect_theta(tgt, phase, x_lo, hi)
            out.append((n, br, x))
    out.sort(key=lambda r: -r[2])
    return out


def _bisect_theta(target: float, phase: PhaseData, lo: float, hi: float) -> float:
    # theta is decreasing in x on [lo, hi]; Newton polish after a short bisection
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if theta(mid, phase) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13 * max(1.0, abs(mid)):
            break
    return 0.5 * (lo + hi)
