"""Connection constants, regime classification and Stokes data.

Maps the boundary amplitude kappa of ``q(x) ~ kappa D^2_{alpha-1/2}(sqrt(2) x)``
at +infinity to the composite Stokes multiplier rho = s*, the threshold
kappa*, and (in the singular regime) the phase constants b and psi used by
the x -> -infinity asymptotics.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

from .errors import InvalidParameters, NotSingularRegime, SeparatrixError
from .specfun import arg_gamma, gamma_real

__all__ = [
    "ConnectionData",
    "Params",
    "Regime",
    "StokesRep",
    "StokesReport",
    "classify",
    "connection_constants",
    "kappa_star",
    "rho_from_kappa",
    "stokes_representative",
    "verify_stokes",
]

HALF_INTEGER_GAP = 1e-9
SEPARATRIX_RTOL = 1e-12
RHO_UNIT_TOL = 1e-12


class Regime(str, Enum):
    BOUNDED_OSCILLATORY = "bounded-oscillatory"
    SEPARATRIX = "separatrix"
    SINGULAR = "singular"


@dataclass(frozen=True)
class Params:
    """PIV parameters with beta fixed to zero.

    ``alpha - 1/2`` must stay at least 1e-9 away from the integers.
    """

    alpha: float
    kappa: float

    def __post_init__(self):
        a = float(self.alpha)
        k = float(self.kappa)
        if not (math.isfinite(a) and math.isfinite(k)):
            raise InvalidParameters("alpha and kappa must be finite")
        shifted = a - 0.5
        if abs(shifted - round(shifted)) < HALF_INTEGER_GAP:
            raise InvalidParameters(
                f"alpha = {a:g}: the singular asymptotics require alpha - 1/2 not an integer"
            )
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "kappa", k)

    @property
    def nu(self) -> float:
        """Order of the parabolic cylinder function in the boundary data."""
        return self.alpha - 0.5


def kappa_star(alpha: float) -> float:
    """Threshold 1 / (sqrt(pi) Gamma(alpha + 1/2)); negative when the gamma is."""
    return 1.0 / (math.sqrt(math.pi) * gamma_real(alpha + 0.5))


def rho_from_kappa(params: Params) -> complex:
    """rho = 1 - 2 pi^{3/2} kappa / (e^{i pi alpha} Gamma(1/2 - alpha))."""
    g = gamma_real(0.5 - params.alpha)
    return 1.0 - 2.0 * math.pi**1.5 * params.kappa * cmath.exp(-1j * math.pi * params.alpha) / g


def classify(params: Params) -> Regime:
    ks = kappa_star(params.alpha)
    k = params.kappa
    if abs(k - ks) <= SEPARATRIX_RTOL * max(1.0, abs(ks)):
        return Regime.SEPARATRIX
    if k == 0.0 or k * (k - ks) < 0:
        return Regime.BOUNDED_OSCILLATORY
    return Regime.SINGULAR


@dataclass(frozen=True)
class ConnectionData:
    kappa_star: float
    rho: complex
    regime: Regime
    b: float | None = None
    psi: float | None = None

    def to_dict(self) -> dict:
        return {
            "kappa_star": self.kappa_star,
            "rho_re": self.rho.real,
            "rho_im": self.rho.imag,
            "abs_rho": abs(self.rho),
            "b": self.b,
            "psi": self.psi,
            "regime": self.regime.value,
        }


def _principal_arg(w: complex) -> float:
    # (-pi, pi]; the negative real axis (either zero sign) maps to +pi
    if w.imag == 0.0 and w.real < 0:
        return math.pi
    return cmath.phase(w)


def connection_constants(params: Params, strict: bool = True) -> ConnectionData:
    """Compute kappa*, rho, the regime and, when singular, b and psi.

    With ``strict`` (the default) non-singular parameters raise
    ``SeparatrixError`` / ``NotSingularRegime``; otherwise the data is returned
    with ``b`` and ``psi`` left as ``None``.
    """
    ks = kappa_star(params.alpha)
    rho = rho_from_kappa(params)
    regime = classify(params)
    if regime is Regime.SINGULAR and abs(abs(rho) - 1.0) <= RHO_UNIT_TOL:
        regime = Regime.SEPARATRIX
    if regime is not Regime.SINGULAR:
        if strict:
            if regime is Regime.SEPARATRIX:
                raise SeparatrixError(
                    f"|rho| = 1 at alpha={params.alpha:g}, kappa={params.kappa:g}: b is undefined"
                )
            raise NotSingularRegime(
                f"kappa (kappa - kappa*) <= 0 at alpha={params.alpha:g}, kappa={params.kappa:g}"
            )
        return ConnectionData(kappa_star=ks, rho=rho, regime=regime)
    b = -math.log(abs(rho) ** 2 - 1.0) / (2.0 * math.pi)
    psi = -2.0 * math.pi * params.alpha / 3.0 - arg_gamma(complex(0.5, -b)) - _principal_arg(rho)
    return ConnectionData(kappa_star=ks, rho=rho, regime=regime, b=b, psi=psi)


# --- Stokes multipliers -----------------------------------------------------


@dataclass(frozen=True)
class StokesRep:
    s0: complex
    s1: complex
    s2: complex
    s3: complex
    s_star: complex


def stokes_representative(params: Params) -> StokesRep:
    """Canonical multipliers: s1 = e^{-i pi alpha}, s3 = -s1, s2 = 0, s0 real."""
    a = params.alpha
    s1 = cmath.exp(-1j * math.pi * a)
    # (s* - 1) e^{i pi alpha}, written in its manifestly real form
    s0 = -2.0 * math.pi**1.5 * params.kappa / gamma_real(0.5 - a)
    return StokesRep(s0=complex(s0), s1=s1, s2=0j, s3=-s1, s_star=1.0 + s0 * s1)


@dataclass(frozen=True)
class StokesReport:
    residuals: dict[str, float]
    tol: float

    @property
    def failures(self) -> list[str]:
        return [k for k, v in self.residuals.items() if not v <= self.tol]

    @property
    def ok(self) -> bool:
        return not self.failures


def _cyclic_residual(rep: StokesRep, alpha: float, s4: complex) -> float:
    s1, s2, s3 = rep.s1, rep.s2, rep.s3
    e_m = cmath.exp(-1j * math.pi * alpha)
    e_p = cmath.exp(1j * math.pi * alpha)
    lhs = ((1 + s1 * s2) * (1 + s3 * s4) + s1 * s4) * e_m - (1 + s2 * s3) * e_p
    return abs(lhs + 2j * math.sin(math.pi * alpha))


def verify_stokes(rep: StokesRep, alpha: float, tol: float = 1e-12) -> StokesReport:
    """Residuals of every constraint the multipliers of a Clarkson-McLeod
    solution must satisfy (beta = 0).

    The cyclic relation involves s4, which is not part of the representative;
    once s2 = 0 and s3 = -s1 it drops out, so it is evaluated at s4 = 0 and
    s4 = 1 and the larger residual is reported.
    """
    e2 = cmath.exp(2j * math.pi * alpha)
    res = {
        "s2_zero": abs(rep.s2),
        "s1_plus_s3": abs(rep.s1 + rep.s3),
        "s_star_definition": abs(rep.s_star - (1 + rep.s0 * rep.s1)),
        "s0_real": abs(rep.s0.imag),
        "reality_s1_s3": abs(rep.s1.conjugate() + rep.s3 * e2),
        "one_minus_s_star_real": abs(((1 - rep.s_star) * cmath.exp(1j * math.pi * alpha)).imag)
        / max(1.0, abs(1 - rep.s_star)),
        "cyclic": max(_cyclic_residual(rep, alpha, 0j), _cyclic_residual(rep, alpha, 1 + 0j)),
    }
    return StokesReport(residuals=res, tol=tol)
