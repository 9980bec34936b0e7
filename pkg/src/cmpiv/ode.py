"""Backward integration of PIV (beta = 0) through the negative-axis pole field.

The equation

    q'' = q'^2/(2q) + (3/2) q^3 + 4 x q^2 + (2 x^2 - 4 alpha) q

is singular wherever q vanishes, and q of a Clarkson-McLeod solution has
near-double zeros as well as simple poles with residue +-1.  Integrating it
literally (``rhs_direct``) or in u = 1/q (``rhs_reciprocal``) works on clean
stretches but loses accuracy at those points, so ``integrate`` runs three
regular charts instead:

* ``v``: q = sigma v^2 with a fixed sign sigma,
  ``v'' = (3/4) v^5 + 2 sigma x v^3 + (x^2 - 2 alpha) v``; regular through the
  zeros of q.
* ``A`` (residue +1 poles): u = 1/q together with r = q (p q - nu),
  ``u' = 1 + 2 x u - 4 u^2 m``, ``r' = r (4 u m - 2 x) + 2 m^2``,
  ``m = nu + u r``.
* ``B`` (residue -1 poles): U = -1/q together with R = -q (M - nu - 1),
  ``U' = 1 - 2 x U - 4 U^2 M``, ``R' = R (2 x + 4 U M) + 2 M^2``,
  ``M = nu + 1 + U R``.

Here nu = alpha - 1/2 and p = (q' + q^2 + 2 x q)/(4 q) is the conjugate
variable of the Hamiltonian form ``q' = 4 q p - q^2 - 2 x q``,
``p' = -2 p^2 + 2 q p + 2 x p - nu``.  A and B are polynomial systems, so a
pole of q is just a simple zero of u or U.

Samples are reported in the two public charts: Direct (q, q') and Reciprocal
(u, u') with u = 1/q.
"""
from __future__ import annotations

import bisect
import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.integrate import DOP853
from scipy.optimize import brentq

from .connection import Params
from .errors import DomainError, InvalidParameters, SingularBreakdown, StepFailure, UnderflowError
from .marker import POLE
from .specfun import pcf_d_pair

__all__ = [
    "Chart",
    "ChartState",
    "OdeSettings",
    "PoleMethod",
    "PoleRecord",
    "Trajectory",
    "evaluate",
    "evaluate_reciprocal",
    "integrate",
    "poles_to_tsv",
    "rhs_direct",
    "rhs_reciprocal",
    "seed_boundary",
    "trajectory_to_dict",
    "trajectory_to_json",
    "trajectory_to_tsv",
]

log = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)
HYSTERESIS = 1.5
# a reciprocal chart is swapped for its partner when q has the wrong sign for
# the next pole and |q| is below this (|u| above its inverse)
SWAP_Q = 50.0
UNDERFLOW = 1e-250
_FD_STEP = 1e-5


@dataclass(frozen=True)
class OdeSettings:
    rtol: float = 1e-11
    atol: float = 1e-13
    x_start: float = 6.0
    chart_switch_q: float = 10.0
    max_step: float = 0.1
    pole_refine_tol: float = 1e-11

    def __post_init__(self):
        if not 1e-13 <= self.rtol <= 1e-6:
            raise InvalidParameters(f"rtol must lie in [1e-13, 1e-6], got {self.rtol:g}")
        if not self.atol > 0:
            raise InvalidParameters("atol must be positive")
        if not 4.0 <= self.x_start <= 8.0:
            raise InvalidParameters(f"x_start must lie in [4, 8], got {self.x_start:g}")
        if not self.chart_switch_q > 1.0:
            raise InvalidParameters("chart_switch_q must exceed 1")
        if not self.max_step > 0:
            raise InvalidParameters("max_step must be positive")
        if not 0 < self.pole_refine_tol <= 1e-9:
            raise InvalidParameters("pole_refine_tol must lie in (0, 1e-9]")


class Chart(str, Enum):
    DIRECT = "d"
    RECIPROCAL = "r"


@dataclass(frozen=True)
class ChartState:
    x: float
    chart: Chart
    y1: float
    y2: float

    def q_qp(self) -> tuple[float, float]:
        if self.chart is Chart.DIRECT:
            return self.y1, self.y2
        if self.y1 == 0.0:
            return POLE, POLE
        return 1.0 / self.y1, -self.y2 / (self.y1 * self.y1)


class PoleMethod(str, Enum):
    ODE = "ode"
    IMPLICIT = "implicit"
    EXPANSION = "expansion"


@dataclass(frozen=True)
class PoleRecord:
    x_pole: float
    residue_sign: int
    slope: float
    method: PoleMethod = PoleMethod.ODE
    index_n: int | None = None
    branch: str | None = None

    def to_dict(self) -> dict:
        return {
            "x_pole": self.x_pole,
            "residue_sign": self.residue_sign,
            "slope": self.slope,
            "method": self.method.value,
            "n": self.index_n,
            "branch": self.branch,
        }


# --- literal-form right-hand sides -------------------------------------------


def rhs_direct(x: float, q: float, qp: float, alpha: float) -> float:
    """q'' of PIV with beta = 0."""
    if abs(q) < 1e-300:
        raise SingularBreakdown("q'' is singular at q = 0", x=x)
    return qp * qp / (2.0 * q) + 1.5 * q**3 + 4.0 * x * q * q + (2.0 * x * x - 4.0 * alpha) * q


def rhs_reciprocal(x: float, u: float, w: float, alpha: float) -> float:
    """u'' for u = 1/q, w = u'.

    At u = 0 exactly the 3 (w^2 - 1)/(2u) term is a 0/0 limit that cannot be
    recovered from the state, so it is dropped; this only happens exactly at
    a pole, where the polynomial charts in ``integrate`` are used instead.
    """
    base = -4.0 * x - (2.0 * x * x - 4.0 * alpha) * u
    if abs(u) < 1e-300:
        if abs(w * w - 1.0) > 1e-6:
            raise SingularBreakdown("u'' is singular at u = 0 with u'^2 != 1", x=x)
        return base
    return 1.5 * (w * w - 1.0) / u + base


# --- internal charts --------------------------------------------------------


def _f_v(alpha: float, sigma: float):
    def f(x, y):
        v, vp = y
        return [vp, 0.75 * v**5 + 2.0 * sigma * x * v**3 + (x * x - 2.0 * alpha) * v]

    return f


def _f_a(nu: float):
    def f(x, y):
        u, r = y
        m = nu + u * r
        return [1.0 + 2.0 * x * u - 4.0 * u * u * m, r * (4.0 * u * m - 2.0 * x) + 2.0 * m * m]

    return f


def _f_b(nu: float):
    def f(x, y):
        U, R = y
        M = nu + 1.0 + U * R
        return [1.0 - 2.0 * x * U - 4.0 * U * U * M, R * (2.0 * x + 4.0 * U * M) + 2.0 * M * M]

    return f


def _to_q(kind: str, x: float, y, nu: float, sigma: float) -> tuple[float, float]:
    """(q, q') from an internal state; raises ZeroDivisionError exactly at a pole."""
    if kind == "v":
        v, vp = y
        return sigma * v * v, 2.0 * sigma * v * vp
    if kind == "A":
        u, r = y
        m = nu + u * r
        up = 1.0 + 2.0 * x * u - 4.0 * u * u * m
        return 1.0 / u, -up / (u * u)
    U, R = y
    M = nu + 1.0 + U * R
    Up = 1.0 - 2.0 * x * U - 4.0 * U * U * M
    return -1.0 / U, Up / (U * U)


def _to_u(kind: str, x: float, y, nu: float, sigma: float) -> tuple[float, float]:
    """(u, u') with u = 1/q; only for the reciprocal charts."""
    if kind == "A":
        u, r = y
        m = nu + u * r
        return u, 1.0 + 2.0 * x * u - 4.0 * u * u * m
    U, R = y
    M = nu + 1.0 + U * R
    return -U, -(1.0 - 2.0 * x * U - 4.0 * U * U * M)


def _from_q(kind: str, x: float, q: float, qp: float, nu: float):
    """Internal state (and sigma) of chart ``kind`` from (q, q')."""
    if kind == "v":
        sigma = 1.0 if q > 0 else -1.0
        v = math.sqrt(abs(q))
        return [v, qp / (2.0 * sigma * v)], sigma
    p = (qp + q * q + 2.0 * x * q) / (4.0 * q)
    if kind == "A":
        return [1.0 / q, q * (p * q - nu)], 1.0
    s = p - q / 2.0
    M = -q * (s - x)
    return [-1.0 / q, -q * (M - nu - 1.0)], 1.0


# --- seeding ----------------------------------------------------------------


def _check_x_start(x_start: float) -> None:
    if not 4.0 <= x_start <= 8.0:
        raise InvalidParameters(f"x_start must lie in [4, 8], got {x_start:g}")


def seed_boundary(params: Params, x_start: float) -> ChartState:
    """Direct-chart state kappa D_nu^2(sqrt 2 x), nu = alpha - 1/2, at x_start."""
    _check_x_start(x_start)
    if params.kappa == 0.0:
        raise InvalidParameters("kappa = 0 is the trivial solution; integrate handles it directly")
    d, dp = pcf_d_pair(params.nu, SQRT2 * x_start)
    y1 = params.kappa * d * d
    if abs(y1) < UNDERFLOW:
        raise UnderflowError(f"boundary value {y1:g} underflows at x_start = {x_start:g}", x=x_start)
    y2 = 2.0 * SQRT2 * params.kappa * d * dp
    return ChartState(x=float(x_start), chart=Chart.DIRECT, y1=y1, y2=y2)


def _seed_v(params: Params, x_start: float):
    d, dp = pcf_d_pair(params.nu, SQRT2 * x_start)
    a = math.sqrt(abs(params.kappa))
    return [a * d, a * SQRT2 * dp], (1.0 if params.kappa > 0 else -1.0)


# --- trajectory -------------------------------------------------------------


@dataclass(frozen=True)
class _Segment:
    x_hi: float
    x_lo: float
    kind: str
    sigma: float
    interp: object  # scipy DenseOutput, or None for the trivial solution


@dataclass(frozen=True)
class Trajectory:
    samples: tuple[ChartState, ...]
    poles: tuple[PoleRecord, ...]
    params: Params
    settings: OdeSettings
    _segments: tuple[_Segment, ...] = field(default=(), repr=False, compare=False)

    @property
    def x_start(self) -> float:
        return self.samples[0].x

    @property
    def x_end(self) -> float:
        return self.samples[-1].x

    def xs(self) -> np.ndarray:
        return np.array([s.x for s in self.samples])


def _sample(kind: str, x: float, y, nu: float, sigma: float) -> ChartState:
    if kind == "v":
        q, qp = _to_q(kind, x, y, nu, sigma)
        return ChartState(x=float(x), chart=Chart.DIRECT, y1=float(q), y2=float(qp))
    u, up = _to_u(kind, x, y, nu, sigma)
    return ChartState(x=float(x), chart=Chart.RECIPROCAL, y1=float(u), y2=float(up))


def _trivial(params: Params, settings: OdeSettings, x_end: float) -> Trajectory:
    n = max(2, int(math.ceil((settings.x_start - x_end) / settings.max_step)) + 1)
    xs = np.linspace(settings.x_start, x_end, n)
    samples = tuple(ChartState(x=float(x), chart=Chart.DIRECT, y1=0.0, y2=0.0) for x in xs)
    seg = _Segment(x_hi=settings.x_start, x_lo=x_end, kind="zero", sigma=1.0, interp=None)
    return Trajectory(samples=samples, poles=(), params=params, settings=settings, _segments=(seg,))


def integrate(params: Params, settings: OdeSettings | None = None, x_end: float = -12.0) -> Trajectory:
    """Integrate from ``settings.x_start`` down to ``x_end``.

    DOP853 (order 8, embedded 5/3 error estimate) advances one step at a
    time; the chart is re-chosen after every accepted step and each zero of
    u in a reciprocal chart is bracketed on that step and refined by Brent's
    method to ``pole_refine_tol``.
    """
    settings = settings or OdeSettings()
    x0 = settings.x_start
    if not x_end < x0:
        raise InvalidParameters(f"x_end = {x_end:g} must be below x_start = {x0:g}")
    if params.kappa == 0.0:
        return _trivial(params, settings, x_end)

    seed = seed_boundary(params, x0)  # validates and checks for underflow
    alpha, nu = params.alpha, params.nu
    Q = settings.chart_switch_q
    y, sigma = _seed_v(params, x0)
    kind = "v"
    samples = [seed]
    poles: list[PoleRecord] = []
    segments: list[_Segment] = []

    def make(kind, x, y, sigma):
        if kind == "v":
            f = _f_v(alpha, sigma)
            atol = settings.atol * min(1.0, abs(y[0]))
        else:
            f = _f_a(nu) if kind == "A" else _f_b(nu)
            atol = settings.atol
        return DOP853(f, x, np.asarray(y, dtype=float), x_end, rtol=settings.rtol, atol=atol,
                      max_step=settings.max_step)

    solver = make(kind, x0, y, sigma)
    while solver.status == "running":
        msg = solver.step()
        if solver.status == "failed":
            raise StepFailure(f"step-size control failed: {msg}", x=float(solver.t))
        x_old, x = float(solver.t_old), float(solver.t)
        if not np.all(np.isfinite(solver.y)):
            raise SingularBreakdown("non-finite state", x=x)
        dense = solver.dense_output()
        y = solver.y

        # threshold crossings are located on the dense output so that the
        # Direct chart never holds |q| > Q and the reciprocal one |u| > 1.5/Q
        new = kind
        if kind == "v":
            if abs(_to_q(kind, x, y, nu, sigma)[0]) > Q:
                new = "A" if sigma > 0 else "B"
                x = _crossing(lambda t: dense(t)[0] ** 2 - Q, x, x_old)
        elif abs(y[0]) > HYSTERESIS / Q:
            new = "v"
            x = _crossing(lambda t: abs(dense(t)[0]) - HYSTERESIS / Q, x, x_old)
        if x != solver.t:
            y = dense(x)

        segments.append(_Segment(x_hi=x_old, x_lo=x, kind=kind, sigma=sigma, interp=dense))
        if kind != "v":
            u_old, u_new = dense(x_old)[0], y[0]
            if u_old == 0.0 or np.sign(u_old) != np.sign(u_new):
                poles.append(_refine_pole(dense, kind, x, x_old, settings))
        samples.append(_sample(kind, x, y, nu, sigma))
        if x == x_end:
            break

        q, qp = _to_q(kind, x, y, nu, sigma)
        if new == kind and kind != "v" and abs(q) < SWAP_Q:
            if kind == "A" and q < 0:
                new = "B"
            elif kind == "B" and q > 0:
                new = "A"
        if new != kind:
            log.debug("chart %s -> %s at x = %.6f (q = %.3g)", kind, new, x, q)
            kind = new
            y, s = _from_q(kind, x, q, qp, nu)
            if kind == "v":
                sigma = s
            solver = make(kind, x, y, sigma)
        elif x != solver.t:
            raise AssertionError("crossing without chart change")

    return Trajectory(samples=tuple(samples), poles=tuple(poles), params=params, settings=settings,
                      _segments=tuple(segments))


def _crossing(g, x_lo: float, x_hi: float) -> float:
    """Abscissa in [x_lo, x_hi] where g changes sign (g(x_hi) <= 0 < g(x_lo))."""
    if not g(x_hi) <= 0.0:
        return x_lo  # already past the threshold at the start of the step
    return float(brentq(g, x_lo, x_hi, xtol=1e-14, rtol=4 * np.finfo(float).eps))


def _refine_pole(dense, kind: str, x_lo: float, x_hi: float, settings: OdeSettings) -> PoleRecord:
    g = lambda s: float(dense(s)[0])  # noqa: E731
    xp = brentq(g, x_lo, x_hi, xtol=settings.pole_refine_tol, rtol=4 * np.finfo(float).eps)
    # u' at the zero by a central difference on the dense interpolant
    h = _FD_STEP
    slope = (g(xp + h) - g(xp - h)) / (2.0 * h)
    if kind == "B":
        slope = -slope  # u = -U
    return PoleRecord(x_pole=float(xp), residue_sign=1 if slope > 0 else -1, slope=float(slope))


# --- evaluation -------------------------------------------------------------


def _locate(traj: Trajectory, x: float) -> int | None:
    """Index of the sample at exactly x, or None."""
    neg = [-s.x for s in traj.samples]
    i = bisect.bisect_left(neg, -x)
    if i < len(neg) and neg[i] == -x:
        return i
    return None


def _segment(traj: Trajectory, x: float) -> _Segment:
    segs = traj._segments
    his = [-s.x_hi for s in segs]
    i = bisect.bisect_right(his, -x) - 1
    i = min(max(i, 0), len(segs) - 1)
    return segs[i]


def _check_span(traj: Trajectory, x: float) -> None:
    if not traj.x_end <= x <= traj.x_start:
        raise DomainError(f"x = {x:g} outside the trajectory span [{traj.x_end:g}, {traj.x_start:g}]")


def _near_pole(traj: Trajectory, x: float) -> bool:
    window = 10.0 * traj.settings.pole_refine_tol
    return any(abs(x - p.x_pole) <= window for p in traj.poles)


def evaluate(traj: Trajectory, x: float):
    """(q, q') at x from the dense output, or (POLE, POLE) next to a recorded pole."""
    x = float(x)
    _check_span(traj, x)
    if _near_pole(traj, x):
        return POLE, POLE
    i = _locate(traj, x)
    if i is not None:
        return traj.samples[i].q_qp()
    seg = _segment(traj, x)
    if seg.interp is None:
        return 0.0, 0.0
    y = seg.interp(x)
    try:
        q, qp = _to_q(seg.kind, x, y, traj.params.nu, seg.sigma)
    except ZeroDivisionError:
        return POLE, POLE
    return float(q), float(qp)


def evaluate_reciprocal(traj: Trajectory, x: float) -> tuple[float, float]:
    """(u, u') = (1/q, -q'/q^2) at x; finite at poles, where u = 0."""
    x = float(x)
    _check_span(traj, x)
    i = _locate(traj, x)
    if i is not None:
        s = traj.samples[i]
        if s.chart is Chart.RECIPROCAL:
            return s.y1, s.y2
        if s.y1 == 0.0:
            raise ZeroDivisionError("q = 0 has no reciprocal")
        return 1.0 / s.y1, -s.y2 / (s.y1 * s.y1)
    seg = _segment(traj, x)
    if seg.interp is None:
        raise ZeroDivisionError("the trivial solution has no reciprocal")
    y = seg.interp(x)
    if seg.kind == "v":
        q, qp = _to_q("v", x, y, traj.params.nu, seg.sigma)
        return 1.0 / q, -qp / (q * q)
    u, up = _to_u(seg.kind, x, y, traj.params.nu, seg.sigma)
    return float(u), float(up)


# --- serialization ----------------------------------------------------------


def _fmt(v) -> str:
    if v is None or v is POLE:
        return ""
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _sample_row(traj: Trajectory, s: ChartState) -> tuple:
    if _near_pole(traj, s.x):
        return s.x, s.chart.value, None, None
    q, qp = s.q_qp()
    return s.x, s.chart.value, q, qp


def trajectory_to_tsv(traj: Trajectory, with_poles: bool = True) -> str:
    lines = ["#x\tchart\tq\tqp"]
    for s in traj.samples:
        lines.append("\t".join(_fmt(v) for v in _sample_row(traj, s)))
    out = "\n".join(lines) + "\n"
    if with_poles:
        out += "\n" + poles_to_tsv(traj.poles)
    return out


def poles_to_tsv(records) -> str:
    lines = ["#x_pole\tresidue_sign\tslope\tmethod\tn\tbranch"]
    for p in records:
        d = p.to_dict()
        lines.append("\t".join(_fmt(d[k]) for k in ("x_pole", "residue_sign", "slope", "method", "n", "branch")))
    return "\n".join(lines) + "\n"


def trajectory_to_dict(traj: Trajectory) -> dict:
    samples = []
    for s in traj.samples:
        x, chart, q, qp = _sample_row(traj, s)
        samples.append({"x": x, "chart": chart, "q": None if q is POLE else q, "qp": None if qp is POLE else qp})
    return {
        "params": {"alpha": traj.params.alpha, "kappa": traj.params.kappa},
        "settings": {
            "rtol": traj.settings.rtol,
            "atol": traj.settings.atol,
            "x_start": traj.settings.x_start,
            "chart_switch_q": traj.settings.chart_switch_q,
            "max_step": traj.settings.max_step,
            "pole_refine_tol": traj.settings.pole_refine_tol,
        },
        "samples": samples,
        "poles": [p.to_dict() for p in traj.poles],
    }


def trajectory_to_json(traj: Trajectory) -> str:
    return json.dumps(trajectory_to_dict(traj))
