"""Cross-validation of integrated solutions against the singular asymptotics.

Three checks:

* ``residual_scan``: |x| |q_ode - q_asym| on a grid, skipping points too close
  to a predicted pole or where 2 cos theta + 1 is small;
* ``compare_poles``: ODE poles matched to the implicit-phase roots and the
  large-n expansion;
* ``residue_audit``: every detected pole is simple with residue +-1 and the
  signs alternate.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .asymptotics import (
    Branch,
    PhaseData,
    phase_from_params,
    pole_expansion,
    pole_implicit,
    predicted_poles,
    q_asymptotic,
    q_asymptotic_reciprocal,
    q_asymptotic_reciprocal_prime,
    theta,
)
from .connection import Params
from .errors import MatchFailure
from .marker import POLE
from .ode import OdeSettings, PoleRecord, Trajectory, evaluate, evaluate_reciprocal, integrate

__all__ = [
    "Checkpoint",
    "PoleComparison",
    "PoleRow",
    "ResidualReport",
    "ResidueAudit",
    "compare_poles",
    "residual_scan",
    "residue_audit",
]

EXCLUSION_BAND = 0.15
DENOMINATOR_BAND = 0.3
SLOPE_TOL = 1e-5
# neighbourhood used for the sup in the perturbed-zero bound
BOUND_RADIUS = 0.1


def _f(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


# --- residuals --------------------------------------------------------------


@dataclass(frozen=True)
class Checkpoint:
    x: float
    q_ode: float | None
    q_asym: float | None
    residual: float | None
    scaled_residual: float | None
    excluded: bool


@dataclass(frozen=True)
class ResidualReport:
    checkpoints: tuple[Checkpoint, ...]
    exclusion_band: float
    denominator_band: float = DENOMINATOR_BAND

    def included(self) -> list[Checkpoint]:
        return [c for c in self.checkpoints if not c.excluded]

    @property
    def max_scaled(self) -> float:
        vals = [c.scaled_residual for c in self.included()]
        return max(vals) if vals else 0.0

    def window_max(self, x_lo: float, x_hi: float) -> float:
        """Largest scaled residual among included checkpoints in [x_lo, x_hi]."""
        vals = [c.scaled_residual for c in self.included() if x_lo <= c.x <= x_hi]
        return max(vals) if vals else math.nan

    def end_ratio(self, window: float = 1.0) -> float:
        """Window max at the most negative end over the window max at the other end."""
        xs = [c.x for c in self.checkpoints]
        lo, hi = min(xs), max(xs)
        return self.window_max(lo, lo + window) / self.window_max(hi - window, hi)

    def passed(self, bound: float = 2.0) -> bool:
        return self.max_scaled <= bound

    def to_tsv(self) -> str:
        lines = ["#x\tq_ode\tq_asym\tresidual\tscaled_residual\texcluded"]
        for c in self.checkpoints:
            lines.append("\t".join(_f(v) for v in (c.x, c.q_ode, c.q_asym, c.residual, c.scaled_residual, c.excluded)))
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "exclusion_band": self.exclusion_band,
            "denominator_band": self.denominator_band,
            "max_scaled_residual": self.max_scaled,
            "checkpoints": [c.__dict__ for c in self.checkpoints],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _span_for(x_grid) -> tuple[float, float]:
    lo, hi = min(x_grid), max(x_grid)
    if not hi < 0:
        raise ValueError("the residual grid must lie on the negative axis")
    return lo, hi


def residual_scan(
    params: Params,
    x_grid,
    settings: OdeSettings | None = None,
    traj: Trajectory | None = None,
    exclusion_band: float = EXCLUSION_BAND,
    denominator_band: float = DENOMINATOR_BAND,
) -> ResidualReport:
    """Scaled residuals |x| |q_ode(x) - q_asym(x)| on ``x_grid``.

    A point is excluded when it is within ``exclusion_band`` of a predicted
    pole or when |2 cos theta(x) + 1| < ``denominator_band``.  Raises
    ``NotSingularRegime`` outside the singular regime.
    """
    phase = phase_from_params(params)
    grid = [float(x) for x in x_grid]
    lo, hi = _span_for(grid)
    if traj is None:
        traj = integrate(params, settings, x_end=lo)
    pred = [x for _, _, x in predicted_poles(phase, lo - 1.0, min(hi + 1.0, -1e-6))]
    out = []
    for x in grid:
        den = 2.0 * math.cos(theta(x, phase)) + 1.0
        near = min((abs(x - a) for a in pred), default=math.inf)
        if near < exclusion_band or abs(den) < denominator_band:
            out.append(Checkpoint(x, None, None, None, None, True))
            continue
        q_ode = evaluate(traj, x)[0]
        q_as = q_asymptotic(x, phase)
        if q_ode is POLE or q_as is POLE:
            out.append(Checkpoint(x, None, None, None, None, True))
            continue
        res = abs(q_ode - q_as)
        out.append(Checkpoint(x, q_ode, q_as, res, abs(x) * res, False))
    return ResidualReport(checkpoints=tuple(out), exclusion_band=exclusion_band, denominator_band=denominator_band)


# --- pole comparison --------------------------------------------------------


@dataclass(frozen=True)
class PoleRow:
    n: int
    branch: str
    x_ode: float | None
    x_implicit: float | None
    x_expansion: float | None
    d_oi: float | None
    d_ie: float | None
    zero_bound: float | None = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class PoleComparison:
    rows: tuple[PoleRow, ...]
    phase: PhaseData
    unmatched: tuple[PoleRecord, ...] = field(default=())

    def to_tsv(self) -> str:
        cols = ("n", "branch", "x_ode", "x_implicit", "x_expansion", "d_oi", "d_ie", "zero_bound")
        lines = ["#" + "\t".join(cols)]
        for r in self.rows:
            d = r.to_dict()
            lines.append("\t".join(_f(d[c]) for c in cols))
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {"b": self.phase.b, "psi": self.phase.psi, "rows": [r.to_dict() for r in self.rows]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def d_oi(self, n: int) -> float:
        """Largest ODE-implicit discrepancy over both branches at index n."""
        vals = [r.d_oi for r in self.rows if r.n == n and r.d_oi is not None]
        if not vals:
            raise KeyError(f"no ODE pole matched at n = {n}")
        return max(vals)


def match_poles(ode_poles, lattice) -> dict[tuple[int, str], PoleRecord]:
    """Nearest-neighbour matching of ODE poles to a sorted predicted lattice.

    ``lattice`` holds (n, branch, x) sorted by decreasing x.  A pole whose
    nearest predicted root is further than half the local spacing, or two
    poles claiming one root, raise ``MatchFailure``.
    """
    xs = [x for _, _, x in lattice]
    out: dict[tuple[int, str], PoleRecord] = {}
    for p in ode_poles:
        j = min(range(len(xs)), key=lambda i: abs(xs[i] - p.x_pole))
        gaps = [abs(xs[j] - xs[i]) for i in (j - 1, j + 1) if 0 <= i < len(xs)]
        half = 0.5 * min(gaps) if gaps else math.inf
        dist = abs(xs[j] - p.x_pole)
        n, br, _ = lattice[j]
        if not dist < half:
            raise MatchFailure(f"ODE pole at {p.x_pole:.12g} is {dist:.3g} from the nearest prediction (n={n}, {br.value})")
        key = (n, br.value)
        if key in out:
            raise MatchFailure(f"two ODE poles matched to n={n}, {br.value}")
        out[key] = p
    return out


def _zero_bound(traj: Trajectory, phase: PhaseData, a: float) -> float | None:
    """E/m for the zero of x/q near the model zero a.

    E is the largest |x/q_ode - (x/q)_asym| sampled on [a - r, a + r], m the
    slope of the model at a.  The perturbed zero lies within E/m of a as long
    as the model stays close to linear on that interval.
    """
    m = abs(q_asymptotic_reciprocal_prime(a, phase))
    if m == 0.0:
        return None
    err = 0.0
    for k in range(-10, 11):
        x = a + BOUND_RADIUS * k / 10.0
        if not traj.x_end <= x <= traj.x_start:
            return None
        try:
            u = evaluate_reciprocal(traj, x)[0]
        except ZeroDivisionError:
            return None
        model = q_asymptotic_reciprocal(x, phase)
        if model is POLE:
            return None
        err = max(err, abs(x * u - model))
    return err / m


def compare_poles(
    params: Params,
    n_min: int,
    n_max: int,
    settings: OdeSettings | None = None,
    with_ode: bool = True,
    traj: Trajectory | None = None,
) -> PoleComparison:
    """Pole table for n in [n_min, n_max], both branches.

    With ``with_ode`` the solution is integrated past the implicit root
    a_{n_max}^+ and every detected pole in the asymptotic range is matched to
    its nearest prediction.
    """
    if n_min < 1 or n_max < n_min:
        raise ValueError("need 1 <= n_min <= n_max")
    phase = phase_from_params(params)
    implicit = {
        (n, br.value): pole_implicit(n, br, phase) for n in range(n_min, n_max + 1) for br in (Branch.PLUS, Branch.MINUS)
    }
    matched: dict[tuple[int, str], PoleRecord] = {}
    if with_ode:
        x_end = implicit[(n_max, "plus")] - 1.0
        if traj is None:
            traj = integrate(params, settings, x_end=x_end)
        lattice = predicted_poles(phase, min(traj.x_end, x_end) - 2.0, -1e-6)
        all_matches = match_poles(
            [p for p in traj.poles if p.x_pole <= implicit[(n_min, "minus")] + 1.0], lattice
        )
        matched = {k: v for k, v in all_matches.items() if n_min <= k[0] <= n_max}
    rows = []
    for n in range(n_min, n_max + 1):
        for br in (Branch.MINUS, Branch.PLUS):
            xi = implicit[(n, br.value)]
            xe = pole_expansion(n, br, phase)
            rec = matched.get((n, br.value))
            xo = rec.x_pole if rec else None
            bound = _zero_bound(traj, phase, xi) if rec else None
            rows.append(
                PoleRow(
                    n=n,
                    branch=br.value,
                    x_ode=xo,
                    x_implicit=xi,
                    x_expansion=xe,
                    d_oi=abs(xo - xi) if xo is not None else None,
                    d_ie=abs(xi - xe),
                    zero_bound=bound,
                )
            )
    return PoleComparison(rows=tuple(rows), phase=phase)


# --- residues ---------------------------------------------------------------


@dataclass(frozen=True)
class ResidueAudit:
    n_poles: int
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def residue_audit(poles, tol: float = SLOPE_TOL) -> ResidueAudit:
    """Check | |slope| - 1 | <= tol and alternating residue signs.

    Accepts a ``Trajectory`` or a sequence of ``PoleRecord`` ordered by
    decreasing x.
    """
    if isinstance(poles, Trajectory):
        poles = poles.poles
    poles = list(poles)
    bad = []
    for i, p in enumerate(poles):
        if not abs(abs(p.slope) - 1.0) <= tol:
            bad.append(f"pole {i} at {p.x_pole:.12g}: |slope| = {abs(p.slope):.12g}")
        if p.residue_sign != (1 if p.slope > 0 else -1):
            bad.append(f"pole {i} at {p.x_pole:.12g}: residue sign disagrees with the slope")
    for i in range(len(poles) - 1):
        if poles[i].residue_sign == poles[i + 1].residue_sign:
            bad.append(f"poles {i} and {i + 1} share residue sign {poles[i].residue_sign:+d}")
    return ResidueAudit(n_poles=len(poles), violations=tuple(bad))
