from __future__ import annotations

import json
import math

import numpy as np
import pytest
import sympy as sp
from scipy.integrate import solve_ivp

from cmpiv.connection import Params
from cmpiv.errors import DomainError, InvalidParameters, SingularBreakdown, UnderflowError
from cmpiv.marker import POLE
from cmpiv.ode import (
    Chart,
    OdeSettings,
    _f_a,
    _f_b,
    _f_v,
    _from_q,
    _to_q,
    evaluate,
    evaluate_reciprocal,
    integrate,
    poles_to_tsv,
    rhs_direct,
    rhs_reciprocal,
    seed_boundary,
    trajectory_to_dict,
    trajectory_to_json,
    trajectory_to_tsv,
)
from cmpiv.specfun import pcf_d
from cmpiv.validation import residue_audit

# q(0) for alpha = 0, kappa = 1 from a 25-digit Taylor integration of the
# v = sqrt(q) form seeded with the same boundary data at x = 6 (and at x = 7,
# which agrees to 4e-17)
Q0_REFERENCE = 3.4302657609557285
# first pole from the same reference carried into the residue +1 chart
FIRST_POLE_REFERENCE = -0.2864844298895966


# --- right-hand sides -----------------------------------------------------------


def test_rhs_direct_examples():
    assert rhs_direct(0, 1, 0, 0) == 1.5
    assert rhs_direct(1, 1, 0, 0) == 7.5
    assert rhs_direct(0, 2, 1, 0.5) == 8.25
    with pytest.raises(SingularBreakdown):
        rhs_direct(0.0, 0.0, 1.0, 0.0)


def _piv(x, q, qp, a):
    # second, independent evaluator: Fraction arithmetic
    from fractions import Fraction as F

    x, q, qp, a = map(F, (x, q, qp, a))
    return qp**2 / (2 * q) + F(3, 2) * q**3 + 4 * x * q**2 + (2 * x**2 - 4 * a) * q


def test_rhs_direct_second_evaluator():
    rng = np.random.default_rng(3)
    for _ in range(50):
        x, q, qp, a = rng.uniform(-5, 5, 4)
        if abs(q) < 0.1:
            continue
        assert rhs_direct(x, q, qp, a) == pytest.approx(float(_piv(x, q, qp, a)), rel=1e-13)


def test_rhs_reciprocal_examples():
    assert rhs_reciprocal(0, 1, 0, 0) == -1.5
    assert rhs_reciprocal(1, 1, 0, 0) == -7.5
    # u -> 0 with w^2 - 1 proportional to u: finite
    x, a, lam = 0.7, 0.2, 0.3
    vals = [rhs_reciprocal(x, u, math.sqrt(1 + lam * u), a) for u in (1e-4, 1e-6, 1e-8)]
    limit = -4 * x + 1.5 * lam
    assert all(abs(v - limit) < 1e-3 for v in vals)
    assert rhs_reciprocal(x, 0.0, 1.0, a) == -4 * x
    with pytest.raises(SingularBreakdown):
        rhs_reciprocal(x, 0.0, 0.5, a)


def test_rhs_consistency():
    rng = np.random.default_rng(5)
    for _ in range(100):
        x, q, qp, a = rng.uniform(-4, 4, 4)
        if abs(q) < 0.2:
            continue
        u, w = 1 / q, -qp / q**2
        # q'' = -u''/u^2 + 2 w^2/u^3
        lhs = -rhs_reciprocal(x, u, w, a) / u**2 + 2 * w**2 / u**3
        assert lhs == pytest.approx(rhs_direct(x, q, qp, a), rel=1e-9, abs=1e-9)


X, A, S = sp.symbols("x alpha sigma", real=True)
Qf = sp.Function("q")(X)


def _piv_sym(q):
    qp = sp.diff(q, X)
    return sp.diff(q, X, 2) - (qp**2 / (2 * q) + sp.Rational(3, 2) * q**3 + 4 * X * q**2 + (2 * X**2 - 4 * A) * q)


def test_reciprocal_form_symbolic():
    u = sp.Function("u")(X)
    w = sp.diff(u, X)
    expr = sp.simplify(_piv_sym(1 / u) * (-u**2))
    upp = sp.solve(sp.Eq(expr, 0), sp.diff(u, X, 2))[0]
    target = sp.Rational(3, 2) * (w**2 - 1) / u - 4 * X - (2 * X**2 - 4 * A) * u
    assert sp.simplify(upp - target) == 0


def test_v_chart_symbolic():
    v = sp.Function("v")(X)
    expr = _piv_sym(S * v**2)
    vpp = sp.solve(sp.Eq(expr, 0), sp.diff(v, X, 2))[0]
    target = sp.Rational(3, 4) * v**5 + 2 * S * X * v**3 + (X**2 - 2 * A) * v
    # sigma^2 = 1
    assert sp.simplify((vpp - target).subs(S**2, 1).subs(S**3, S).subs(S**4, 1)) == 0


def _hamiltonian_chart_check(kind):
    """Differentiate the chart variables along PIV and compare with the chart ODE."""
    q, qp, qpp = sp.symbols("q qp qpp")
    nu = A - sp.Rational(1, 2)
    piv = qp**2 / (2 * q) + sp.Rational(3, 2) * q**3 + 4 * X * q**2 + (2 * X**2 - 4 * A) * q
    p = (qp + q**2 + 2 * X * q) / (4 * q)
    if kind == "A":
        y1 = 1 / q
        y2 = q * (p * q - nu)
        m = nu + y1 * y2
        f1 = 1 + 2 * X * y1 - 4 * y1**2 * m
        f2 = y2 * (4 * y1 * m - 2 * X) + 2 * m**2
    else:
        s_ = p - q / 2
        Mq = -q * (s_ - X)
        y1 = -1 / q
        y2 = -q * (Mq - nu - 1)
        M = nu + 1 + y1 * y2
        f1 = 1 - 2 * X * y1 - 4 * y1**2 * M
        f2 = y2 * (2 * X + 4 * y1 * M) + 2 * M**2

    def ddx(e):
        return sp.diff(e, X) + sp.diff(e, q) * qp + sp.diff(e, qp) * qpp

    r1 = sp.simplify((ddx(y1) - f1).subs(qpp, piv))
    r2 = sp.simplify((ddx(y2) - f2).subs(qpp, piv))
    return r1, r2


@pytest.mark.parametrize("kind", ["A", "B"])
def test_pole_charts_symbolic(kind):
    assert _hamiltonian_chart_check(kind) == (0, 0)


@pytest.mark.parametrize("kind", ["v", "A", "B"])
def test_chart_roundtrip(kind):
    for x, q, qp in ((0.3, 12.0, -40.0), (-2.0, -15.0, 70.0), (-5.0, 3.0, 1.5)):
        y, sigma = _from_q(kind, x, q, qp, -0.5)
        q2, qp2 = _to_q(kind, x, y, -0.5, sigma)
        assert q2 == pytest.approx(q, rel=1e-13) and qp2 == pytest.approx(qp, rel=1e-12)


def test_internal_charts_match_piv():
    # chart right-hand sides reproduce q'' through the chain rule
    alpha, nu = 0.3, -0.2
    for x, q, qp in ((0.3, 12.0, -40.0), (-2.0, -15.0, 70.0), (-5.0, 3.0, 1.5)):
        target = rhs_direct(x, q, qp, alpha)
        h = 1e-6
        for kind in ("v", "A", "B"):
            y, sigma = _from_q(kind, x, q, qp, nu)
            f = {"v": _f_v(alpha, sigma), "A": _f_a(nu), "B": _f_b(nu)}[kind]
            yh = np.array(y) + h * np.array(f(x, y))
            qph = _to_q(kind, x + h, yh, nu, sigma)[1]
            ym = np.array(y) - h * np.array(f(x, y))
            qpm = _to_q(kind, x - h, ym, nu, sigma)[1]
            assert (qph - qpm) / (2 * h) == pytest.approx(target, rel=1e-5)


# --- settings and seeding -------------------------------------------------------


def test_settings_invariants():
    OdeSettings()
    for bad in (dict(rtol=1e-14), dict(rtol=1e-5), dict(x_start=3.9), dict(x_start=8.5),
                dict(chart_switch_q=1.0), dict(pole_refine_tol=1e-8), dict(atol=0.0)):
        with pytest.raises(InvalidParameters):
            OdeSettings(**bad)


def test_seed_boundary():
    s = seed_boundary(Params(0, 1), 6.0)
    assert s.chart is Chart.DIRECT and s.x == 6.0
    d = pcf_d(-0.5, 6 * math.sqrt(2))
    assert s.y1 == pytest.approx(d * d, rel=1e-15)
    assert s.y1 == pytest.approx(2.705998323351219e-17, rel=1e-12)
    for k in (-3.0, -0.01, 0.2, 9.0):
        assert math.copysign(1, seed_boundary(Params(0.3, k), 5.0).y1) == math.copysign(1, k)
    with pytest.raises(InvalidParameters):
        seed_boundary(Params(0, 0.0), 6.0)
    with pytest.raises(InvalidParameters):
        seed_boundary(Params(0, 1.0), 9.0)
    with pytest.raises(UnderflowError):
        seed_boundary(Params(-5.4, 1e-220), 8.0)


def test_seed_derivative():
    s = seed_boundary(Params(1.2, 0.4), 5.0)
    h = 1e-6
    up = seed_boundary(Params(1.2, 0.4), 5.0 + h).y1
    dn = seed_boundary(Params(1.2, 0.4), 5.0 - h).y1
    assert (up - dn) / (2 * h) == pytest.approx(s.y2, rel=1e-7)


# --- integration ----------------------------------------------------------------


def test_trivial_solution():
    t = integrate(Params(0, 0.0), x_end=-12)
    assert not t.poles
    assert all(s.y1 == 0.0 and s.y2 == 0.0 for s in t.samples)
    assert evaluate(t, -3.3) == (0.0, 0.0)


def test_reference_values(traj_0_1):
    q0 = evaluate(traj_0_1, 0.0)[0]
    assert abs(q0 - Q0_REFERENCE) <= 1e-9 * Q0_REFERENCE
    assert abs(traj_0_1.poles[0].x_pole - FIRST_POLE_REFERENCE) <= 1e-9


def test_pole_count_and_structure(traj_0_1, traj_0_m05):
    for t in (traj_0_1, traj_0_m05):
        inside = [p for p in t.poles if -12 < p.x_pole < 0]
        assert len(inside) >= 5
        assert residue_audit(t).ok


def test_samples_and_chart_bounds(traj_0_1):
    xs = traj_0_1.xs()
    assert np.all(np.diff(xs) < 0)
    Q = traj_0_1.settings.chart_switch_q
    for s in traj_0_1.samples:
        if s.chart is Chart.DIRECT:
            assert abs(s.y1) <= 1.5 * Q * (1 + 1e-12)
            assert math.isfinite(s.y1)
        else:
            assert abs(s.y1) <= 1.5 / Q * (1 + 1e-12)


def test_boundary_sensitivity(traj_0_1):
    t7 = integrate(Params(0, 1), OdeSettings(x_start=7.0), x_end=-1.0)
    assert abs(evaluate(traj_0_1, 0.0)[0] - evaluate(t7, 0.0)[0]) <= 1e-6


def test_tolerance_convergence():
    # halving rtol moves q(-8) by far less than the distance to the answer
    # at the looser tolerance, and by less than 1e-7 relative
    p = Params(0, 1)
    ref = evaluate(integrate(p, OdeSettings(rtol=1e-13), x_end=-8.5), -8.0)[0]
    vals = {rt: evaluate(integrate(p, OdeSettings(rtol=rt), x_end=-8.5), -8.0)[0] for rt in (1e-9, 1e-11, 5e-12)}
    assert abs(vals[1e-11] - vals[5e-12]) <= 1e-7 * abs(ref)
    assert abs(vals[1e-11] - ref) < abs(vals[1e-9] - ref)


def test_determinism():
    a = integrate(Params(0.25, 1.0), x_end=-6)
    b = integrate(Params(0.25, 1.0), x_end=-6)
    assert a.samples == b.samples and a.poles == b.poles


def test_chart_consistency(traj_0_1):
    """Integrate a stretch with 1 < |q| < Q in both literal-form charts."""
    ss = traj_0_1.samples
    run = None
    for i in range(len(ss)):
        j = i
        while j < len(ss) and ss[j].chart is Chart.DIRECT and 1.5 < abs(ss[j].y1) < 8:
            j += 1
        if j - i > 5 and ss[i].x - ss[j - 1].x > 0.05:
            run = (ss[i], ss[j - 1])
            break
    assert run is not None
    a, b = run
    alpha = 0.0
    kw = dict(method="DOP853", rtol=1e-12, atol=1e-14, dense_output=True)
    sd = solve_ivp(lambda x, y: [y[1], rhs_direct(x, y[0], y[1], alpha)], (a.x, b.x), [a.y1, a.y2], **kw)
    u0, w0 = 1 / a.y1, -a.y2 / a.y1**2
    sr = solve_ivp(lambda x, y: [y[1], rhs_reciprocal(x, y[0], y[1], alpha)], (a.x, b.x), [u0, w0], **kw)
    for x in np.linspace(a.x, b.x, 11):
        qd = sd.sol(x)[0]
        qr = 1 / sr.sol(x)[0]
        assert abs(qd - qr) <= 1e-8 * abs(qd)
        assert abs(qd - evaluate(traj_0_1, x)[0]) <= 1e-8 * abs(qd)


# --- evaluation -----------------------------------------------------------------


def test_evaluate_exact_at_samples(traj_0_1):
    for s in traj_0_1.samples[::97]:
        q, qp = evaluate(traj_0_1, s.x)
        if q is POLE:
            continue
        assert (q, qp) == s.q_qp()


def test_evaluate_pole_marker(traj_0_1):
    p = traj_0_1.poles[3]
    assert evaluate(traj_0_1, p.x_pole) == (POLE, POLE)
    assert evaluate(traj_0_1, p.x_pole + 5e-11)[0] is POLE
    q = evaluate(traj_0_1, p.x_pole + 1e-6)[0]
    assert abs(q) > 1e5
    u, up = evaluate_reciprocal(traj_0_1, p.x_pole)
    assert abs(u) <= 1e-10 and abs(abs(up) - 1) <= 1e-6


def test_evaluate_midpoint_vs_reintegration(traj_0_1):
    rtol = traj_0_1.settings.rtol
    for i in (5, 40, 200, 600):
        m = 0.5 * (traj_0_1.samples[i].x + traj_0_1.samples[i + 1].x)
        q = evaluate(traj_0_1, m)[0]
        q2 = integrate(Params(0, 1), x_end=m).samples[-1].q_qp()[0]
        assert abs(q - q2) <= 10 * rtol * abs(q2)


def test_evaluate_out_of_span(traj_0_1):
    with pytest.raises(DomainError):
        evaluate(traj_0_1, 6.5)
    with pytest.raises(DomainError):
        evaluate(traj_0_1, -12.5)


# --- serialization --------------------------------------------------------------


def test_tsv_layout(traj_0_1):
    text = trajectory_to_tsv(traj_0_1)
    head, poles = text.split("\n\n")
    rows = head.splitlines()
    assert rows[0] == "#x\tchart\tq\tqp"
    assert len(rows) == len(traj_0_1.samples) + 1
    assert {r.split("\t")[1] for r in rows[1:]} == {"d", "r"}
    prow = poles.splitlines()
    assert prow[0] == "#x_pole\tresidue_sign\tslope\tmethod\tn\tbranch"
    assert len(prow) == len(traj_0_1.poles) + 1
    assert float(prow[1].split("\t")[0]) == traj_0_1.poles[0].x_pole
    assert poles == poles_to_tsv(traj_0_1.poles)


def test_json_layout(traj_0_1):
    doc = json.loads(trajectory_to_json(traj_0_1))
    assert set(doc) >= {"samples", "poles", "params", "settings"}
    assert len(doc["poles"]) == len(traj_0_1.poles)
    assert doc == json.loads(json.dumps(trajectory_to_dict(traj_0_1)))
