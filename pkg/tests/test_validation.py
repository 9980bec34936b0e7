from __future__ import annotations

import json
import math

import numpy as np
import pytest

from cmpiv.asymptotics import Branch, PhaseData, pole_implicit, predicted_poles, theta
from cmpiv.connection import Params, kappa_star
from cmpiv.errors import MatchFailure, NotSingularRegime
from cmpiv.ode import PoleRecord
from cmpiv.validation import (
    DENOMINATOR_BAND,
    EXCLUSION_BAND,
    compare_poles,
    match_poles,
    residual_scan,
    residue_audit,
)

P01 = Params(0.0, 1.0)
GRID = np.round(np.arange(-12.0, -6.0 + 1e-9, 0.01), 10)


@pytest.fixture(scope="module")
def report(traj_0_1):
    return residual_scan(P01, GRID, traj=traj_0_1)


def test_exclusion_rule(report):
    phase = PhaseData(-0.5240294323466588, -2.37067420212038)
    pred = [x for _, _, x in predicted_poles(phase, -13, -1e-6)]
    for c in report.checkpoints:
        near = min(abs(c.x - a) for a in pred)
        den = abs(2 * math.cos(theta(c.x, phase)) + 1)
        assert c.excluded == (near < EXCLUSION_BAND or den < DENOMINATOR_BAND)
        if c.excluded:
            assert c.residual is None
        else:
            assert c.scaled_residual == pytest.approx(abs(c.x) * c.residual)


def test_residuals_bounded(report):
    assert len(report.included()) > 50
    assert report.max_scaled <= 2.0
    assert report.end_ratio() <= 2.0


def test_band_monotone(traj_0_1, report):
    narrow = residual_scan(P01, GRID, traj=traj_0_1, exclusion_band=0.1)
    kept = {c.x: c for c in narrow.included()}
    for c in report.included():
        assert c.x in kept and kept[c.x].scaled_residual == c.scaled_residual
    assert len(narrow.included()) >= len(report.included())


def test_determinism():
    a = residual_scan(Params(0.25, 1.0), GRID[::25])
    b = residual_scan(Params(0.25, 1.0), GRID[::25])
    assert a == b


def test_regime_guard():
    for p in (Params(0, 0.1), Params(0, 1 / math.pi)):
        with pytest.raises(NotSingularRegime):
            residual_scan(p, [-8.0])
        with pytest.raises(NotSingularRegime):
            compare_poles(p, 5, 6, with_ode=False)


def test_report_serialization(report):
    tsv = report.to_tsv().splitlines()
    assert tsv[0] == "#x\tq_ode\tq_asym\tresidual\tscaled_residual\texcluded"
    assert len(tsv) == len(GRID) + 1
    doc = json.loads(report.to_json())
    assert doc["exclusion_band"] == EXCLUSION_BAND and len(doc["checkpoints"]) == len(GRID)


@pytest.fixture(scope="module")
def table(traj_0_1):
    return compare_poles(P01, 5, 12, traj=traj_0_1)


def test_compare_rows(table):
    keys = [(r.n, r.branch) for r in table.rows]
    assert keys == sorted(keys)
    assert len(table.rows) == 16
    for r in table.rows:
        assert r.x_ode is not None
        assert r.d_oi <= 0.02
        assert r.zero_bound is not None and r.d_oi <= r.zero_bound


def test_compare_improves_with_n(table):
    d = [table.d_oi(n) for n in range(5, 13)]
    for i in range(len(d) - 1):
        assert d[i + 1] <= 2 * d[i]


def test_compare_integrates_itself():
    t = compare_poles(Params(0.25, 2 * kappa_star(0.25)), 4, 6)
    assert all(r.x_ode is not None and r.d_oi <= 0.02 for r in t.rows)


def test_expansion_consistency_without_ode():
    t = compare_poles(P01, 100, 1000, with_ode=False)
    assert all(r.x_ode is None for r in t.rows)
    for br in ("plus", "minus"):
        rows = [r for r in t.rows if r.branch == br]
        k = rows[0].d_ie * 100**1.5 / math.log(100) ** 2
        for r in rows:
            assert r.d_ie <= 2 * k * math.log(r.n) ** 2 / r.n**1.5


def test_match_failure():
    phase = PhaseData(0.0, 0.0)
    lattice = predicted_poles(phase, -12, -1)
    n, br, x = lattice[4]
    gap = abs(lattice[4][2] - lattice[5][2])
    ok = match_poles([PoleRecord(x + 0.1 * gap, 1, 1.0)], lattice)
    assert list(ok) == [(n, br.value)]
    with pytest.raises(MatchFailure):
        match_poles([PoleRecord(x + 0.5 * gap, 1, 1.0)], lattice)
    with pytest.raises(MatchFailure):
        match_poles([PoleRecord(x, 1, 1.0), PoleRecord(x + 1e-3, -1, -1.0)], lattice)


def test_residue_audit():
    assert residue_audit([]).ok
    good = [PoleRecord(-1.0, 1, 1.0), PoleRecord(-2.0, -1, -1.0)]
    assert residue_audit(good).ok
    rpt = residue_audit([PoleRecord(-1.0, 1, 0.9)])
    assert not rpt.ok and "slope" in rpt.violations[0]
    rpt = residue_audit([PoleRecord(-1.0, 1, 1.0), PoleRecord(-2.0, 1, 1.0)])
    assert not rpt.ok


def test_implicit_used_for_rows(table):
    phase = table.phase
    for r in table.rows:
        assert r.x_implicit == pole_implicit(r.n, Branch(r.branch), phase)
