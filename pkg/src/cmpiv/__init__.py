"""Clarkson-McLeod solutions of Painleve IV with beta = 0.

Connection constants, backward integration through the pole field,
singular asymptotics as x -> -infinity and their cross-validation.
"""
from __future__ import annotations

__version__ = "0.1.0"

from .asymptotics import (
    Branch,
    PhaseData,
    pole_expansion,
    pole_implicit,
    predicted_poles,
    q_asymptotic,
    q_asymptotic_reciprocal,
    theta,
)
from .connection import (
    ConnectionData,
    Params,
    Regime,
    classify,
    connection_constants,
    kappa_star,
    rho_from_kappa,
    stokes_representative,
    verify_stokes,
)
from .marker import POLE
from .ode import OdeSettings, PoleRecord, Trajectory, evaluate, integrate, seed_boundary
from .specfun import pcf_d, pcf_d_prime
from .validation import compare_poles, residual_scan, residue_audit

__all__ = [
    "POLE",
    "Branch",
    "ConnectionData",
    "OdeSettings",
    "Params",
    "PhaseData",
    "PoleRecord",
    "Regime",
    "Trajectory",
    "classify",
    "compare_poles",
    "connection_constants",
    "evaluate",
    "integrate",
    "kappa_star",
    "pcf_d",
    "pcf_d_prime",
    "pole_expansion",
    "pole_implicit",
    "predicted_poles",
    "q_asymptotic",
    "q_asymptotic_reciprocal",
    "residual_scan",
    "residue_audit",
    "rho_from_kappa",
    "seed_boundary",
    "stokes_representative",
    "theta",
    "verify_stokes",
]
